import json

import pytest

from config import MANIFEST_SCHEMA, Config, RunConfig
from core.errors import UsageError


def test_defaults():
    rc = RunConfig()
    assert rc.seeds == [0, 1, 2, 3, 4]
    assert rc.schedule.per_class_d1 == 30
    assert rc.predict.weight_sign == "positive"
    assert rc.tree.acuity == 0.25
    assert rc.mlp.replay_capacity == 1000
    assert rc.record_wall_clock is False


def test_unknown_key_is_named():
    with pytest.raises(UsageError, match="unknown config key: tree.acuityy"):
        RunConfig.parse({"tree": {"acuityy": 1.0}})


def test_invalid_value_is_named():
    with pytest.raises(UsageError, match="schedule.fraction"):
        RunConfig.parse({"schedule": {"fraction": 1.5}})


def test_duplicate_seeds():
    with pytest.raises(UsageError, match="distinct"):
        RunConfig.parse({"seeds": [1, 1]})


def test_overrides():
    rc = RunConfig().with_overrides(["tree.acuity=0.5", "predict.mode=greedy-leaf", "seeds=[3]"], model="mlp")
    assert rc.tree.acuity == 0.5
    assert rc.predict.mode == "greedy-leaf"
    assert rc.seeds == [3]
    assert rc.model == "mlp"


@pytest.mark.parametrize("assignment", ["nonsense", "tree.missing=1", "missing.key=1"])
def test_bad_overrides(assignment):
    with pytest.raises(UsageError):
        RunConfig().with_overrides([assignment])


def test_dumps_round_trip(tmp_path):
    rc = RunConfig().with_overrides(["cobwebnn.rate_mode=evidence"])
    path = tmp_path / "run.json"
    path.write_text(rc.dumps())
    assert RunConfig.load(str(path)) == rc


def test_load_a_manifest(tmp_path):
    rc = RunConfig().with_overrides(["schedule.chosen_class=4"])
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps({"schema": MANIFEST_SCHEMA, "version": 1, "config": json.loads(rc.dumps())}))
    assert RunConfig.load(str(path)).schedule.chosen_class == 4


def test_unreadable_file(tmp_path):
    with pytest.raises(UsageError):
        RunConfig.load(str(tmp_path / "missing.json"))
    (tmp_path / "bad.json").write_text("{")
    with pytest.raises(UsageError, match="not valid JSON"):
        RunConfig.load(str(tmp_path / "bad.json"))


def test_model_settings():
    rc = RunConfig()
    assert rc.tree_config(3, fixed=True).mode == "fixed"
    assert rc.cobwebnn_config(1, "sparse").mode == "sparse"
    assert rc.mlp_config(2).seed == 2


def test_environment(monkeypatch):
    monkeypatch.setenv("COBWEB_LAB_DATA_DIR", "/srv/datasets")
    env = Config()
    assert env.data_dir == "/srv/datasets"
    assert env.dataset_dir("mnist") == "/srv/datasets/mnist"


def test_negative_seed():
    with pytest.raises(UsageError, match="seeds"):
        RunConfig.parse({"seeds": [-1]})
