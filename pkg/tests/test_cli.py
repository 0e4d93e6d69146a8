import json

import pytest

from cli import main
from core.datasets import Dataset, LabeledArray, save_canonical


@pytest.fixture
def config_file(run_config, tmp_path):
    path = tmp_path / "run.json"
    path.write_text(run_config.dumps())
    return str(path)


def fit(config_file, out, model="cobweb4v"):
    assert main(["fit", "--config", config_file, "--model", model, "--output-dir", str(out)]) == 0
    return str(out / "checkpoint.json")


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert "cobweb-lab" in capsys.readouterr().out


def test_missing_subcommand():
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2


def test_unknown_config_key(config_file, capsys):
    assert main(["fit", "--config", config_file, "--set", "tree.bogus=1", "--dry-run"]) == 2
    assert "unknown config key: tree.bogus" in capsys.readouterr().err


def test_unknown_model(config_file, capsys):
    assert main(["fit", "--config", config_file, "--model", "perceptron"]) == 2


def test_missing_dataset_files(config_file, tmp_path, capsys):
    code = main(["fit", "--config", config_file, "--dataset", "mnist", "--data-dir", str(tmp_path / "none")])
    assert code == 3
    assert "missing train-images-idx3-ubyte" in capsys.readouterr().err


def test_fit_then_predict(config_file, small_synth, tmp_path):
    checkpoint = fit(config_file, tmp_path / "fit")
    instances = save_canonical(small_synth, tmp_path / "x.clds")
    output = tmp_path / "pred.csv"
    assert main(["predict", checkpoint, str(instances), "--output", str(output)]) == 0
    assert len(output.read_text().splitlines()) == 151


def test_predict_dimension_mismatch(config_file, tmp_path, capsys):
    checkpoint = fit(config_file, tmp_path / "fit")
    narrow = Dataset("narrow", LabeledArray.empty(8), LabeledArray.empty(8), n_classes=3)
    instances = save_canonical(narrow, tmp_path / "narrow.clds")
    assert main(["predict", checkpoint, str(instances), "--output", str(tmp_path / "p.csv")]) == 3
    assert "expected D=16, got D=8" in capsys.readouterr().err


def test_dry_runs_write_nothing(config_file, tmp_path, tiny_mnist):
    out = tmp_path / "dry"
    assert main(["fit", "--config", config_file, "--output-dir", str(out), "--dry-run"]) == 0
    assert main(["experiment", "3", "--config", config_file, "--output-dir", str(out), "--dry-run"]) == 0
    assert main(["make-splits", "--config", config_file, "--output-dir", str(out), "--dry-run"]) == 0
    assert main(
        ["experiment", "1", "--config", config_file, "--dataset", "mnist", "--data-dir", str(tiny_mnist), "--dry-run"]
    ) == 0
    assert not out.exists()


def test_inspect_tree(config_file, tmp_path, capsys):
    checkpoint = fit(config_file, tmp_path / "fit", model="cobweb4v-fixed")
    capsys.readouterr()
    assert main(["inspect-tree", checkpoint]) == 0
    stats = json.loads(capsys.readouterr().out)
    assert stats["depth"] <= 4
    assert stats["node_count"] >= 1


def test_inspect_tree_rejects_other_models(config_file, tmp_path, capsys):
    checkpoint = fit(config_file, tmp_path / "fit", model="mlp")
    assert main(["inspect-tree", checkpoint]) == 2
    assert "not a concept tree" in capsys.readouterr().err


def test_experiment_reruns_are_byte_identical(config_file, tmp_path):
    for name in ("a", "b"):
        assert main(["experiment", "baseline", "--config", config_file, "--output-dir", str(tmp_path / name)]) == 0
    for output in ("metrics.csv", "curves.csv"):
        assert (tmp_path / "a" / output).read_bytes() == (tmp_path / "b" / output).read_bytes()


def test_make_splits_with_seed_flag(config_file, tmp_path):
    output = tmp_path / "splits.json"
    assert main(["make-splits", "--config", config_file, "--seed", "9", "--output", str(output)]) == 0
    doc = json.loads(output.read_text())
    assert [s["seed"] for s in doc["schedules"]] == [9]


def test_bad_checkpoint(tmp_path, small_synth, capsys):
    path = tmp_path / "checkpoint.json"
    path.write_text("{}")
    instances = save_canonical(small_synth, tmp_path / "x.clds")
    assert main(["predict", str(path), str(instances), "--output", str(tmp_path / "p.csv")]) == 3
    assert "not a checkpoint" in capsys.readouterr().err


def test_default_fit_reruns_are_byte_identical(tmp_path):
    small = ["--set", "synth.per_class=20", "--set", "synth.dim=8", "--set", "mlp.epochs=1"]
    for name in ("a", "b"):
        assert main(["fit", "--model", "mlp", *small, "--output-dir", str(tmp_path / name)]) == 0
    summary = (tmp_path / "a" / "summary.json").read_bytes()
    assert summary == (tmp_path / "b" / "summary.json").read_bytes()
    assert json.loads(summary)["train_seconds"] == 0.0
