import json

import numpy as np
import pandas as pd
import pytest

from config import RunConfig
from core.datasets import Dataset, LabeledArray, save_canonical
from core.errors import CheckpointError, DataError, DimensionError, UsageError
from services import DataService, ExperimentService, FitService, PredictService, progress_service


@pytest.fixture
def fitted(run_config, tmp_path):
    out = tmp_path / "fit"
    summary = FitService.run_fit("fit-job", run_config, str(out))
    return out, summary


class TestDataService:
    def test_synth_follows_the_config(self, run_config):
        dataset = DataService.load(run_config)
        assert dataset.name == "synth-k3-d16"
        assert DataService.probe(run_config)["dim"] == 16

    def test_idx_directory(self, run_config, tiny_mnist):
        rc = run_config.with_overrides(dataset="mnist", data_dir=str(tiny_mnist))
        assert DataService.probe(rc) == {"name": "mnist", "n_train": 36, "n_test": 12, "dim": 16, "n_classes": 10}
        assert len(DataService.load(rc).train) == 36

    def test_canonical_file(self, run_config, small_synth, tmp_path):
        path = save_canonical(small_synth, tmp_path / "d.clds")
        rc = run_config.with_overrides(dataset=str(path))
        assert DataService.load(rc).describe() == small_synth.describe()

    @pytest.mark.parametrize("selector", ["dtaa.clds", "runs/data.bin", "data.clds.gz"])
    def test_misspelt_path_reports_the_missing_file(self, run_config, tmp_path, selector):
        rc = run_config.with_overrides(dataset=str(tmp_path / selector))
        with pytest.raises(DataError, match="no such file"):
            DataService.load(rc)
        with pytest.raises(DataError, match="no such file"):
            DataService.probe(rc)

    def test_selector_forms(self):
        assert DataService.is_canonical("typo.clds")
        assert DataService.is_canonical("some/dir/file")
        assert not DataService.is_canonical("mnist")
        assert not DataService.is_canonical("minst")

    def test_unknown_selector(self, run_config):
        with pytest.raises(UsageError, match="unknown dataset"):
            DataService.load(run_config.with_overrides(dataset="imagenet"))


class TestFitService:
    def test_writes_checkpoint_and_summary(self, fitted):
        out, summary = fitted
        assert (out / "checkpoint.json").is_file()
        on_disk = json.loads((out / "summary.json").read_text())
        assert on_disk == json.loads(json.dumps(summary))
        assert summary["test_accuracy"] >= 0.9
        assert summary["train_seconds"] == 0.0
        assert summary["size"]["node_count"] >= 3

    def test_checkpoint_is_reproducible(self, run_config, fitted, tmp_path):
        _, summary = fitted
        again = FitService.run_fit("fit-again", run_config, str(tmp_path / "again"))
        assert again["checkpoint_sha256"] == summary["checkpoint_sha256"]

    def test_load_checkpoint(self, fitted, run_config):
        out, _ = fitted
        learner, rc = FitService.load_checkpoint(str(out / "checkpoint.json"))
        assert learner.name == "cobweb4v"
        assert rc == run_config

    def test_checkpoint_version(self, fitted):
        out, _ = fitted
        path = out / "checkpoint.json"
        data = json.loads(path.read_text())
        data["version"] = 5
        path.write_text(json.dumps(data))
        with pytest.raises(CheckpointError, match="version 5.*version 1"):
            FitService.load_checkpoint(str(path))

    def test_progress_events(self, run_config, tmp_path):
        seen = []
        progress_service.subscribe("fit-events", seen.append)
        FitService.run_fit("fit-events", run_config, str(tmp_path / "fit"))
        events = [e.event for e in seen]
        assert events[0] == "log"
        assert events[-1] == "complete"
        # finished jobs are closed
        assert progress_service.history("fit-events") == []
        assert "fit-events" not in progress_service.subscribers

    def test_failed_jobs_are_closed(self, run_config, tmp_path):
        seen = []
        progress_service.subscribe("fit-broken", seen.append)
        with pytest.raises(UsageError):
            FitService.run_fit("fit-broken", run_config.with_overrides(dataset="imagenet"), str(tmp_path / "fit"))
        assert seen[-1].event == "error"
        assert "fit-broken" not in progress_service.jobs

    def test_dry_run_checks_model(self, run_config):
        assert FitService.dry_run(run_config)["dataset"]["name"] == "synth"


class TestPredictService:
    def test_matches_the_library(self, fitted, small_synth, tmp_path):
        out, _ = fitted
        instances = save_canonical(small_synth, tmp_path / "instances.clds")
        result = PredictService.run_predict("p", str(out / "checkpoint.json"), str(instances), str(tmp_path / "p.csv"))
        assert result["instances"] == 150
        frame = pd.read_csv(tmp_path / "p.csv")
        assert list(frame.columns) == ["index", "p_0", "p_1", "p_2", "label"]
        learner, _ = FitService.load_checkpoint(str(out / "checkpoint.json"))
        rows = np.vstack([small_synth.train.features, small_synth.test.features])
        expected = learner.predict_proba(rows)
        np.testing.assert_allclose(frame[["p_0", "p_1", "p_2"]].to_numpy(), expected, rtol=1e-9)
        assert frame["label"].tolist() == expected.argmax(axis=1).tolist()

    def test_empty_instances(self, fitted, tmp_path):
        out, _ = fitted
        empty = Dataset("empty", LabeledArray.empty(16), LabeledArray.empty(16), n_classes=3)
        instances = save_canonical(empty, tmp_path / "empty.clds")
        PredictService.run_predict("p", str(out / "checkpoint.json"), str(instances), str(tmp_path / "p.csv"))
        frame = pd.read_csv(tmp_path / "p.csv")
        assert len(frame) == 0
        assert list(frame.columns) == ["index", "p_0", "p_1", "p_2", "label"]

    def test_dimension_mismatch(self, fitted, tmp_path):
        out, _ = fitted
        other = Dataset("narrow", LabeledArray(np.zeros((2, 8)), [0, 1]), LabeledArray.empty(8), n_classes=2)
        instances = save_canonical(other, tmp_path / "narrow.clds")
        with pytest.raises(DimensionError):
            PredictService.dry_run(str(out / "checkpoint.json"), str(instances))
        with pytest.raises(DimensionError):
            PredictService.run_predict("p", str(out / "checkpoint.json"), str(instances), str(tmp_path / "p.csv"))


class TestExperimentService:
    @pytest.fixture
    def two_seeds(self, run_config) -> RunConfig:
        return run_config.with_overrides(["seeds=[0,1]"])

    def test_outputs(self, two_seeds, tmp_path):
        outputs = ExperimentService.run_experiment_job("e", "1", two_seeds, str(tmp_path / "e"))
        metrics = pd.read_csv(outputs["metrics"])
        assert list(metrics.columns) == [
            "model", "dataset", "split", "chosen_acc", "nonchosen_acc", "overall_acc", "seconds"
        ]
        assert len(metrics) == 20
        assert set(metrics["model"]) == {"cobweb4v", "cobweb4v-fixed"}

        manifest = json.loads(open(outputs["manifest"]).read())
        assert manifest["schema"] == "cobweb-lab/run-manifest"
        assert manifest["models"] == ["cobweb4v", "cobweb4v-fixed"]
        assert len(manifest["records"]) == 4

        curves = pd.read_csv(outputs["curves"])
        assert list(curves.columns) == ["model", "class_group", "series", "split", "accuracy"]
        assert len(curves) == 60
        assert set(curves["series"]) == {f"{m}/{g}" for m in ("cobweb4v", "cobweb4v-fixed") for g in ("chosen", "nonchosen", "overall")}

    def test_metrics_are_seed_means(self, two_seeds, tmp_path):
        outputs = ExperimentService.run_experiment_job("e", "1", two_seeds, str(tmp_path / "e"))
        metrics = pd.read_csv(outputs["metrics"])
        manifest = json.loads(open(outputs["manifest"]).read())
        record_rows = [r for r in manifest["records"] if r["model"] == "cobweb4v"]
        expected = np.mean([r["splits"][4]["overall_acc"] for r in record_rows])
        row = metrics[(metrics["model"] == "cobweb4v") & (metrics["split"] == 5)]
        assert row["overall_acc"].item() == pytest.approx(expected, abs=1e-6)

    def test_manifest_reproduces_metrics(self, two_seeds, tmp_path):
        first = ExperimentService.run_experiment_job("e", "1", two_seeds, str(tmp_path / "a"))
        replay = RunConfig.load(first["manifest"])
        assert replay == two_seeds
        second = ExperimentService.run_experiment_job("e", "1", replay, str(tmp_path / "b"))
        with open(first["metrics"], "rb") as a, open(second["metrics"], "rb") as b:
            assert a.read() == b.read()

    def test_no_curves(self, run_config, tmp_path):
        outputs = ExperimentService.run_experiment_job("e", "baseline", run_config, str(tmp_path / "e"), curves=False)
        assert "curves" not in outputs
        assert not (tmp_path / "e" / "curves.csv").exists()

    def test_dry_run(self, run_config):
        result = ExperimentService.dry_run("2", run_config)
        assert result["models"] == ["cobwebnn-sparse", "cobwebnn-dense"]

    def test_make_splits(self, two_seeds, tmp_path):
        doc = ExperimentService.make_splits("s", two_seeds, str(tmp_path / "splits.json"))
        assert [s["seed"] for s in doc["schedules"]] == [0, 1]
        assert doc["schedules"][0]["sizes"] == [12, 44] + [8] * 8
        on_disk = json.loads((tmp_path / "splits.json").read_text())
        assert on_disk["schedules"][1]["splits"] == doc["schedules"][1]["splits"]
