"""Qualitative behaviour of the protocol: forgetting curves and model ordering.

The synthetic checks run everywhere; the MNIST checks need the IDX files under
``$COBWEB_LAB_DATA_DIR/mnist`` and are skipped otherwise.
"""

import numpy as np
import pytest

from config import RunConfig, config
from core.datasets import idx_paths
from core.errors import DataError
from protocol import run_experiment
from services import DataService

pytestmark = pytest.mark.slow


def by_model(records):
    return {r.model: r for r in records}


@pytest.fixture
def synth_config(tmp_path) -> RunConfig:
    return RunConfig.parse(
        {
            "dataset": "synth",
            "output_dir": str(tmp_path),
            "seeds": [0],
            "record_wall_clock": False,
            "schedule": {"chosen_class": 0, "per_class_d1": 10, "fraction": 1.0},
            "synth": {"n_classes": 5, "dim": 32, "per_class": 200, "spread": 0.05, "test_per_class": 40, "seed": 3},
            "cobwebnn": {"depth": 3, "branching": 3, "epochs": 3, "batch_size": 16, "lr": 0.05},
            "mlp": {"hidden": 32, "epochs": 20, "batch_size": 16, "lr": 0.01, "replay_capacity": 200},
        }
    )


@pytest.fixture(scope="module")
def mnist_config() -> RunConfig:
    try:
        idx_paths(config.dataset_dir("mnist"))
    except DataError:
        pytest.skip("MNIST IDX files not found")
    return RunConfig.parse(
        {
            "dataset": "mnist",
            "record_wall_clock": False,
            "schedule": {"chosen_class": 0, "per_class_d1": 30, "fraction": 0.1},
        }
    )


class TestSynthetic:
    def test_concept_trees_keep_the_chosen_class(self, synth_config):
        dataset = DataService.load(synth_config)
        for record in run_experiment("1", dataset, synth_config):
            assert record.splits[-1].chosen_acc >= 0.8
            assert record.splits[-1].nonchosen_acc >= 0.8

    def test_mlp_forgets_and_replay_helps(self, synth_config):
        dataset = DataService.load(synth_config)
        runs = by_model(run_experiment("baseline", dataset, synth_config))
        plain, replay = runs["mlp"].splits, runs["mlp-replay"].splits
        assert plain[1].chosen_acc > plain[-1].chosen_acc
        assert replay[-1].chosen_acc > plain[-1].chosen_acc
        assert runs["cobweb4v"].splits[-1].chosen_acc > plain[-1].chosen_acc


def d10_mean(records, model, column):
    return float(np.mean([getattr(r.splits[-1], column) for r in records if r.model == model]))


class TestMnist:
    def test_fixed_tree_retains_what_the_sparse_network_forgets(self, mnist_config):
        records = run_experiment("3", DataService.load(mnist_config), mnist_config)
        tree = d10_mean(records, "cobweb4v-fixed", "chosen_acc")
        assert tree - d10_mean(records, "cobwebnn-sparse", "chosen_acc") >= 0.30
        peak = float(np.mean([r.splits[1].chosen_acc for r in records if r.model == "cobweb4v-fixed"]))
        assert peak - tree <= 0.25

    def test_replay_and_concept_trees_against_plain_mlp(self, mnist_config):
        records = run_experiment("baseline", DataService.load(mnist_config), mnist_config)
        plain = d10_mean(records, "mlp", "chosen_acc")
        replay = d10_mean(records, "mlp-replay", "chosen_acc")
        assert plain < 0.10
        assert replay > plain
        assert d10_mean(records, "cobweb4v", "chosen_acc") > max(plain, replay)

    def test_adaptive_structure_is_not_worse_than_fixed(self, mnist_config):
        records = run_experiment("1", DataService.load(mnist_config), mnist_config)
        assert d10_mean(records, "cobweb4v", "overall_acc") >= d10_mean(records, "cobweb4v-fixed", "overall_acc")
