from __future__ import annotations

import gzip
import struct

import numpy as np
import pytest

from config import RunConfig
from core.datasets import synth_clusters
from core.stats import Instance
from core.tree import CobwebTree, TreeConfig


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def small_synth():
    """Three well separated classes in 16 dimensions."""
    return synth_clusters(n_classes=3, dim=16, per_class=40, spread=0.02, seed=7, test_per_class=10)


@pytest.fixture
def run_config(tmp_path) -> RunConfig:
    """Fast, wall-clock-free settings on a tiny synthetic dataset."""
    return RunConfig.parse(
        {
            "dataset": "synth",
            "output_dir": str(tmp_path / "out"),
            "data_dir": str(tmp_path / "data"),
            "seeds": [0],
            "record_wall_clock": False,
            "schedule": {"chosen_class": 0, "per_class_d1": 4, "fraction": 1.0},
            "synth": {"n_classes": 3, "dim": 16, "per_class": 40, "spread": 0.02, "test_per_class": 10, "seed": 7},
            "cobwebnn": {"depth": 2, "branching": 2, "epochs": 1, "batch_size": 16},
            "mlp": {"hidden": 8, "epochs": 1, "batch_size": 16, "replay_capacity": 20},
        }
    )


@pytest.fixture
def trained_tree(small_synth) -> CobwebTree:
    tree = CobwebTree(small_synth.dim, small_synth.n_classes, TreeConfig())
    for instance in small_synth.train.instances():
        tree.fit(instance)
    return tree


@pytest.fixture
def fit_points():
    """Fit scalar or vector points, with optional labels, in order."""

    def fit(tree: CobwebTree, points, labels=None) -> CobwebTree:
        for i, point in enumerate(points):
            label = None if labels is None else labels[i]
            tree.fit(Instance(np.atleast_1d(np.asarray(point, dtype=float)), label))
        return tree

    return fit


def write_idx(path, array: np.ndarray, gz: bool = False) -> None:
    array = np.asarray(array, dtype=np.uint8)
    code = 0x03 if array.ndim == 3 else 0x01
    header = struct.pack(">I", (0x08 << 8) | code) + struct.pack(f">{array.ndim}I", *array.shape)
    payload = header + array.tobytes()
    if gz:
        with gzip.open(f"{path}.gz", "wb") as f:
            f.write(payload)
    else:
        with open(path, "wb") as f:
            f.write(payload)


@pytest.fixture
def idx_writer():
    return write_idx


@pytest.fixture
def tiny_mnist(tmp_path):
    """A data directory holding a 4x4-pixel, 3-class MNIST-layout dataset."""
    root = tmp_path / "data"
    directory = root / "mnist"
    directory.mkdir(parents=True)
    rng = np.random.default_rng(11)
    for prefix, per_class, gz in (("train", 12, False), ("t10k", 4, True)):
        labels = np.repeat(np.arange(3), per_class).astype(np.uint8)
        images = np.clip(labels[:, None, None] * 100 + rng.integers(0, 20, size=(labels.size, 4, 4)), 0, 255)
        write_idx(directory / f"{prefix}-images-idx3-ubyte", images, gz=gz)
        write_idx(directory / f"{prefix}-labels-idx1-ubyte", labels, gz=gz)
    return root
