"""Dataset selection: named benchmarks, synthetic clusters or canonical dumps."""

from __future__ import annotations

import logging
import os
from pathlib import Path
from typing import Any, Dict

from config import RunConfig
from core.datasets import (
    Dataset,
    cifar10_paths,
    idx_paths,
    load_canonical,
    load_cifar10_binary,
    load_idx_dataset,
    load_raw_stack_dataset,
    read_canonical_header,
    read_idx_header,
    synth_clusters,
)
from core.errors import DataError, UsageError

logger = logging.getLogger(__name__)

IDX_DATASETS = {"mnist": 10, "fashion-mnist": 10}
ORGANAMNIST = {"dim": 28 * 28, "n_classes": 11}
DATASETS = ("synth", "mnist", "fashion-mnist", "cifar10", "organamnist")


class DataService:
    @staticmethod
    def is_canonical(selector: str) -> bool:
        """Whether `selector` names a canonical dump rather than a dataset.

        Decided by form, not by existence, so a misspelt path reports the
        missing file.
        """
        if selector in DATASETS:
            return False
        path = Path(selector)
        if path.suffix == ".clds" or path.suffixes[-2:] == [".clds", ".gz"]:
            return True
        return "/" in selector or os.sep in selector or path.is_file()

    @staticmethod
    def load(run_config: RunConfig) -> Dataset:
        """The full dataset named by ``run_config.dataset``.

        Raises:
            UsageError: Unknown selector.
            DataError: Missing or malformed files.
        """
        selector = run_config.dataset
        root = Path(run_config.resolved_data_dir)
        if selector == "synth":
            s = run_config.synth
            return synth_clusters(
                s.n_classes, s.dim, s.per_class, s.spread, seed=s.seed, test_per_class=s.test_per_class
            )
        if DataService.is_canonical(selector):
            return load_canonical(selector)
        if selector in IDX_DATASETS:
            logger.info("Loading %s from %s", selector, root / selector)
            return load_idx_dataset(root / selector, selector, IDX_DATASETS[selector])
        if selector == "cifar10":
            train, test = cifar10_paths(root / selector)
            return load_cifar10_binary(train, test, name=selector)
        if selector == "organamnist":
            return load_raw_stack_dataset(
                root / selector, selector, ORGANAMNIST["dim"], ORGANAMNIST["n_classes"]
            )
        raise UsageError(
            f"unknown dataset {selector!r}; expected one of {', '.join(DATASETS)} or a .clds file"
        )

    @staticmethod
    def probe(run_config: RunConfig) -> Dict[str, Any]:
        """Check that the dataset's files exist and their headers parse.

        Reads headers only; nothing is decoded.
        """
        selector = run_config.dataset
        root = Path(run_config.resolved_data_dir)
        if selector == "synth":
            s = run_config.synth
            return {"name": "synth", "dim": s.dim, "n_classes": s.n_classes}
        if DataService.is_canonical(selector):
            return read_canonical_header(selector)
        if selector in IDX_DATASETS:
            paths = idx_paths(root / selector)
            _, train_dims = read_idx_header(paths["train_images"])
            _, test_dims = read_idx_header(paths["test_images"])
            dim = 1
            for d in train_dims[1:]:
                dim *= d
            return {
                "name": selector,
                "n_train": train_dims[0],
                "n_test": test_dims[0],
                "dim": dim,
                "n_classes": IDX_DATASETS[selector],
            }
        if selector == "cifar10":
            train, test = cifar10_paths(root / selector)
            for path in [*train, *test]:
                if path.suffix != ".gz" and os.path.getsize(path) % 3073:
                    raise DataError(f"{path}: not a whole number of 3073-byte records")
            return {"name": selector, "dim": 3072, "n_classes": 10}
        if selector == "organamnist":
            directory = root / selector
            for stem in ("train_images.u8", "train_labels.u8", "test_images.u8", "test_labels.u8"):
                if not any((directory / name).is_file() for name in (stem, f"{stem}.gz")):
                    raise DataError(f"missing {stem} in {directory}")
            return {"name": selector, **ORGANAMNIST}
        raise UsageError(
            f"unknown dataset {selector!r}; expected one of {', '.join(DATASETS)} or a .clds file"
        )
