"""The ten-split continual-learning schedule.

Split 1 holds ``per_class_d1`` instances of every class. Split 2 holds the
rest of the chosen class plus another ``per_class_d1`` of every other class.
Whatever remains of the other classes is spread as evenly as possible over
splits 3 to 10, so the chosen class is never seen again after split 2.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Dict, List

import numpy as np

from core.datasets import LabeledArray
from core.errors import DataError, ScheduleError, UsageError
from core.seeding import substream

logger = logging.getLogger(__name__)

N_SPLITS = 10
_LATE_SPLITS = N_SPLITS - 2


@dataclass(eq=False)
class SplitSchedule:
    """Index lists into a training pool, one per split D1..D10."""

    chosen_class: int
    splits: List[np.ndarray]
    seed: int
    per_class_d1: int

    def sizes(self) -> List[int]:
        return [int(s.shape[0]) for s in self.splits]

    def split(self, pool: LabeledArray, i: int) -> LabeledArray:
        """Split `i` (1-based) of `pool`."""
        return pool.take(self.splits[i - 1])

    def check(self, labels: np.ndarray) -> None:
        """Assert disjointness, coverage and chosen-class exclusivity.

        Raises:
            DataError: If any property is violated.
        """
        everything = np.concatenate(self.splits)
        if np.unique(everything).shape[0] != everything.shape[0]:
            raise DataError("splits overlap")
        if everything.shape[0] != labels.shape[0]:
            raise DataError(f"splits cover {everything.shape[0]} of {labels.shape[0]} instances")
        for i, split in enumerate(self.splits[2:], start=3):
            if np.any(labels[split] == self.chosen_class):
                raise DataError(f"chosen class present in split D{i}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "chosen_class": self.chosen_class,
            "seed": self.seed,
            "per_class_d1": self.per_class_d1,
            "splits": [s.tolist() for s in self.splits],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SplitSchedule":
        return cls(
            chosen_class=int(data["chosen_class"]),
            splits=[np.asarray(s, dtype=np.int64) for s in data["splits"]],
            seed=int(data["seed"]),
            per_class_d1=int(data["per_class_d1"]),
        )


def make_schedule(
    pool: LabeledArray,
    n_classes: int,
    chosen_class: int,
    per_class_d1: int,
    seed: int,
) -> SplitSchedule:
    """Partition `pool` into the ten splits.

    Raises:
        UsageError: Chosen class outside [0, K) or non-positive quota.
        ScheduleError: A class has fewer than ``2 * per_class_d1`` instances.
    """
    if not 0 <= chosen_class < n_classes:
        raise UsageError(f"chosen_class {chosen_class} outside [0, {n_classes})")
    if per_class_d1 < 1:
        raise UsageError("per_class_d1 must be >= 1")
    rng = substream(seed, "schedule")
    parts: List[List[np.ndarray]] = [[] for _ in range(N_SPLITS)]
    for label in range(n_classes):
        members = np.flatnonzero(pool.labels == label)
        if members.shape[0] < 2 * per_class_d1:
            raise ScheduleError(
                f"class {label} has {members.shape[0]} training instances; "
                f"the schedule needs at least {2 * per_class_d1}"
            )
        members = rng.permutation(members)
        parts[0].append(members[:per_class_d1])
        if label == chosen_class:
            parts[1].append(members[per_class_d1:])
            continue
        parts[1].append(members[per_class_d1 : 2 * per_class_d1])
        for i, chunk in enumerate(np.array_split(members[2 * per_class_d1 :], _LATE_SPLITS)):
            parts[2 + i].append(chunk)
    splits = [
        rng.permutation(np.concatenate(p)).astype(np.int64) if p else np.zeros(0, dtype=np.int64)
        for p in parts
    ]
    schedule = SplitSchedule(chosen_class, splits, seed, per_class_d1)
    logger.debug("Schedule (seed %d, chosen %d): sizes %s", seed, chosen_class, schedule.sizes())
    return schedule
