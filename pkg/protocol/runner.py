"""Experiment drivers: train each model over D1..D10 and evaluate after every split."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import TYPE_CHECKING, Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.datasets import Dataset, LabeledArray, subsample
from core.errors import SplitError, UsageError
from core.metrics import per_class_accuracy, split_summary
from learners import BaseLearner, create_learner

from .schedule import SplitSchedule, make_schedule

if TYPE_CHECKING:
    from config import RunConfig

logger = logging.getLogger(__name__)

EXPERIMENT_ARMS: Dict[str, Tuple[str, ...]] = {
    "1": ("cobweb4v", "cobweb4v-fixed"),
    "2": ("cobwebnn-sparse", "cobwebnn-dense"),
    "3": ("cobweb4v-fixed", "cobwebnn-sparse"),
    "baseline": ("mlp", "mlp-replay", "cobweb4v"),
}

# (model, seed, split index, metrics) after every completed split
SplitCallback = Callable[[str, int, int, "SplitMetrics"], None]


@dataclass
class SplitMetrics:
    split: int
    chosen_acc: float
    nonchosen_acc: float
    overall_acc: float
    seconds: float
    per_class: List[float] = field(default_factory=list)


@dataclass
class RunRecord:
    """One model trained with one seed over the whole schedule."""

    model: str
    dataset: str
    seed: int
    chosen_class: int
    splits: List[SplitMetrics] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        for row in data["splits"]:
            for key in ("chosen_acc", "nonchosen_acc", "overall_acc"):
                row[key] = _json_float(row[key])
            row["per_class"] = [_json_float(v) for v in row["per_class"]]
        return data


def _json_float(value: float) -> Optional[float]:
    return None if math.isnan(value) else value


def resolve_arm(exp_id: str) -> Tuple[str, ...]:
    try:
        return EXPERIMENT_ARMS[str(exp_id)]
    except KeyError:
        raise UsageError(
            f"unknown experiment {exp_id!r}; expected one of {', '.join(EXPERIMENT_ARMS)}"
        ) from None


def evaluate(
    learner: BaseLearner, test: LabeledArray, n_classes: int, chosen_class: int, split: int = 0, seconds: float = 0.0
) -> SplitMetrics:
    """Score `learner` on `test`; per-class entries are NaN for absent classes."""
    proba = learner.predict_proba(test.features)
    chosen, nonchosen, overall = split_summary(proba, test.labels, n_classes, chosen_class)
    return SplitMetrics(
        split=split,
        chosen_acc=chosen,
        nonchosen_acc=nonchosen,
        overall_acc=overall,
        seconds=seconds,
        per_class=per_class_accuracy(proba, test.labels, n_classes).tolist(),
    )


def run_model(
    model: str,
    dataset: Dataset,
    schedule: SplitSchedule,
    run_config: "RunConfig",
    seed: int,
    on_split: Optional[SplitCallback] = None,
) -> RunRecord:
    """Train `model` sequentially over the schedule, evaluating after each split.

    Raises:
        SplitError: Wrapping any failure with the 1-based split index.
    """
    learner = create_learner(model, dataset.dim, dataset.n_classes, run_config, seed)
    record = RunRecord(model, dataset.name, seed, schedule.chosen_class)
    for i in range(1, len(schedule.splits) + 1):
        try:
            part = schedule.split(dataset.train, i)
            start = time.perf_counter()
            learner.partial_fit(part.features, part.labels)
            elapsed = time.perf_counter() - start
            seconds = elapsed if run_config.record_wall_clock else 0.0
            metrics = evaluate(learner, dataset.test, dataset.n_classes, schedule.chosen_class, i, seconds)
        except SplitError:
            raise
        except Exception as e:
            raise SplitError(i, e, model) from e
        record.splits.append(metrics)
        if on_split is not None:
            on_split(model, seed, i, metrics)
    record.summary = learner.summary()
    return record


def run_experiment(
    exp_id: str,
    dataset: Dataset,
    run_config: "RunConfig",
    models: Optional[Sequence[str]] = None,
    on_split: Optional[SplitCallback] = None,
) -> List[RunRecord]:
    """Run every model of an experiment arm for every configured seed.

    Each seed gets its own subsample and schedule; models of the same seed
    share them. Independent (model, seed) runs may execute on
    ``run_config.workers`` threads; results come back sorted by
    (model, seed).
    """
    models = tuple(models) if models is not None else resolve_arm(exp_id)
    jobs: List[Tuple[str, int, Dataset, SplitSchedule]] = []
    for seed in run_config.seeds:
        data = subsample(dataset, run_config.schedule.fraction, seed)
        schedule = make_schedule(
            data.train,
            data.n_classes,
            run_config.schedule.chosen_class,
            run_config.schedule.per_class_d1,
            seed,
        )
        jobs.extend((model, seed, data, schedule) for model in models)

    logger.info(
        "Experiment %s on %s: %d models x %d seeds", exp_id, dataset.name, len(models), len(run_config.seeds)
    )

    def run(job: Tuple[str, int, Dataset, SplitSchedule]) -> RunRecord:
        model, seed, data, schedule = job
        return run_model(model, data, schedule, run_config, seed, on_split)

    if run_config.workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=run_config.workers) as pool:
            records = list(pool.map(run, jobs))
    else:
        records = [run(job) for job in jobs]
    return sorted(records, key=lambda r: (r.model, r.seed))
