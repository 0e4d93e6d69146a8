"""Continual-learning protocol: split schedule, evaluation and experiment runs."""

from .runner import (
    EXPERIMENT_ARMS,
    RunRecord,
    SplitMetrics,
    evaluate,
    resolve_arm,
    run_experiment,
    run_model,
)
from .schedule import N_SPLITS, SplitSchedule, make_schedule

__all__ = [
    "EXPERIMENT_ARMS",
    "N_SPLITS",
    "RunRecord",
    "SplitMetrics",
    "SplitSchedule",
    "evaluate",
    "make_schedule",
    "resolve_arm",
    "run_experiment",
    "run_model",
]
