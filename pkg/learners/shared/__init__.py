"""Shared utilities for learner plugins.

    from learners.shared import as_matrix, fmt_time
"""

from .utils import as_matrix, fmt_time, uniform_proba

__all__ = [
    "as_matrix",
    "fmt_time",
    "uniform_proba",
]
