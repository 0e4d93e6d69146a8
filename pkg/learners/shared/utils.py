"""Shared utilities for learner plugins and services."""

from __future__ import annotations

import numpy as np

from core.errors import DataError, DimensionError


def as_matrix(features, dim: int) -> np.ndarray:
    """Validate a feature batch and return it as float64.

    Raises:
        DimensionError: If the column count differs from `dim`.
        DataError: If the batch is not 2-D or holds non-finite values.
    """
    arr = np.asarray(features, dtype=np.float64)
    if arr.ndim != 2:
        raise DataError(f"expected a 2-D feature matrix, got shape {arr.shape}")
    if arr.shape[1] != dim:
        raise DimensionError(dim, arr.shape[1])
    if not np.isfinite(arr).all():
        raise DataError("features contain non-finite values")
    return arr


def uniform_proba(n: int, n_classes: int) -> np.ndarray:
    """Predictions of an untrained model."""
    return np.full((n, n_classes), 1.0 / n_classes)


def fmt_time(s: float) -> str:
    """Format seconds as HH:MM:SS.

    Args:
        s: Number of seconds.

    Returns:
        Formatted time string like "01:23:45".
    """
    s = int(max(0, s))
    h, r = divmod(s, 3600)
    m, s = divmod(r, 60)
    return f"{h:02d}:{m:02d}:{s:02d}"

