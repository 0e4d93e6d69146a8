"""Accuracy bookkeeping for the split protocol."""

from __future__ import annotations

import math
from typing import Tuple

import numpy as np

from .errors import DataError


def predicted_labels(proba: np.ndarray) -> np.ndarray:
    """Row argmax; ties resolve to the lowest label id."""
    return np.argmax(np.asarray(proba), axis=1)


def per_class_accuracy(proba: np.ndarray, labels: np.ndarray, n_classes: int) -> np.ndarray:
    """Accuracy per class; NaN where the class has no test instances."""
    proba = np.asarray(proba)
    labels = np.asarray(labels, dtype=np.int64)
    if proba.shape != (labels.shape[0], n_classes):
        raise DataError(f"expected a ({labels.shape[0]}, {n_classes}) matrix, got {proba.shape}")
    hits = predicted_labels(proba) == labels
    totals = np.bincount(labels, minlength=n_classes).astype(np.float64)
    correct = np.bincount(labels, weights=hits.astype(np.float64), minlength=n_classes)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(totals > 0, correct / np.where(totals > 0, totals, 1.0), np.nan)


def split_summary(
    proba: np.ndarray, labels: np.ndarray, n_classes: int, chosen_class: int
) -> Tuple[float, float, float]:
    """(chosen-class accuracy, mean non-chosen class accuracy, overall accuracy)."""
    per_class = per_class_accuracy(proba, labels, n_classes)
    chosen = float(per_class[chosen_class])
    others = np.delete(per_class, chosen_class)
    others = others[~np.isnan(others)]
    nonchosen = float(others.mean()) if others.size else math.nan
    labels = np.asarray(labels)
    overall = float((predicted_labels(proba) == labels).mean()) if labels.size else math.nan
    return chosen, nonchosen, overall
