"""Incremental Gaussian sufficiency statistics, entropies and likelihoods.

Every function here is pure: inputs are never modified and results are new
values, so the module is safe to call from any number of threads.

Variances are population variances (m2 / N). Reported variances are floored
at ``acuity ** 2`` so single-instance concepts keep a finite density and
entropy. Differential entropy can be negative once the floored standard
deviation drops below (2 pi e) ** -0.5; utility differences stay well defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import entr

from .errors import DataError, DimensionError, UndefinedEntropyError

DEFAULT_ACUITY = 0.25
LOG_2PI = math.log(2.0 * math.pi)
LOG_2PI_E = math.log(2.0 * math.pi * math.e)
INV_2_SQRT_PI = 1.0 / (2.0 * math.sqrt(math.pi))


@dataclass(frozen=True)
class AttributeWeights:
    """Relative weight of the pixel block and the label attribute."""

    pixel: float = 1.0
    label: float = 1.0


@dataclass(frozen=True, eq=False)
class GaussianStats:
    """Count, mean and sum of squared deviations for one concept.

    Attributes:
        count: Number of absorbed instances (N).
        mean: Per-attribute mean, length D.
        m2: Per-attribute sum of squared deviations, length D.
    """

    count: int
    mean: np.ndarray
    m2: np.ndarray

    @classmethod
    def empty(cls, dim: int) -> "GaussianStats":
        return cls(0, np.zeros(dim), np.zeros(dim))

    @property
    def dim(self) -> int:
        return int(self.mean.shape[0])

    def raw_variance(self) -> np.ndarray:
        """Population variance without the acuity floor."""
        if self.count == 0:
            return np.zeros(self.dim)
        return self.m2 / self.count

    def variance(self, acuity: float = DEFAULT_ACUITY) -> np.ndarray:
        """Population variance floored at ``acuity ** 2``."""
        return np.maximum(self.raw_variance(), acuity * acuity)


@dataclass(frozen=True, eq=False)
class LabelCounts:
    """Raw (unsmoothed) class counts for one concept."""

    counts: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    @classmethod
    def empty(cls, n_classes: int) -> "LabelCounts":
        return cls(np.zeros(n_classes, dtype=np.int64))

    @property
    def n_classes(self) -> int:
        return int(self.counts.shape[0])

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def add(self, label: Optional[int]) -> "LabelCounts":
        if label is None:
            return self
        if not 0 <= label < self.n_classes:
            raise DataError(f"label {label} outside [0, {self.n_classes})")
        counts = self.counts.copy()
        counts[label] += 1
        return LabelCounts(counts)

    def merge(self, other: "LabelCounts") -> "LabelCounts":
        return LabelCounts(self.counts + other.counts)

    def probabilities(self, smoothing: float = 1.0) -> np.ndarray:
        """P(label | concept) with `smoothing` pseudo-counts per class."""
        k = self.n_classes
        total = self.counts.sum() + smoothing * k
        if total <= 0:
            return np.full(k, 1.0 / k) if k else np.zeros(0)
        return (self.counts + smoothing) / total


def as_features(x, dim: Optional[int] = None) -> np.ndarray:
    """Validate and convert a feature vector to float64.

    Raises:
        DimensionError: If `x` is not 1-D of length `dim`.
        DataError: If any value is not finite.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise DataError(f"features must be a vector, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionError(dim, arr.shape[0])
    if not np.isfinite(arr).all():
        raise DataError("features contain non-finite values")
    return arr


def update_stats(stats: GaussianStats, x) -> GaussianStats:
    """Absorb one observation (Welford form of the mean/variance recurrence)."""
    x = as_features(x, stats.dim)
    count = stats.count + 1
    delta = x - stats.mean
    mean = stats.mean + delta / count
    m2 = np.maximum(stats.m2 + delta * (x - mean), 0.0)
    return GaussianStats(count, mean, m2)


def merge_stats(a: GaussianStats, b: GaussianStats) -> GaussianStats:
    """Combine two statistics as if both streams had been replayed into one.

    Raises:
        DimensionError: If the two statistics differ in dimensionality.
    """
    if a.dim != b.dim:
        raise DimensionError(a.dim, b.dim, what="merge_stats")
    if b.count == 0:
        return a
    if a.count == 0:
        return b
    count = a.count + b.count
    delta = b.mean - a.mean
    mean = a.mean + delta * (b.count / count)
    m2 = a.m2 + b.m2 + delta * delta * (a.count * b.count / count)
    return GaussianStats(count, mean, np.maximum(m2, 0.0))


def moving_average_step(mean: np.ndarray, x, rate: float) -> np.ndarray:
    """One gradient step on 0.5 * ||x - mean||^2 with learning rate `rate`."""
    x = as_features(x, mean.shape[0])
    return mean - rate * (mean - x)


def label_entropy(labels: Optional[LabelCounts], smoothing: float = 0.0) -> float:
    """Shannon entropy (nats) of the label distribution; 0 without labels."""
    if labels is None or labels.n_classes == 0:
        return 0.0
    if labels.total == 0 and smoothing <= 0:
        return 0.0
    return float(entr(labels.probabilities(smoothing)).sum())


def node_entropy(
    stats: GaussianStats,
    labels: Optional[LabelCounts] = None,
    weights: AttributeWeights = AttributeWeights(),
    acuity: float = DEFAULT_ACUITY,
    smoothing: float = 0.0,
) -> float:
    """Sum of per-attribute entropies under conditional independence.

    Raises:
        UndefinedEntropyError: If the concept has absorbed no instances.
    """
    if stats.count < 1:
        raise UndefinedEntropyError("entropy of an empty concept is undefined")
    var = stats.variance(acuity)
    pixel = 0.5 * float(np.sum(LOG_2PI_E + np.log(var)))
    return weights.pixel * pixel + weights.label * label_entropy(labels, smoothing)


def expected_correct(
    stats: GaussianStats,
    labels: Optional[LabelCounts] = None,
    weights: AttributeWeights = AttributeWeights(),
    acuity: float = DEFAULT_ACUITY,
) -> float:
    """Expected number of correctly guessed attribute values.

    Continuous attributes contribute 1 / (2 sqrt(pi) sigma); the label
    contributes the sum of its squared class probabilities.
    """
    if stats.count < 1:
        raise UndefinedEntropyError("expected score of an empty concept is undefined")
    sigma = np.sqrt(stats.variance(acuity))
    pixel = float(np.sum(INV_2_SQRT_PI / sigma))
    label = 0.0
    if labels is not None and labels.total > 0:
        label = float(np.sum(labels.probabilities(0.0) ** 2))
    return weights.pixel * pixel + weights.label * label


def log_likelihood(stats: GaussianStats, x, acuity: float = DEFAULT_ACUITY) -> float:
    """Diagonal-Gaussian log density of `x` under the concept."""
    if stats.count < 1:
        raise UndefinedEntropyError("likelihood under an empty concept is undefined")
    x = as_features(x, stats.dim)
    var = stats.variance(acuity)
    return float(-0.5 * np.sum(LOG_2PI + np.log(var) + (x - stats.mean) ** 2 / var))


@dataclass(frozen=True, eq=False)
class Instance:
    """One observation: a flattened pixel vector and an optional class id."""

    features: np.ndarray
    label: Optional[int] = None
