"""Fully connected baseline with an optional replay buffer."""

from __future__ import annotations

import logging
import warnings
from dataclasses import asdict, dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from sklearn.exceptions import ConvergenceWarning
from sklearn.neural_network import MLPClassifier

from .errors import CheckpointError, DimensionError, UsageError
from .seeding import substream, subseed

logger = logging.getLogger(__name__)

SCHEMA = "cobweb-lab/mlp"
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class MLPConfig:
    hidden: int = 128
    lr: float = 0.001
    batch_size: int = 64
    epochs: int = 5
    replay_capacity: int = 1000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.hidden < 1 or self.batch_size < 1 or self.epochs < 1:
            raise UsageError("hidden, batch_size and epochs must be >= 1")
        if self.lr <= 0:
            raise UsageError("lr must be > 0")
        if self.replay_capacity < 0:
            raise UsageError("replay_capacity must be >= 0")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class ReplayBuffer:
    """Fixed-capacity store of past examples.

    After each split the buffer is refreshed by sampling `capacity` examples
    uniformly without replacement from the buffer and the split together.
    """

    def __init__(self, capacity: int = 1000, seed: int = 0, dim: Optional[int] = None) -> None:
        if capacity < 0:
            raise UsageError("capacity must be >= 0")
        self.capacity = capacity
        self._rng = substream(seed, "replay")
        self.features = np.zeros((0, dim or 0))
        self.labels = np.zeros(0, dtype=np.int64)

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    def with_split(self, features: np.ndarray, labels: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """The split concatenated with the current buffer contents."""
        if len(self) == 0:
            return features, labels
        return np.vstack([features, self.features]), np.concatenate([labels, self.labels])

    def refresh(self, features: np.ndarray, labels: np.ndarray) -> None:
        pool_x, pool_y = self.with_split(features, labels)
        if len(pool_y) > self.capacity:
            keep = np.sort(self._rng.choice(len(pool_y), size=self.capacity, replace=False))
            pool_x, pool_y = pool_x[keep], pool_y[keep]
        self.features = np.array(pool_x, dtype=np.float64, copy=True)
        self.labels = np.array(pool_y, dtype=np.int64, copy=True)
        logger.debug("Replay buffer refreshed: %d examples", len(self))


class MLPBaseline:
    """One hidden ReLU layer, softmax cross-entropy, trained split by split."""

    def __init__(self, dim: int, n_classes: int, config: MLPConfig = MLPConfig()) -> None:
        self.dim = dim
        self.n_classes = n_classes
        self.config = config
        self.classes = np.arange(n_classes)
        self.net = MLPClassifier(
            hidden_layer_sizes=(config.hidden,),
            activation="relu",
            solver="adam",
            learning_rate_init=config.lr,
            batch_size=config.batch_size,
            shuffle=True,
            random_state=subseed(config.seed, "init"),
        )
        self._fitted = False

    @property
    def n_parameters(self) -> int:
        h = self.config.hidden
        return self.dim * h + h + h * self.n_classes + self.n_classes

    def partial_fit(self, features: np.ndarray, labels: np.ndarray) -> None:
        if features.shape[1] != self.dim:
            raise DimensionError(self.dim, features.shape[1])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", category=ConvergenceWarning)
            for _ in range(self.config.epochs):
                self.net.partial_fit(features, labels, classes=self.classes)
        self._fitted = True

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        if not self._fitted:
            return np.full((len(features), self.n_classes), 1.0 / self.n_classes)
        return self.net.predict_proba(features)

    def to_dict(self) -> Dict[str, Any]:
        state: Dict[str, Any] = {
            "schema": SCHEMA,
            "version": SCHEMA_VERSION,
            "config": self.config.to_dict(),
            "dim": self.dim,
            "n_classes": self.n_classes,
            "fitted": self._fitted,
        }
        if self._fitted:
            state["coefs"] = [c.tolist() for c in self.net.coefs_]
            state["intercepts"] = [i.tolist() for i in self.net.intercepts_]
        return state

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MLPBaseline":
        if data.get("schema") != SCHEMA:
            raise CheckpointError(f"not an MLP document (schema {data.get('schema')!r})")
        if data.get("version") != SCHEMA_VERSION:
            raise CheckpointError(
                f"MLP schema version {data.get('version')} is not supported "
                f"(this build reads version {SCHEMA_VERSION})"
            )
        model = cls(data["dim"], data["n_classes"], MLPConfig(**data["config"]))
        if data.get("fitted"):
            # A throwaway pass builds sklearn's internal layout; weights are then replaced.
            probe_x = np.zeros((model.n_classes, model.dim))
            model.net.partial_fit(probe_x, model.classes, classes=model.classes)
            model.net.coefs_ = [np.asarray(c, dtype=np.float64) for c in data["coefs"]]
            model.net.intercepts_ = [np.asarray(i, dtype=np.float64) for i in data["intercepts"]]
            # fresh optimiser state on the next partial_fit
            del model.net._optimizer
            model._fitted = True
        return model


def train_split(
    model: MLPBaseline,
    features: np.ndarray,
    labels: np.ndarray,
    replay: Optional[ReplayBuffer] = None,
) -> None:
    """Train `model` on one split.

    With `replay`, the split is trained together with the buffer, and the
    buffer is then refreshed from buffer and split.
    """
    if replay is None:
        model.partial_fit(features, labels)
        return
    train_x, train_y = replay.with_split(features, labels)
    model.partial_fit(train_x, train_y)
    replay.refresh(features, labels)


def mlp_baseline_train(
    splits: Sequence[Tuple[np.ndarray, np.ndarray]],
    evaluate: Callable[[MLPBaseline], Any],
    dim: int,
    n_classes: int,
    config: MLPConfig = MLPConfig(),
    replay: Optional[ReplayBuffer] = None,
) -> List[Any]:
    """Train sequentially over `splits`, calling `evaluate` after each one."""
    model = MLPBaseline(dim, n_classes, config)
    results = []
    for features, labels in splits:
        train_split(model, features, labels, replay)
        results.append(evaluate(model))
    return results
