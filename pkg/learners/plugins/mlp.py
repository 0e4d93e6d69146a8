"""Fully connected baselines, with and without a replay buffer."""

from __future__ import annotations

from typing import Any, Dict, Optional

import numpy as np

from core.baseline import MLPBaseline, ReplayBuffer, train_split
from learners.base import BaseLearner
from learners.shared import as_matrix


class MLPLearner(BaseLearner):
    name = "mlp"
    title = "MLP"
    description = "One hidden ReLU layer trained split by split"
    family = "mlp"
    order = 21

    def __init__(self, dim, n_classes, run_config, seed) -> None:
        super().__init__(dim, n_classes, run_config, seed)
        self.net = MLPBaseline(dim, n_classes, run_config.mlp_config(seed))
        self.buffer: Optional[ReplayBuffer] = None

    def partial_fit(self, features: np.ndarray, labels: np.ndarray) -> None:
        train_split(self.net, as_matrix(features, self.dim), np.asarray(labels), self.buffer)

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        return self.net.predict_proba(as_matrix(features, self.dim))

    def state(self) -> Dict[str, Any]:
        return {"net": self.net.to_dict()}

    @classmethod
    def from_state(cls, state, run_config, seed) -> "MLPLearner":
        net = MLPBaseline.from_dict(state["net"])
        learner = cls(net.dim, net.n_classes, run_config, seed)
        learner.net = net
        return learner

    def summary(self) -> Dict[str, Any]:
        return {"parameters": self.net.n_parameters}


class MLPReplayLearner(MLPLearner):
    """Each split is trained together with a fixed-size sample of the past."""

    name = "mlp-replay"
    title = "MLP + replay"
    description = "MLP trained on each split plus a 1000-example replay buffer"
    order = 22

    def __init__(self, dim, n_classes, run_config, seed) -> None:
        super().__init__(dim, n_classes, run_config, seed)
        self.buffer = ReplayBuffer(run_config.mlp.replay_capacity, seed, dim)

    @property
    def replay(self) -> ReplayBuffer:
        assert self.buffer is not None
        return self.buffer

    def summary(self) -> Dict[str, Any]:
        return {"parameters": self.net.n_parameters, "buffer": len(self.replay)}

    def state(self) -> Dict[str, Any]:
        return {
            **super().state(),
            "buffer": {"features": self.replay.features.tolist(), "labels": self.replay.labels.tolist()},
        }

    @classmethod
    def from_state(cls, state, run_config, seed) -> "MLPReplayLearner":
        learner = super().from_state(state, run_config, seed)
        assert isinstance(learner, MLPReplayLearner)
        buffer = state.get("buffer")
        if buffer and buffer["labels"]:
            learner.replay.features = np.asarray(buffer["features"], dtype=np.float64)
            learner.replay.labels = np.asarray(buffer["labels"], dtype=np.int64)
        return learner
