"""CobwebNN learners in dense and sparse update modes."""

from __future__ import annotations

from typing import Any, Dict, Optional

import numpy as np

from core.cobwebnn import CobwebNNModel
from core.errors import CheckpointError
from core.seeding import substream
from learners.base import BaseLearner
from learners.shared import as_matrix, uniform_proba


class CobwebNNDenseLearner(BaseLearner):
    """Every node moves in proportion to its path probability."""

    name = "cobwebnn-dense"
    title = "CobwebNN (dense)"
    description = "Gradient-trained hierarchy, all path parameters updated"
    family = "nn"
    order = 11

    mode = "dense"

    def __init__(self, dim, n_classes, run_config, seed) -> None:
        super().__init__(dim, n_classes, run_config, seed)
        self.config = run_config.cobwebnn_config(seed, self.mode)
        self.model: Optional[CobwebNNModel] = None

    def partial_fit(self, features: np.ndarray, labels: np.ndarray) -> None:
        features = as_matrix(features, self.dim)
        if len(features) == 0:
            return
        if self.model is None:
            # prototypes are seeded from the first split
            self.model = CobwebNNModel.initialise(self.dim, self.n_classes, self.config, data=features)
        self.model.fit(features, labels)

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        features = as_matrix(features, self.dim)
        if self.model is None:
            return uniform_proba(len(features), self.n_classes)
        # sparse sampling uses a fresh stream so evaluation leaves the model untouched
        return self.model.forward_infer(features, rng=substream(self.seed, "evaluate"))

    def state(self) -> Dict[str, Any]:
        return {"model": None if self.model is None else self.model.to_dict()}

    @classmethod
    def from_state(cls, state, run_config, seed) -> "CobwebNNDenseLearner":
        if state.get("model") is None:
            raise CheckpointError("checkpoint holds an untrained CobwebNN")
        model = CobwebNNModel.from_dict(state["model"])
        learner = cls(model.dim, model.n_classes, run_config, seed)
        learner.model = model
        learner.config = model.config
        return learner

    def summary(self) -> Dict[str, Any]:
        if self.model is None:
            return {"parameters": 0, "steps": 0}
        return {
            "parameters": self.model.n_parameters,
            "leaves": self.model.layer_sizes[-1],
            "steps": self.model.steps,
        }


class CobwebNNSparseLearner(CobwebNNDenseLearner):
    """Only one Gumbel-sampled root-to-leaf path moves per example."""

    name = "cobwebnn-sparse"
    title = "CobwebNN (sparse)"
    description = "Gradient-trained hierarchy, one sampled path updated"
    order = 12

    mode = "sparse"
