"""Cobweb/4V learners: adaptive hierarchy and the fixed-structure ablation."""

from __future__ import annotations

from typing import Any, Dict

import numpy as np

from core.prediction import predict_batch
from core.stats import Instance
from core.tree import CobwebTree, tree_statistics
from learners.base import BaseLearner
from learners.shared import as_matrix, uniform_proba


class Cobweb4VLearner(BaseLearner):
    """Incremental concept formation with add/create/merge/split."""

    name = "cobweb4v"
    title = "Cobweb/4V"
    description = "Adaptive concept hierarchy over Gaussian sufficiency statistics"
    family = "tree"
    order = 1

    fixed = False

    def __init__(self, dim, n_classes, run_config, seed) -> None:
        super().__init__(dim, n_classes, run_config, seed)
        self.tree = CobwebTree(dim, n_classes, run_config.tree_config(seed, fixed=self.fixed))
        self.predict_config = run_config.predict_config()

    def partial_fit(self, features: np.ndarray, labels: np.ndarray) -> None:
        features = as_matrix(features, self.dim)
        for row, label in zip(features, labels):
            self.tree.fit(Instance(row, int(label)))

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        features = as_matrix(features, self.dim)
        if self.tree.root.count == 0:
            return uniform_proba(len(features), self.n_classes)
        return predict_batch(self.tree, features, self.predict_config)

    def state(self) -> Dict[str, Any]:
        return {"tree": self.tree.to_dict()}

    @classmethod
    def from_state(cls, state, run_config, seed) -> "Cobweb4VLearner":
        tree = CobwebTree.from_dict(state["tree"])
        learner = cls(tree.dim, tree.n_classes, run_config, seed)
        learner.tree = tree
        return learner

    def summary(self) -> Dict[str, Any]:
        return tree_statistics(self.tree)


class Cobweb4VFixedLearner(Cobweb4VLearner):
    """Merge and split disabled; depth and branching capped."""

    name = "cobweb4v-fixed"
    title = "Cobweb/4V (fixed structure)"
    description = "Cobweb/4V with a predetermined depth and branching envelope"
    order = 2

    fixed = True
