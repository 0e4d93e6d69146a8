"""Base class for all trainable models."""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import TYPE_CHECKING, Any, ClassVar, Dict

import numpy as np

if TYPE_CHECKING:
    from config import RunConfig


class BaseLearner(ABC):
    """Abstract base class for every model the protocol can train.

    All learners inherit from this class; the registry discovers subclasses
    in ``learners/plugins`` and keys them by ``name``.

    Class Attributes:
        name: Model selector used in configs and on the command line.
        title: Display title for logs and reports.
        description: Short description of the model.
        family: "tree", "nn" or "mlp".
        order: Sort order in listings (lower = first).

    Example:
        class MyLearner(BaseLearner):
            name = "my-model"
            title = "My Model"

            def partial_fit(self, features, labels) -> None: ...
            def predict_proba(self, features): ...
            def state(self): ...
            @classmethod
            def from_state(cls, state, run_config, seed): ...
            def summary(self): ...
    """

    name: ClassVar[str]
    title: ClassVar[str]
    description: ClassVar[str] = ""
    family: ClassVar[str] = ""
    order: ClassVar[int] = 100

    def __init__(self, dim: int, n_classes: int, run_config: "RunConfig", seed: int) -> None:
        self.dim = dim
        self.n_classes = n_classes
        self.run_config = run_config
        self.seed = seed

    @abstractmethod
    def partial_fit(self, features: np.ndarray, labels: np.ndarray) -> None:
        """Continue training on one split."""
        ...

    @abstractmethod
    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        """(n, K) label distributions. Must not change the model."""
        ...

    @abstractmethod
    def state(self) -> Dict[str, Any]:
        """JSON-serialisable model state."""
        ...

    @classmethod
    @abstractmethod
    def from_state(
        cls, state: Dict[str, Any], run_config: "RunConfig", seed: int
    ) -> "BaseLearner":
        """Rebuild a learner from :meth:`state` output."""
        ...

    @abstractmethod
    def summary(self) -> Dict[str, Any]:
        """Size figures for reports (node or parameter counts)."""
        ...

    def __repr__(self) -> str:
        return f"<{self.__class__.__name__} name={self.name!r} seed={self.seed}>"
