"""cobweb-lab learners package.

Every model the protocol trains is a BaseLearner plugin.

Public API:
    - discover_learners(): Registered learner classes
    - get_learner(name): Learner class by name
    - create_learner(name, dim, n_classes, run_config, seed): New instance
    - reload_learners(): Force reload all plugins

Subpackages:
    - learners.shared: Shared helpers
    - learners.plugins: Learner plugins (auto-discovered)

Example:
    from config import RunConfig
    from learners import create_learner

    learner = create_learner("cobweb4v", dim=784, n_classes=10, run_config=RunConfig(), seed=0)
    learner.partial_fit(features, labels)
    proba = learner.predict_proba(test_features)
"""

from .base import BaseLearner
from .registry import create_learner, discover_learners, get_learner, list_learners, reload_learners

__all__ = [
    "BaseLearner",
    "create_learner",
    "discover_learners",
    "get_learner",
    "list_learners",
    "reload_learners",
]
