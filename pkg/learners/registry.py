"""Plugin registry for auto-discovering and creating learners."""

from __future__ import annotations

import importlib
import inspect
import logging
import sys
import threading
from pathlib import Path
from typing import TYPE_CHECKING, List, Optional, Type

from core.errors import UsageError

from .base import BaseLearner

if TYPE_CHECKING:
    from config import RunConfig

logger = logging.getLogger(__name__)

# Cache of discovered learner classes
_registry: List[Type[BaseLearner]] = []
_discovered: bool = False
_lock = threading.RLock()


def discover_learners(force_reload: bool = False) -> List[Type[BaseLearner]]:
    """Auto-discover learner classes from the plugins/ directory.

    Scans plugins/ for modules containing concrete subclasses of
    BaseLearner. Classes are registered, not instantiated: a learner needs
    the dataset shape and a seed before it can be built.

    Args:
        force_reload: If True, re-scan and reload all plugins even if
                      already discovered.

    Returns:
        Learner classes sorted by their order attribute, then name.
    """
    with _lock:
        return _discover(force_reload)


def _discover(force_reload: bool) -> List[Type[BaseLearner]]:
    global _registry, _discovered

    if _discovered and not force_reload:
        return _registry

    _registry = []

    plugins_dir = Path(__file__).parent / "plugins"
    if not plugins_dir.exists():
        _discovered = True
        return _registry

    for module_path in sorted(plugins_dir.glob("*.py")):
        if module_path.stem.startswith("_"):
            continue

        module_name = f"learners.plugins.{module_path.stem}"

        try:
            if force_reload and module_name in sys.modules:
                module = importlib.reload(sys.modules[module_name])
            else:
                module = importlib.import_module(module_name)

            for _, obj in inspect.getmembers(module, inspect.isclass):
                if (
                    issubclass(obj, BaseLearner)
                    and obj is not BaseLearner
                    and not inspect.isabstract(obj)
                    and hasattr(obj, "name")
                    and obj not in _registry
                ):
                    _registry.append(obj)

        except Exception as e:
            # Log but don't fail on bad plugins
            logger.warning("Failed to load learner plugin %s: %s", module_path.stem, e)

    _registry.sort(key=lambda cls: (cls.order, cls.name))
    _discovered = True

    return _registry


def get_learner(name: str) -> Optional[Type[BaseLearner]]:
    """Learner class registered under `name`, or None."""
    for cls in discover_learners():
        if cls.name == name:
            return cls
    return None


def create_learner(
    name: str, dim: int, n_classes: int, run_config: "RunConfig", seed: int
) -> BaseLearner:
    """Instantiate the learner `name`.

    Raises:
        UsageError: If no plugin registers that name.
    """
    cls = get_learner(name)
    if cls is None:
        raise UsageError(f"unknown model {name!r}; available: {', '.join(list_learners())}")
    return cls(dim, n_classes, run_config, seed)


def reload_learners() -> List[Type[BaseLearner]]:
    """Force reload all plugins and return the updated class list."""
    global _discovered
    _discovered = False

    for name in list(sys.modules.keys()):
        if name.startswith("learners.plugins."):
            del sys.modules[name]

    return discover_learners(force_reload=True)


def list_learners() -> List[str]:
    """Names of all registered learners."""
    return [cls.name for cls in discover_learners()]
