"""One module per subcommand; each exposes ``register(subparsers)``."""

from . import experiment, fit, inspect_tree, predict, splits

COMMANDS = (fit, predict, experiment, splits, inspect_tree)

__all__ = ["COMMANDS"]
