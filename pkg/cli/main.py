"""cobweb-lab command line.

Exit codes: 0 success, 1 internal error, 2 usage error, 3 data error.
Diagnostics go to standard error; results go to files (``inspect-tree``
prints its JSON to standard output unless ``--output`` is given).
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from config import config, usage_error_from
from core import __version__
from core.errors import LabError

from .commands import COMMANDS

logger = logging.getLogger("cobweb_lab")

LOG_FORMAT = "%(levelname)s: %(message)s"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cobweb-lab",
        description="Continual-learning experiments with Cobweb/4V, CobwebNN and MLP baselines.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def configure_logging(verbose: bool = False) -> None:
    level = logging.DEBUG if verbose else getattr(logging, config.log_level.upper(), logging.INFO)
    logging.basicConfig(stream=sys.stderr, format=LOG_FORMAT, level=level, force=True)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)

    try:
        return args.handler(args)
    except LabError as e:
        logger.error("%s", e)
        return e.exit_code
    except ValidationError as e:
        error = usage_error_from(e)
        logger.error("%s", error)
        return error.exit_code
    except KeyboardInterrupt:
        logger.error("Interrupted")
        return 130
    except Exception as e:
        logger.exception("Internal error: %s", e)
        return 1


if __name__ == "__main__":
    sys.exit(main())
