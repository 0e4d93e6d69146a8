"""Flags shared by the subcommands and the config they resolve to."""

from __future__ import annotations

import argparse
import json
import logging
import uuid
from typing import Any, Dict

from config import RunConfig

logger = logging.getLogger(__name__)


def add_run_options(parser: argparse.ArgumentParser, model: bool = False) -> None:
    """Config file, overrides and dry-run flag."""
    parser.add_argument("--config", metavar="PATH", help="JSON run config (or a run manifest)")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one config value, e.g. --set tree.acuity=0.5 (repeatable)",
    )
    if model:
        parser.add_argument("--model", help="model selector, e.g. cobweb4v")
    parser.add_argument("--dataset", help="synth, mnist, fashion-mnist, cifar10, organamnist or a .clds file")
    parser.add_argument("--data-dir", help="directory holding one sub-directory per dataset")
    parser.add_argument("--seed", type=int, help="run a single seed instead of the configured list")
    parser.add_argument("--output-dir", help="where output files are written")
    parser.add_argument("--dry-run", action="store_true", help="validate config and data headers only")


def run_config_from(args: argparse.Namespace) -> RunConfig:
    base = RunConfig.load(args.config) if args.config else RunConfig()
    seed = getattr(args, "seed", None)
    return base.with_overrides(
        args.overrides,
        model=getattr(args, "model", None),
        dataset=getattr(args, "dataset", None),
        data_dir=getattr(args, "data_dir", None),
        output_dir=getattr(args, "output_dir", None),
        seeds=[seed] if seed is not None else None,
    )


def new_job_id() -> str:
    return str(uuid.uuid4())


def report_dry_run(result: Dict[str, Any]) -> int:
    logger.info("Dry run OK: %s", json.dumps(result, sort_keys=True, default=str))
    return 0
