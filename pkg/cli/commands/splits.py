import argparse
import os

from cli.options import add_run_options, new_job_id, report_dry_run, run_config_from
from services import DataService, ExperimentService


def register(subparsers) -> None:
    parser = subparsers.add_parser("make-splits", help="write the D1..D10 schedule of every seed")
    add_run_options(parser)
    parser.add_argument("--output", help="JSON path (default: <output dir>/splits.json)")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    run_config = run_config_from(args)
    if args.dry_run:
        return report_dry_run({"dataset": DataService.probe(run_config), "seeds": run_config.seeds})
    output = args.output or os.path.join(run_config.resolved_output_dir, "splits.json")
    ExperimentService.make_splits(new_job_id(), run_config, output)
    return 0
