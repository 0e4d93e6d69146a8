import argparse

from cli.options import add_run_options, new_job_id, report_dry_run, run_config_from
from protocol import EXPERIMENT_ARMS
from services import ExperimentService


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "experiment", help="run an experiment arm over every seed and write metrics"
    )
    parser.add_argument("exp_id", choices=sorted(EXPERIMENT_ARMS), help="experiment arm")
    add_run_options(parser)
    parser.add_argument("--no-curves", action="store_true", help="skip the long-format curves.csv")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    run_config = run_config_from(args)
    if args.dry_run:
        return report_dry_run(ExperimentService.dry_run(args.exp_id, run_config))
    ExperimentService.run_experiment_job(
        new_job_id(), args.exp_id, run_config, run_config.resolved_output_dir, curves=not args.no_curves
    )
    return 0
