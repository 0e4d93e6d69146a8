import argparse

from cli.options import add_run_options, new_job_id, report_dry_run, run_config_from
from services import FitService


def register(subparsers) -> None:
    parser = subparsers.add_parser("fit", help="train one model and write a checkpoint")
    add_run_options(parser, model=True)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    run_config = run_config_from(args)
    if args.dry_run:
        return report_dry_run(FitService.dry_run(run_config))
    FitService.run_fit(new_job_id(), run_config, run_config.resolved_output_dir)
    return 0
