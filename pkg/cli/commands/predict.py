import argparse
import os

from cli.options import new_job_id, report_dry_run
from config import config
from services import PredictService


def register(subparsers) -> None:
    parser = subparsers.add_parser("predict", help="label distributions for a file of instances")
    parser.add_argument("checkpoint", help="checkpoint.json written by fit")
    parser.add_argument("instances", help="canonical .clds file; every row is predicted, train then test")
    parser.add_argument("--output", help="CSV path (default: <output dir>/predictions.csv)")
    parser.add_argument("--dry-run", action="store_true", help="validate checkpoint and header only")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    if args.dry_run:
        return report_dry_run(PredictService.dry_run(args.checkpoint, args.instances))
    output = args.output or os.path.join(config.output_dir, "predictions.csv")
    PredictService.run_predict(new_job_id(), args.checkpoint, args.instances, output)
    return 0
