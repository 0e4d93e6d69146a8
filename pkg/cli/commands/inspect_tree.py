import argparse
import json
import sys

from cli.options import report_dry_run
from core.errors import UsageError
from services import FitService


def register(subparsers) -> None:
    parser = subparsers.add_parser("inspect-tree", help="print hierarchy statistics of a tree checkpoint")
    parser.add_argument("checkpoint", help="checkpoint.json of a cobweb4v or cobweb4v-fixed fit")
    parser.add_argument("--output", help="write the JSON here instead of standard output")
    parser.add_argument("--dry-run", action="store_true", help="only check that the checkpoint loads")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    learner, _ = FitService.load_checkpoint(args.checkpoint)
    if learner.family != "tree":
        raise UsageError(f"{args.checkpoint} holds a {learner.name} model, not a concept tree")
    if args.dry_run:
        return report_dry_run({"model": learner.name})

    text = json.dumps(learner.summary(), sort_keys=True, indent=2) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return 0
