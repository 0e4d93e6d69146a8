"""Command-line interface: ``python -m cli <subcommand>``."""

from .main import build_parser, main

__all__ = ["build_parser", "main"]
