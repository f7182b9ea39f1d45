"""
fakemix_toolkit app.py
"""

import argparse
import logging
import sys
from importlib.metadata import PackageNotFoundError, version
from typing import Optional, Sequence

from pydantic import ValidationError
from ska_ser_logging import configure_logging

from fakemix_toolkit.cli import register_commands
from fakemix_toolkit.cli.model import run_options_parser
from fakemix_toolkit.common.config import LOG_LEVEL, PRODUCTION
from fakemix_toolkit.common.error_handling import (
    ToolkitError,
    cli_error_handler,
    dangerous_internal_error_handler,
)

LOGGER = logging.getLogger(__name__)


def _version() -> str:
    try:
        return version("fakemix-toolkit")
    except PackageNotFoundError:
        return "unknown"


def create_parser() -> argparse.ArgumentParser:
    """
    Create the argument parser with every subcommand assembled
    """
    parser = argparse.ArgumentParser(
        prog="fakemix",
        description="FakeMix augmentation, boundary labels and evaluation toolkit",
    )
    parser.add_argument("--version", action="version", version=_version())
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True
    register_commands(subparsers, parents=[run_options_parser()])
    return parser


def main(argv: Optional[Sequence[str]] = None, production: bool = PRODUCTION) -> int:
    args = create_parser().parse_args(argv)
    configure_logging(level="DEBUG" if args.verbose else LOG_LEVEL)
    LOGGER.debug("Running command %s", args.command)

    try:
        return args.handler(args)
    except (ToolkitError, ValidationError) as err:
        LOGGER.exception("Command %s failed", args.command)
        return cli_error_handler(err)
    except Exception as err:  # pylint: disable=broad-exception-caught
        if production:
            raise
        return dangerous_internal_error_handler(err)


if __name__ == "__main__":
    sys.exit(main())
