"""
Subcommands of the fakemix command line tool. Each module registers its
commands on the shared subparsers, the way routers are assembled into one
application.
"""

from fakemix_toolkit.cli import augmentation, datasets, diagnostics, evaluation

COMMAND_MODULES = [datasets, augmentation, evaluation, diagnostics]


def register_commands(subparsers, parents) -> None:
    for module in COMMAND_MODULES:
        module.register(subparsers, parents)
