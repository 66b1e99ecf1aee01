"""
Command-line router - aggregates all sub-command modules.

Every sub-command gets the shared options: --config, --seed, --workers,
--log-level, --log-format and one --<section>.<key> flag per config field.
"""

import argparse
from pathlib import Path
from typing import Any, Dict

from pydantic import BaseModel

from thor2.cli.commands import describe, evaluate, network, predict, synth, train
from thor2.core.config import SECTIONS, Settings, load_settings

COMMANDS = (network, describe, train, predict, evaluate, synth)


def _section_flags(parser: argparse.ArgumentParser) -> None:
    for section in SECTIONS:
        model: type[BaseModel] = Settings.model_fields[section].annotation
        group = parser.add_argument_group(f"{section} settings")
        for key, field in model.model_fields.items():
            group.add_argument(
                f"--{section}.{key.replace('_', '-')}",
                dest=f"{section}__{key}",
                default=argparse.SUPPRESS,
                metavar=key.upper(),
                help=field.description or f"default: {field.default}",
            )


def common_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", type=Path, default=None, help="YAML configuration file")
    parent.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    parent.add_argument("--workers", type=int, default=argparse.SUPPRESS)
    parent.add_argument("--log-level", dest="log_level", default=argparse.SUPPRESS)
    parent.add_argument("--log-format", dest="log_format", choices=["json", "console"], default=argparse.SUPPRESS)
    _section_flags(parent)
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thor2",
        description="Colour-network shape and colour descriptors for occlusion-robust object recognition",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    parent = common_options()
    for command in COMMANDS:
        command.register(subparsers, parent)
    return parser


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    """Nested settings overrides from the flags actually given"""
    overrides: Dict[str, Any] = {}
    for dest, value in vars(args).items():
        if "__" in dest:
            section, key = dest.split("__", 1)
            if section in SECTIONS:
                overrides.setdefault(section, {})[key] = value
        elif dest in ("seed", "workers", "log_level", "log_format"):
            overrides[dest] = value
    return overrides


def settings_from_args(args: argparse.Namespace) -> Settings:
    return load_settings(args.config, overrides_from_args(args))
