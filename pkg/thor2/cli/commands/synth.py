"""synth: write the synthetic benchmark"""

import argparse
from pathlib import Path

from thor2.cli.common import emit
from thor2.core.config import Settings
from thor2.services.synth import build_benchmark

NAME = "synth"


def register(subparsers, parent: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser(NAME, parents=[parent], help="generate the synthetic benchmark")
    parser.add_argument("--out", type=Path, default=Path("benchmark"))
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, settings: Settings) -> int:
    manifest = build_benchmark(settings.synth, args.out, seed=settings.seed)
    emit(
        {
            "out": str(args.out),
            "manifest": str(args.out / "manifest.csv"),
            "files": len(manifest),
            "classes": int(manifest["label"].nunique()),
        }
    )
    return 0
