"""eval: accuracy per split over one or more training seeds"""

import argparse
from pathlib import Path
from typing import List

import structlog

from thor2.cli.commands.train import train_from_manifest
from thor2.cli.common import add_network_option, emit, load_clouds, load_color_artifacts, occlusion_column
from thor2.core.config import Settings
from thor2.core.exceptions import DataException
from thor2.infrastructure.storage.artifact_store import ArtifactStore
from thor2.infrastructure.storage.manifest import read_manifest, write_report
from thor2.models.recognition import EvaluationRow
from thor2.services.recognition import evaluate, summarize

logger = structlog.get_logger()

NAME = "eval"


def _seeds(value: str) -> List[int]:
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed list: {value!r}")


def register(subparsers, parent: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser(NAME, parents=[parent], help="evaluate accuracy per split")
    parser.add_argument("--manifest", type=Path, required=True)
    add_network_option(parser)
    parser.add_argument("--model", type=Path, default=None, help="evaluate this model instead of training")
    parser.add_argument("--seeds", type=_seeds, default=None, help="comma-separated training seeds")
    parser.add_argument("--train-split", dest="train_split", default="train")
    parser.add_argument("--model-mode", dest="model_mode", choices=["m1", "m2", "fused"], default=None)
    parser.add_argument("--out", type=Path, default=Path("report.csv"))
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, settings: Settings) -> int:
    manifest = read_manifest(args.manifest, required=("path", "label"))
    artifacts = load_color_artifacts(args.network, settings)

    test_rows = manifest[manifest["split"] != args.train_split]
    if test_rows.empty:
        raise DataException("no evaluation rows in manifest", details={"train_split": args.train_split})

    clouds = load_clouds(test_rows["path"].tolist(), settings.workers)
    dataset = list(
        zip(clouds, test_rows["label"].astype(str), occlusion_column(test_rows), test_rows["split"].astype(str))
    )

    if args.model is not None:
        models = [ArtifactStore.load_model(args.model)]
    else:
        seeds = args.seeds or [settings.seed]
        models = [
            train_from_manifest(manifest, args.train_split, artifacts, settings, seed) for seed in seeds
        ]

    rows: List[EvaluationRow] = []
    for model in models:
        rows.extend(evaluate(dataset, model, artifacts, settings, args.model_mode))
    report = summarize(rows)
    write_report(report, args.out)

    for row in report:
        emit(row.model_dump())
    return 0
