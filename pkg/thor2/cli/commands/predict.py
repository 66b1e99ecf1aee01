"""predict: one JSON line per object"""

import argparse
from pathlib import Path

import pandas as pd
import structlog

from thor2.cli.common import add_network_option, emit, load_clouds, load_color_artifacts, occlusion_column
from thor2.core.config import Settings
from thor2.core.exceptions import DataException
from thor2.infrastructure.storage.artifact_store import ArtifactStore
from thor2.infrastructure.storage.manifest import read_manifest
from thor2.services.recognition import check_labels, predict_many

logger = structlog.get_logger()

NAME = "predict"


def register(subparsers, parent: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser(NAME, parents=[parent], help="recognise objects")
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--manifest", type=Path, help="CSV with a path column")
    source.add_argument("--ply", type=Path, nargs="+", help="PLY files")
    parser.add_argument("--model", type=Path, required=True)
    add_network_option(parser)
    parser.add_argument("--occluded", action="store_true", help="flag every --ply object as occluded")
    parser.add_argument("--model-mode", dest="model_mode", choices=["m1", "m2", "fused"], default=None)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, settings: Settings) -> int:
    if args.manifest is not None:
        manifest = read_manifest(args.manifest)
        flags = occlusion_column(manifest)
    else:
        manifest = pd.DataFrame({"path": [str(p) for p in args.ply]})
        flags = [args.occluded] * len(manifest)

    model = ArtifactStore.load_model(args.model)
    if "label" in manifest.columns:
        check_labels(manifest["label"].dropna().astype(str), model)
    artifacts = load_color_artifacts(args.network, settings)
    clouds = load_clouds(manifest["path"].tolist(), settings.workers)

    failures = []
    results = predict_many(clouds, flags, model, artifacts, settings, args.model_mode)
    for path, result in zip(manifest["path"], results):
        if isinstance(result, DataException):
            failures.append(result)
            emit({"path": path, "error": result.error_code, "message": result.message})
        else:
            emit({"path": path, **result.model_dump()})

    logger.info("Predictions written", objects=len(results), failures=len(failures))
    return failures[0].exit_code if failures else 0
