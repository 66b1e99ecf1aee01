"""train: fit the TOPS and TOPS2 classifiers"""

import argparse
from pathlib import Path

import pandas as pd
import structlog

from thor2.cli.common import DEFAULT_ARTIFACT_DIR, add_network_option, emit, load_clouds, load_color_artifacts
from thor2.core.config import Settings
from thor2.core.exceptions import DataException
from thor2.infrastructure.storage.artifact_store import ArtifactStore
from thor2.infrastructure.storage.manifest import read_manifest
from thor2.models.recognition import RecognitionModel
from thor2.services.recognition import ColorArtifacts, train

logger = structlog.get_logger()

NAME = "train"


def register(subparsers, parent: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser(NAME, parents=[parent], help="train a recognition model")
    parser.add_argument("--manifest", type=Path, required=True)
    add_network_option(parser)
    parser.add_argument("--split", default="train", help="manifest split used for training")
    parser.add_argument("--out", type=Path, default=DEFAULT_ARTIFACT_DIR / "model.pkl")
    parser.set_defaults(handler=run)


def training_rows(manifest: pd.DataFrame, split: str) -> pd.DataFrame:
    rows = manifest[manifest["split"].isin([split, "all"])]
    if rows.empty:
        raise DataException("no training rows in manifest", details={"split": split})
    return rows


def train_from_manifest(
    manifest: pd.DataFrame, split: str, artifacts: ColorArtifacts, settings: Settings, seed: int
) -> RecognitionModel:
    rows = training_rows(manifest, split)
    clouds = load_clouds(rows["path"].tolist(), settings.workers)
    return train(list(zip(clouds, rows["label"].astype(str))), artifacts, settings, seed=seed)


def run(args: argparse.Namespace, settings: Settings) -> int:
    manifest = read_manifest(args.manifest, required=("path", "label"))
    artifacts = load_color_artifacts(args.network, settings)

    model = train_from_manifest(manifest, args.split, artifacts, settings, settings.seed)
    ArtifactStore.save_model(model, args.out)

    emit(
        {
            "out": str(args.out),
            "labels": list(model.labels),
            "seed": model.seed,
            "tops_length": model.preprocess.layout.tops_length,
            "tops2_length": model.preprocess.layout.tops2_length,
        }
    )
    return 0
