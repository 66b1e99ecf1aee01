"""Helpers shared by sub-commands"""

import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Sequence

import pandas as pd
import structlog

from thor2.core.config import Settings
from thor2.core.exceptions import DataException, HashMismatchException
from thor2.core.workers import map_ordered
from thor2.infrastructure.storage.artifact_store import ArtifactStore
from thor2.infrastructure.storage.ply_io import load_ply
from thor2.infrastructure.storage.segmentation import load_segmentation
from thor2.models.cloud import ColoredCloud
from thor2.services.mapper_network import RegionLookup, network_config_hash, sample_srgb_cube
from thor2.services.recognition import ColorArtifacts, occlusion_flags

logger = structlog.get_logger()

DEFAULT_ARTIFACT_DIR = Path("artifacts")


def add_network_option(parser) -> None:
    parser.add_argument(
        "--network",
        type=Path,
        default=DEFAULT_ARTIFACT_DIR,
        help="directory holding network.json and similarity.json",
    )


def load_color_artifacts(directory: Path, settings: Settings) -> ColorArtifacts:
    """
    Load the network and similarity matrix and rebuild the membership lookup.

    Raises:
        HashMismatchException: If the network was built with other mapper/colour settings
    """
    store = ArtifactStore(directory)
    network = store.load_network()
    expected = network_config_hash(settings.mapper, settings.colorspace)
    if network.config_hash != expected:
        raise HashMismatchException(
            "Color network was built with different settings",
            details={"network": network.config_hash, "runtime": expected},
        )

    delta = store.load_similarity(network)
    samples = sample_srgb_cube(network.stride, network.illuminant, network.observer)
    return ColorArtifacts(lookup=RegionLookup(network, samples), delta=delta)


def load_clouds(paths: Sequence[str], workers: int) -> List[ColoredCloud]:
    return map_ordered(load_ply, list(paths), workers)


def occlusion_column(manifest: pd.DataFrame) -> List[bool]:
    """Occlusion flags from an `occluded` column or from segmentation + instance_id columns"""
    if "occluded" in manifest.columns:
        return [bool(v) for v in manifest["occluded"]]
    if {"segmentation", "instance_id"} <= set(manifest.columns):
        cache: Dict[str, Dict[int, bool]] = {}
        flags = []
        for seg_path, instance in zip(manifest["segmentation"], manifest["instance_id"]):
            if seg_path not in cache:
                cache[seg_path] = occlusion_flags(load_segmentation(seg_path))
            if int(instance) not in cache[seg_path]:
                raise DataException(
                    "instance id not present in segmentation map",
                    details={"segmentation": seg_path, "instance_id": int(instance)},
                )
            flags.append(cache[seg_path][int(instance)])
        return flags
    return [False] * len(manifest)


def emit(record: Dict[str, Any]) -> None:
    """One JSON object per line on stdout"""
    sys.stdout.write(json.dumps(record, sort_keys=True) + "\n")
    sys.stdout.flush()
