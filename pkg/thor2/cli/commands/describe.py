"""describe: TOPS and TOPS2 descriptors of single clouds"""

import argparse
from pathlib import Path

import pandas as pd
import structlog

from thor2.cli.common import add_network_option, emit, load_color_artifacts
from thor2.core.config import Settings
from thor2.infrastructure.storage.artifact_store import ArtifactStore
from thor2.infrastructure.storage.ply_io import load_ply
from thor2.services.descriptor import build_layout, describe, slice_diagnostics
from thor2.services.geometry import prepare_cloud
from thor2.services.recognition import check_compatible

logger = structlog.get_logger()

NAME = "describe"


def register(subparsers, parent: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser(NAME, parents=[parent], help="compute descriptors of a PLY cloud")
    parser.add_argument("ply", type=Path)
    add_network_option(parser)
    parser.add_argument("--model", type=Path, default=None, help="take the descriptor layout from a model")
    parser.add_argument("--occluded", action="store_true", help="apply the occlusion flip before slicing")
    parser.add_argument("--out", type=Path, default=None, help="descriptor file (default: <ply>.descriptor.json)")
    parser.add_argument("--dump-slices", type=Path, default=None, help="write per-strip diagnostics CSV")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, settings: Settings) -> int:
    artifacts = load_color_artifacts(args.network, settings)
    sliced = prepare_cloud(load_ply(args.ply), settings.slicing, occluded=args.occluded)

    if args.model is not None:
        model = ArtifactStore.load_model(args.model)
        check_compatible(model, artifacts, settings)
        layout = model.preprocess.layout
    else:
        layout = build_layout(
            [sliced],
            n_c=artifacts.lookup.network.n_c,
            slicing=settings.slicing,
            descriptor=settings.descriptor,
            network_hash=artifacts.delta.network_hash,
        )

    descriptor = describe(sliced, artifacts.lookup, artifacts.delta, layout, settings.descriptor)
    out = args.out or args.ply.with_suffix(".descriptor.json")
    ArtifactStore.save_descriptor(descriptor, out)

    record = {
        "path": str(args.ply),
        "out": str(out),
        "n_slices": descriptor.n_slices,
        "tops_length": int(descriptor.tops.size),
        "tops2_length": int(descriptor.tops2.size),
        "network_hash": layout.network_hash,
    }
    if args.dump_slices is not None:
        rows = slice_diagnostics(sliced, artifacts.lookup)
        args.dump_slices.parent.mkdir(parents=True, exist_ok=True)
        pd.DataFrame(rows).to_csv(args.dump_slices, index=False)
        record["diagnostic_rows"] = len(rows)

    emit(record)
    return 0
