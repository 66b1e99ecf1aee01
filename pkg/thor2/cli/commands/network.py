"""build-network: colour network and similarity matrix"""

import argparse
from pathlib import Path

import structlog

from thor2.cli.common import DEFAULT_ARTIFACT_DIR, emit
from thor2.core.config import Settings
from thor2.infrastructure.storage.artifact_store import ArtifactStore
from thor2.services.mapper_network import build_color_network
from thor2.services.similarity import build_similarity

logger = structlog.get_logger()

NAME = "build-network"


def register(subparsers, parent: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser(
        NAME, parents=[parent], help="build the colour network and its similarity matrix"
    )
    parser.add_argument("--out", type=Path, default=DEFAULT_ARTIFACT_DIR, help="artifact directory")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, settings: Settings) -> int:
    network, _ = build_color_network(settings.mapper, settings.colorspace)
    delta = build_similarity(network)

    store = ArtifactStore(args.out)
    store.save_network(network)
    store.save_similarity(delta)

    emit(
        {
            "n_c": network.n_c,
            "edges": len(network.edges),
            "cyclic_edges": sum(e.cyclic for e in network.edges),
            "network_hash": network.digest(),
            "config_hash": network.config_hash,
            "out": str(args.out),
        }
    )
    return 0
