"""Similarity matrix of colour regions from minimum-weight paths in the colour network."""

import networkx as nx
import numpy as np
import structlog

from thor2.core.exceptions import ValidationException
from thor2.models.network import ColorNetwork, SimilarityMatrix

logger = structlog.get_logger()


def min_weight_paths(network: ColorNetwork) -> np.ndarray:
    """
    All-pairs minimum path weights; unreachable pairs are +inf.

    Raises:
        ValidationException: If any edge weight is negative
    """
    if any(e.weight < 0 for e in network.edges):
        raise ValidationException("edge weights must be non-negative")

    graph = network.to_graph()
    paths = nx.floyd_warshall_numpy(graph, nodelist=list(range(network.n_c)), weight="weight")
    return np.asarray(paths, dtype=np.float64)


def similarity_from_paths(paths: np.ndarray, network_hash: str = "") -> SimilarityMatrix:
    """delta = 1 / (1 + l); unreachable pairs get 0"""
    paths = np.asarray(paths, dtype=np.float64)
    if paths.ndim != 2 or paths.shape[0] != paths.shape[1]:
        raise ValidationException("path matrix must be square", details={"shape": list(paths.shape)})

    with np.errstate(divide="ignore"):
        delta = np.where(np.isinf(paths), 0.0, 1.0 / (1.0 + paths))
    return SimilarityMatrix(delta=delta, network_hash=network_hash)


def build_similarity(network: ColorNetwork) -> SimilarityMatrix:
    delta = similarity_from_paths(min_weight_paths(network), network_hash=network.digest())
    disconnected = int((delta.delta == 0.0).sum())
    if disconnected:
        logger.warning("Color network is disconnected", zero_pairs=disconnected)
    logger.info("Similarity matrix computed", n_c=delta.n_c)
    return delta
