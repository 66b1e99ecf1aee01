"""
Colour network construction with the Mapper algorithm.

Pipeline: sample the sRGB cube, project the CIELAB images through the
chroma/hue lens, cover the lens image with overlapping rectangles, cluster each
preimage with DBSCAN under HyAB, take the 1-skeleton of the nerve, close the
cyclic hue dimension, drop redundant vertices and weight the edges.
"""

import itertools
import math
import time
from collections import defaultdict
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

import numpy as np
import structlog
from scipy import sparse
from scipy.spatial import cKDTree
from sklearn.cluster import DBSCAN
from sklearn.neighbors import sort_graph_by_row_values

from thor2.core.config import ColorspaceSettings, MapperSettings
from thor2.core.exceptions import DataException, ValidationException
from thor2.core.hashing import digest
from thor2.models.color import LabColor, LensPoint, RgbColor
from thor2.models.network import (
    ColorNetwork,
    ColorRegion,
    ColorSamples,
    Cover,
    CoverCell,
    CoverSpec,
    NetworkEdge,
)
from thor2.services.colorspace import hyab, hyab_rows, lens_array, srgb_to_lab_array

logger = structlog.get_logger()

SQRT2 = math.sqrt(2.0)


# ==================== Sampling ====================


def grid_values(stride: int) -> np.ndarray:
    """Channel values of the sampling grid; 255 is always included"""
    if stride <= 0:
        raise ValidationException("stride must be positive", details={"stride": stride})
    values = np.arange(0, 256, stride)
    if values[-1] != 255:
        values = np.append(values, 255)
    return values.astype(np.uint8)


def sample_srgb_cube(stride: int, illuminant: str = "D65", observer: str = "2") -> ColorSamples:
    grid = grid_values(stride)
    r, g, b = np.meshgrid(grid, grid, grid, indexing="ij")
    rgb = np.stack([r.ravel(), g.ravel(), b.ravel()], axis=1).astype(np.uint8)
    lab = srgb_to_lab_array(rgb, illuminant, observer)
    return ColorSamples(rgb=rgb, lab=lab, grid=grid, stride=stride)


# ==================== Cover ====================


def _intervals(lo: float, hi: float, n: int, gain: float) -> Tuple[List[Tuple[float, float]], float]:
    if hi - lo <= 0.0:
        return [(lo, hi)], 0.0

    g = gain / 100.0
    r = (hi - lo) / (n - (n - 1) * g)
    step = r * (1.0 - g)
    intervals = [(lo + k * step, lo + k * step + r) for k in range(n)]
    intervals[0] = (lo, intervals[0][1])
    intervals[-1] = (intervals[-1][0], hi)
    return intervals, r


def build_cover(
    lens_points: Union[np.ndarray, Sequence[LensPoint]], spec: CoverSpec
) -> Cover:
    """
    Regularly spaced, equal-length, overlapping intervals per lens dimension.

    Interval length r solves n*r - (n-1)*g*r = range, so neighbours overlap by g% of r.
    A dimension with zero range gets a single interval.
    """
    points = _as_lens_array(lens_points)
    if points.shape[0] == 0:
        raise ValidationException("cover needs at least one lens point")

    chroma, r1 = _intervals(
        float(points[:, 0].min()), float(points[:, 0].max()), spec.n_intervals_chroma, spec.gain_chroma
    )
    hue, r2 = _intervals(
        float(points[:, 1].min()), float(points[:, 1].max()), spec.n_intervals_hue, spec.gain_hue
    )

    cells = [
        CoverCell(chroma_index=ci, hue_index=hi, chroma_interval=c_iv, hue_interval=h_iv)
        for (ci, c_iv), (hi, h_iv) in itertools.product(enumerate(chroma), enumerate(hue))
    ]
    return Cover(spec=spec, chroma_intervals=chroma, hue_intervals=hue, r1=r1, r2=r2, cells=cells)


def _as_lens_array(lens_points: Union[np.ndarray, Sequence[LensPoint]]) -> np.ndarray:
    if isinstance(lens_points, np.ndarray):
        return lens_points.reshape(-1, 2).astype(np.float64)
    return np.array([[p.chroma, p.hue_shifted] for p in lens_points], dtype=np.float64).reshape(-1, 2)


# ==================== Pullback clustering ====================


def dbscan_hyab(lab: np.ndarray, eps: float, min_pts: int) -> np.ndarray:
    """
    DBSCAN labels of CIELAB rows under HyAB.

    HyAB dominates the Euclidean distance, so the Euclidean eps-ball from a
    k-d tree holds every HyAB neighbour; the radius graph is handed to DBSCAN
    as a precomputed sparse matrix.
    """
    n = lab.shape[0]
    if n == 0:
        return np.empty(0, dtype=int)

    tree = cKDTree(lab)
    pairs = tree.sparse_distance_matrix(tree, max_distance=eps, output_type="ndarray")
    i, j = pairs["i"].astype(np.int64), pairs["j"].astype(np.int64)
    d = hyab_rows(lab[i], lab[j])
    keep = d <= eps

    graph = sparse.csr_matrix((d[keep], (i[keep], j[keep])), shape=(n, n))
    graph = sort_graph_by_row_values(graph, warn_when_not_sorted=False)
    return DBSCAN(eps=eps, min_samples=min_pts, metric="precomputed").fit_predict(graph)


def refine_pullback(
    samples: ColorSamples,
    lens_points: np.ndarray,
    cover: Cover,
    dbscan_eps: float,
    dbscan_min_pts: int,
) -> List[ColorRegion]:
    """Cluster each cell's preimage; every cluster becomes a region, noise is dropped"""
    if dbscan_eps <= 0 or dbscan_min_pts < 1:
        raise ValidationException(
            "DBSCAN needs eps > 0 and min_pts >= 1",
            details={"eps": dbscan_eps, "min_pts": dbscan_min_pts},
        )

    regions: List[ColorRegion] = []
    for cell in cover.cells:
        idx = np.flatnonzero(cell.contains(lens_points))
        if idx.size == 0:
            continue

        labels = dbscan_hyab(samples.lab[idx], dbscan_eps, dbscan_min_pts)
        for label in sorted(set(labels.tolist()) - {-1}):
            members = idx[labels == label]
            L, a, b = samples.lab[members].mean(axis=0)
            regions.append(
                ColorRegion(
                    id=len(regions),
                    members=tuple(int(m) for m in members),
                    mean_color=LabColor(L_star=float(L), a_star=float(a), b_star=float(b)),
                    cell=(cell.chroma_index, cell.hue_index),
                )
            )

        logger.debug(
            "Cover cell clustered",
            cell=(cell.chroma_index, cell.hue_index),
            preimage=int(idx.size),
            clusters=len(set(labels.tolist()) - {-1}),
            noise=int((labels == -1).sum()),
        )

    return regions


# ==================== Nerve ====================


def _overlap_pairs(regions: Sequence[ColorRegion]) -> Set[Tuple[int, int]]:
    by_sample: Dict[int, List[int]] = defaultdict(list)
    for region in regions:
        for m in region.members:
            by_sample[m].append(region.id)

    pairs: Set[Tuple[int, int]] = set()
    for owners in by_sample.values():
        if len(owners) > 1:
            pairs.update(itertools.combinations(sorted(owners), 2))
    return pairs


def _network(
    regions: Sequence[ColorRegion],
    edges: Iterable[NetworkEdge],
    template: ColorNetwork,
) -> ColorNetwork:
    return template.model_copy(
        update={
            "regions": tuple(regions),
            "edges": tuple(sorted(edges, key=lambda e: e.key)),
        }
    )


def build_nerve(
    regions: Sequence[ColorRegion],
    config_hash: str = "",
    stride: int = 0,
    n_samples: int = 0,
    illuminant: str = "D65",
    observer: str = "2",
) -> ColorNetwork:
    """1-skeleton of the nerve: an edge for every pair of regions sharing a sample"""
    edges = [NetworkEdge(source=i, target=j) for i, j in sorted(_overlap_pairs(regions))]
    return ColorNetwork(
        regions=tuple(regions),
        edges=tuple(edges),
        config_hash=config_hash,
        stride=stride,
        illuminant=illuminant,
        observer=observer,
        n_samples=n_samples,
    )


def close_hue_cycle(network: ColorNetwork, cover: Cover) -> ColorNetwork:
    """Join regions of the first and last hue interval within each chroma band"""
    n_hue = len(cover.hue_intervals)
    if n_hue < 2:
        return network

    last = n_hue - 1
    existing = network.edge_keys()
    added: List[NetworkEdge] = []
    for band in range(len(cover.chroma_intervals)):
        first_regions = [r.id for r in network.regions if r.cell == (band, 0)]
        last_regions = [r.id for r in network.regions if r.cell == (band, last)]
        for a, b in itertools.product(first_regions, last_regions):
            key = (min(a, b), max(a, b))
            if a == b or key in existing:
                continue
            existing.add(key)
            added.append(NetworkEdge(source=key[0], target=key[1], cyclic=True))

    logger.debug("Hue cycle closed", cyclic_edges=len(added))
    return _network(network.regions, list(network.edges) + added, network)


def eliminate_redundant(network: ColorNetwork) -> ColorNetwork:
    """
    Drop regions whose members are a subset of another region's members.

    Exact duplicates keep the lowest id. Edges of a dropped region move to a
    surviving superset; ids are re-compacted to [0, n_c).
    """
    member_sets = [frozenset(r.members) for r in network.regions]
    candidates: Dict[int, Set[int]] = defaultdict(set)
    for i, j in _overlap_pairs(network.regions):
        candidates[i].add(j)
        candidates[j].add(i)

    def covers(j: int, i: int) -> bool:
        if member_sets[i] == member_sets[j]:
            return j < i
        return member_sets[i] < member_sets[j]

    supersets = {
        i: sorted(j for j in candidates[i] if covers(j, i)) for i in range(network.n_c)
    }
    redundant = {i for i, sups in supersets.items() if sups}
    if not redundant:
        return network

    target: Dict[int, int] = {}
    for i in range(network.n_c):
        if i not in redundant:
            target[i] = i
        else:
            target[i] = next(j for j in supersets[i] if j not in redundant)

    survivors = [i for i in range(network.n_c) if i not in redundant]
    new_id = {old: new for new, old in enumerate(survivors)}
    regions = [
        network.regions[old].model_copy(update={"id": new_id[old]}) for old in survivors
    ]

    overlap = _overlap_pairs(regions)
    edges = {pair: NetworkEdge(source=pair[0], target=pair[1]) for pair in overlap}
    for edge in network.edges:
        if not edge.cyclic:
            continue
        u, v = new_id[target[edge.source]], new_id[target[edge.target]]
        if u == v:
            continue
        key = (min(u, v), max(u, v))
        if key not in edges:
            edges[key] = NetworkEdge(source=key[0], target=key[1], cyclic=True)

    logger.debug("Redundant regions eliminated", removed=len(redundant), kept=len(regions))
    return _network(regions, edges.values(), network)


def assign_weights(network: ColorNetwork) -> ColorNetwork:
    """Weight every edge by the HyAB distance between its regions' mean colours"""
    edges = [
        e.model_copy(
            update={
                "weight": hyab(
                    network.regions[e.source].mean_color, network.regions[e.target].mean_color
                )
            }
        )
        for e in network.edges
    ]
    return _network(network.regions, edges, network)


# ==================== Orchestration ====================


def network_config_hash(mapper: MapperSettings, colorspace: ColorspaceSettings) -> str:
    return digest({"mapper": mapper.model_dump(mode="json"), "colorspace": colorspace.model_dump(mode="json")})


def cover_spec(mapper: MapperSettings) -> CoverSpec:
    return CoverSpec(
        n_intervals_chroma=mapper.n_intervals_chroma,
        n_intervals_hue=mapper.n_intervals_hue,
        gain_chroma=mapper.gain_chroma,
        gain_hue=mapper.gain_hue,
    )


def build_color_network(
    mapper: MapperSettings,
    colorspace: ColorspaceSettings,
    samples: Optional[ColorSamples] = None,
) -> Tuple[ColorNetwork, ColorSamples]:
    """Run the full Mapper pipeline; returns the finished network and its samples"""
    start_time = time.time()

    if samples is None:
        samples = sample_srgb_cube(mapper.stride, colorspace.illuminant, colorspace.observer)
    lens_points = lens_array(samples.lab, colorspace.xi, colorspace.hue_epsilon)
    cover = build_cover(lens_points, cover_spec(mapper))

    regions = refine_pullback(samples, lens_points, cover, mapper.dbscan_eps, mapper.dbscan_min_pts)
    if not regions:
        raise DataException(
            "Mapper produced no color regions",
            details={"eps": mapper.dbscan_eps, "min_pts": mapper.dbscan_min_pts},
        )

    network = build_nerve(
        regions,
        config_hash=network_config_hash(mapper, colorspace),
        stride=samples.stride,
        n_samples=len(samples),
        illuminant=colorspace.illuminant,
        observer=colorspace.observer,
    )
    network = close_hue_cycle(network, cover)
    network = eliminate_redundant(network)
    network = assign_weights(network)

    logger.info(
        "Color network built",
        samples=len(samples),
        cells=len(cover.cells),
        n_regions=network.n_c,
        n_edges=len(network.edges),
        cyclic_edges=sum(e.cyclic for e in network.edges),
        duration_ms=round((time.time() - start_time) * 1000, 2),
    )
    return network, samples


# ==================== Membership ====================


class RegionLookup:
    """
    Region membership of arbitrary sRGB colours.

    A colour resolves to its nearest grid sample in HyAB (ties to the lowest
    sample index) and inherits that sample's regions.
    """

    def __init__(self, network: ColorNetwork, samples: ColorSamples):
        if len(samples) != network.n_samples or samples.stride != network.stride:
            raise DataException(
                "Sample grid does not match color network",
                details={"samples": len(samples), "expected": network.n_samples},
            )
        self.network = network
        self.samples = samples
        self._tree = cKDTree(samples.lab)
        self._grid_pos = np.full(256, -1, dtype=np.int64)
        self._grid_pos[samples.grid.astype(np.int64)] = np.arange(samples.grid.size)

        owners: List[List[int]] = [[] for _ in range(len(samples))]
        for region in network.regions:
            for m in region.members:
                owners[m].append(region.id)
        self._owners: List[Tuple[int, ...]] = [tuple(sorted(o)) for o in owners]
        self._cache: Dict[Tuple[int, int, int], Tuple[int, ...]] = {}

    def nearest_sample(self, rgb: Tuple[int, int, int]) -> int:
        pos = self._grid_pos[list(rgb)]
        if (pos >= 0).all():
            n = self.samples.grid.size
            return int(pos[0] * n * n + pos[1] * n + pos[2])

        lab = srgb_to_lab_array(
            np.array(rgb, dtype=np.uint8), self.network.illuminant, self.network.observer
        )
        d_euclid, _ = self._tree.query(lab)
        candidates = np.array(
            sorted(self._tree.query_ball_point(lab, SQRT2 * d_euclid + 1e-9)), dtype=np.int64
        )
        d = hyab_rows(self.samples.lab[candidates], lab[None, :])
        return int(candidates[int(np.argmin(d))])

    def membership(self, rgb: Tuple[int, int, int]) -> Tuple[int, ...]:
        key = (int(rgb[0]), int(rgb[1]), int(rgb[2]))
        cached = self._cache.get(key)
        if cached is None:
            cached = self._owners[self.nearest_sample(key)]
            self._cache[key] = cached
        return cached

    def membership_many(self, colors: np.ndarray) -> List[Tuple[int, ...]]:
        """Membership of every row of an (N, 3) colour array"""
        colors = np.asarray(colors, dtype=np.int64).reshape(-1, 3)
        unique, inverse = np.unique(colors, axis=0, return_inverse=True)
        resolved = [self.membership(tuple(row)) for row in unique]
        return [resolved[k] for k in inverse.ravel()]


def region_membership(c: RgbColor, lookup: RegionLookup) -> Set[int]:
    return set(lookup.membership(c.as_tuple()))
