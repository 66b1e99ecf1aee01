"""
Slice-wise shape and colour descriptors.

Each slice contributes one block: the flattened persistence image of the
slice's 0-dimensional persistence diagram, followed (for TOPS2) by the
flattened colour embedding (C @ delta).T of its strips.
"""

from typing import Any, Dict, Iterable, List, Sequence, Union

import numpy as np
import structlog
from scipy.cluster.hierarchy import linkage
from scipy.spatial.distance import pdist
from scipy.special import ndtr

from thor2.core.config import DescriptorSettings, SlicingSettings
from thor2.core.exceptions import DataException, ValidationException
from thor2.core.hashing import digest
from thor2.models.cloud import Slice, SlicedCloud, Strip
from thor2.models.descriptor import DescriptorLayout, ObjectDescriptor
from thor2.models.network import SimilarityMatrix
from thor2.services.mapper_network import RegionLookup

logger = structlog.get_logger()


# ==================== Shape ====================


def persistence_diagram(points_xy: np.ndarray) -> np.ndarray:
    """
    0-dimensional persistence of the single-linkage filtration, as (birth, death) rows.

    Every component is born at 0. Deaths are the merge heights; the component
    that never dies gets the diameter of the point set.
    """
    points_xy = np.asarray(points_xy, dtype=np.float64).reshape(-1, 2)
    n = points_xy.shape[0]
    if n == 0:
        return np.empty((0, 2))
    if n == 1:
        return np.zeros((1, 2))

    distances = pdist(points_xy)
    merges = linkage(distances, method="single")[:, 2]
    deaths = np.append(np.sort(merges), distances.max())
    return np.column_stack([np.zeros(n), deaths])


def _pixel_mass(centers: np.ndarray, edges: np.ndarray, sigma: float) -> np.ndarray:
    """(k, p) Gaussian mass of each center falling in each of the p bins"""
    cdf = ndtr((edges[None, :] - centers[:, None]) / sigma)
    return np.diff(cdf, axis=1)


def persistence_image(
    points_or_slice: Union[Slice, np.ndarray],
    settings: DescriptorSettings = DescriptorSettings(),
    sigma2: float = 0.01,
) -> np.ndarray:
    """
    p x p persistence image; rows index persistence, columns index birth.

    Each feature is a Gaussian at (birth, persistence) weighted by its
    persistence, integrated over the pixels of the configured axis ranges.
    """
    xy = points_or_slice.xyz[:, :2] if isinstance(points_or_slice, Slice) else points_or_slice
    diagram = persistence_diagram(xy)
    p = settings.pi_resolution
    if diagram.shape[0] == 0:
        return np.zeros((p, p))

    sigma = settings.resolved_sigma(sigma2)
    births = diagram[:, 0]
    persistence = diagram[:, 1] - diagram[:, 0]

    birth_edges = np.linspace(settings.pi_birth_min, settings.pi_birth_max, p + 1)
    persistence_edges = np.linspace(0.0, settings.pi_persistence_max, p + 1)
    birth_mass = _pixel_mass(births, birth_edges, sigma)
    persistence_mass = _pixel_mass(persistence, persistence_edges, sigma)

    return (persistence[:, None] * persistence_mass).T @ birth_mass


# ==================== Colour ====================


def color_vector(strip: Union[Strip, np.ndarray], lookup: RegionLookup) -> np.ndarray:
    """
    Soft region histogram of a strip.

    A point in regions M adds 1/|M| to each of them; a point in no region adds nothing.
    """
    rgb = strip.rgb if isinstance(strip, Strip) else np.asarray(strip)
    phi = np.zeros(lookup.network.n_c)
    if rgb.size == 0:
        return phi

    for regions in lookup.membership_many(rgb):
        if regions:
            phi[list(regions)] += 1.0 / len(regions)
    return phi


def color_matrix(slice_: Slice, lookup: RegionLookup, n_s_max: int) -> np.ndarray:
    """Strip colour vectors stacked in strip order, zero rows up to n_s_max"""
    if slice_.n_s > n_s_max:
        raise DataException(
            "strip overflow",
            details={"slice": slice_.index, "n_s": slice_.n_s, "n_s_max": n_s_max},
        )
    matrix = np.zeros((n_s_max, lookup.network.n_c))
    for j, strip in enumerate(slice_.strips):
        matrix[j] = color_vector(strip, lookup)
    return matrix


def embed(cmatrix: np.ndarray, delta: Union[SimilarityMatrix, np.ndarray]) -> np.ndarray:
    """(C @ delta).T, shape (n_c, n_s_max)"""
    delta_matrix = delta.delta if isinstance(delta, SimilarityMatrix) else np.asarray(delta)
    if cmatrix.shape[1] != delta_matrix.shape[0] or delta_matrix.shape[0] != delta_matrix.shape[1]:
        raise ValidationException(
            "colour matrix and similarity matrix dimensions differ",
            details={"cmatrix": list(cmatrix.shape), "delta": list(delta_matrix.shape)},
        )
    return (cmatrix @ delta_matrix).T


# ==================== Assembly ====================


def descriptor_config_hash(slicing: SlicingSettings, descriptor: DescriptorSettings) -> str:
    return digest(
        {"slicing": slicing.model_dump(mode="json"), "descriptor": descriptor.model_dump(mode="json")}
    )


def build_layout(
    sliced_clouds: Iterable[SlicedCloud],
    n_c: int,
    slicing: SlicingSettings,
    descriptor: DescriptorSettings,
    network_hash: str = "",
) -> DescriptorLayout:
    """Layout sized to the training clouds plus the configured margin"""
    clouds = list(sliced_clouds)
    if not clouds:
        raise DataException("cannot size a descriptor layout without clouds")

    margin = descriptor.layout_margin
    return DescriptorLayout(
        p=descriptor.pi_resolution,
        n_c=n_c,
        n_s_max=max(max(c.max_strips for c in clouds), 1) + margin,
        n_slices_max=max(c.n_slices for c in clouds) + margin,
        network_hash=network_hash,
        config_hash=descriptor_config_hash(slicing, descriptor),
    )


def describe(
    sliced: SlicedCloud,
    lookup: RegionLookup,
    delta: SimilarityMatrix,
    layout: DescriptorLayout,
    settings: DescriptorSettings = DescriptorSettings(),
) -> ObjectDescriptor:
    """
    TOPS and TOPS2 vectors of a sliced cloud, zero-padded to n_slices_max blocks.

    Raises:
        DataException: "slice overflow" or "strip overflow" when the cloud exceeds the layout
    """
    if sliced.n_slices > layout.n_slices_max:
        raise DataException(
            "slice overflow",
            details={"n_slices": sliced.n_slices, "n_slices_max": layout.n_slices_max},
        )
    if delta.n_c != layout.n_c or lookup.network.n_c != layout.n_c:
        raise ValidationException(
            "region count differs from descriptor layout",
            details={"delta": delta.n_c, "network": lookup.network.n_c, "layout": layout.n_c},
        )

    tops = np.zeros((layout.n_slices_max, layout.pi_length))
    tops2 = np.zeros((layout.n_slices_max, layout.block_length))
    for i, slice_ in enumerate(sliced.slices):
        image = persistence_image(slice_, settings, sliced.sigma2).ravel()
        embedding = embed(color_matrix(slice_, lookup, layout.n_s_max), delta).ravel()
        tops[i] = image
        tops2[i, : layout.pi_length] = image
        tops2[i, layout.pi_length :] = embedding

    return ObjectDescriptor(
        tops=tops.ravel(), tops2=tops2.ravel(), n_slices=sliced.n_slices, layout=layout
    )


def tops2(
    sliced: SlicedCloud,
    lookup: RegionLookup,
    delta: SimilarityMatrix,
    layout: DescriptorLayout,
    settings: DescriptorSettings = DescriptorSettings(),
) -> np.ndarray:
    """The TOPS2 vector alone: per slice, the persistence image followed by the colour embedding"""
    return describe(sliced, lookup, delta, layout, settings).tops2


def slice_diagnostics(sliced: SlicedCloud, lookup: RegionLookup) -> List[Dict[str, Any]]:
    """One row per strip: position, point counts and colour vector"""
    rows: List[Dict[str, Any]] = []
    for slice_ in sliced.slices:
        for strip in slice_.strips:
            phi = color_vector(strip, lookup)
            row: Dict[str, Any] = {
                "slice": slice_.index,
                "strip": strip.index,
                "z": slice_.z,
                "n_strips": slice_.n_s,
                "points": len(strip),
                "membership_mass": float(phi.sum()),
            }
            row.update({f"phi_{k}": float(v) for k, v in enumerate(phi)})
            rows.append(row)
    return rows


def stack(descriptors: Sequence[ObjectDescriptor]) -> Dict[str, np.ndarray]:
    """Stack per-object vectors into (N, D) design matrices"""
    return {
        "tops": np.vstack([d.tops for d in descriptors]),
        "tops2": np.vstack([d.tops2 for d in descriptors]),
    }
