"""
Point-cloud preprocessing: scaling, view normalization, alignment about y,
the occlusion flip about z, and the z-slice / x-strip partition.
"""

import math
from typing import Optional, Sequence, Tuple

import numpy as np
import structlog

from thor2.core.config import SlicingSettings
from thor2.core.exceptions import DataException, ValidationException
from thor2.infrastructure.storage.ply_io import load_ply, write_ply
from thor2.models.cloud import ColoredCloud, Slice, SlicedCloud, Strip

logger = structlog.get_logger()

__all__ = [
    "load_ply",
    "write_ply",
    "scale",
    "view_normalize",
    "align",
    "select_alpha",
    "flip_for_occlusion",
    "slice_and_strip",
    "prepare_cloud",
    "backproject_depth",
]

ALPHA_CANDIDATES = (0.0, math.pi / 2)
SKEW_TOLERANCE = 1e-9
RANK_TOLERANCE = 1e-12
BIN_TOLERANCE = 1e-9


def scale(cloud: ColoredCloud, sigma_s: float) -> ColoredCloud:
    if sigma_s <= 0:
        raise ValidationException("sigma_s must be positive", details={"sigma_s": sigma_s})
    return cloud.with_points(cloud.xyz * sigma_s)


def _fix_sign(axis: np.ndarray, coords: np.ndarray) -> float:
    """+1 or -1 so the third moment along the axis is non-negative"""
    third = float(np.sum(coords**3))
    magnitude = float(np.sum(np.abs(coords) ** 3))
    if abs(third) > SKEW_TOLERANCE * max(magnitude, 1e-300):
        return 1.0 if third > 0 else -1.0
    return 1.0 if axis[int(np.argmax(np.abs(axis)))] > 0 else -1.0


def view_normalize(cloud: ColoredCloud) -> ColoredCloud:
    """
    Move the centroid to the origin and rotate the principal axes onto x, y, z.

    Axes are ordered by decreasing variance; each axis is oriented so the
    point distribution is positively skewed along it.

    Raises:
        DataException: "degenerate cloud" for fewer than 3 points or a covariance of rank < 2
    """
    if len(cloud) < 3:
        raise DataException("degenerate cloud", details={"points": len(cloud)})

    centered = cloud.xyz - cloud.xyz.mean(axis=0)
    covariance = centered.T @ centered / len(cloud)
    eigenvalues, eigenvectors = np.linalg.eigh(covariance)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues, eigenvectors = eigenvalues[order], eigenvectors[:, order]

    if eigenvalues[0] <= 0 or eigenvalues[1] <= RANK_TOLERANCE * eigenvalues[0]:
        raise DataException(
            "degenerate cloud", details={"eigenvalues": [float(v) for v in eigenvalues]}
        )

    projected = centered @ eigenvectors
    signs = np.array([_fix_sign(eigenvectors[:, k], projected[:, k]) for k in range(3)])
    return cloud.with_points(projected * signs, frame="view_normalized")


def align(cloud: ColoredCloud, alpha: float) -> ColoredCloud:
    """Right-handed rotation by alpha about the y-axis"""
    c, s = math.cos(alpha), math.sin(alpha)
    rotation = np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    return cloud.with_points(cloud.xyz @ rotation.T, frame="aligned")


def select_alpha(cloud: ColoredCloud, candidates: Sequence[float] = ALPHA_CANDIDATES) -> float:
    """Candidate angle giving the smallest x-extent; earlier candidates win ties"""
    extents = [float(align(cloud, a).extents()[0]) for a in candidates]
    return float(candidates[int(np.argmin(extents))])


def flip_for_occlusion(cloud: ColoredCloud) -> ColoredCloud:
    """Rotate by pi about z: (x, y, z) -> (-x, -y, z)"""
    return cloud.with_points(cloud.xyz * np.array([-1.0, -1.0, 1.0]))


def _bins(values: np.ndarray, width: float) -> Tuple[np.ndarray, int, float]:
    """
    Bin index floor((v - lo) / width), where a value within BIN_TOLERANCE (in
    bin units) below a boundary counts as lying on it: z = 0.3 with width 0.1
    goes to bin 3, not 2.
    """
    lo = float(values.min())
    extent = float(values.max()) - lo
    n_bins = int(math.floor(extent / width + BIN_TOLERANCE)) + 1
    index = np.floor((values - lo) / width + BIN_TOLERANCE).astype(np.int64)
    return np.clip(index, 0, n_bins - 1), n_bins, extent


def slice_and_strip(cloud: ColoredCloud, sigma1: float, sigma2: float) -> SlicedCloud:
    """
    Partition into z-slices of thickness sigma1, then each slice into x-strips
    of thickness sigma2 measured from the slice's own x minimum.

    Slice i holds z in [z_min + i*sigma1, z_min + (i+1)*sigma1), the last bin
    closed; its points get z = i*sigma1. Empty intermediate bins are kept.
    Values within BIN_TOLERANCE of a boundary go to the upper bin.
    """
    if sigma1 <= 0 or sigma2 <= 0:
        raise ValidationException(
            "slice and strip thickness must be positive",
            details={"sigma1": sigma1, "sigma2": sigma2},
        )
    if len(cloud) == 0:
        raise DataException("cannot slice an empty cloud")

    slice_index, n_slices, h = _bins(cloud.xyz[:, 2], sigma1)
    w = float(cloud.extents()[0])

    slices = []
    for i in range(n_slices):
        members = np.flatnonzero(slice_index == i)
        if members.size == 0:
            slices.append(Slice(index=i, z=i * sigma1))
            continue

        flattened = cloud.xyz[members].copy()
        flattened[:, 2] = i * sigma1
        strip_index, n_strips, _ = _bins(flattened[:, 0], sigma2)

        strips = []
        for j in range(n_strips):
            local = np.flatnonzero(strip_index == j)
            strips.append(
                Strip(
                    index=j,
                    source=members[local],
                    xyz=flattened[local],
                    rgb=cloud.rgb[members[local]],
                )
            )
        slices.append(Slice(index=i, z=i * sigma1, strips=tuple(strips)))

    return SlicedCloud(
        slices=tuple(slices), sigma1=sigma1, sigma2=sigma2, h=h, w=w, n_points=len(cloud)
    )


def prepare_cloud(
    cloud: ColoredCloud, slicing: SlicingSettings, occluded: bool = False
) -> SlicedCloud:
    """scale -> view_normalize -> flip if occluded -> align -> slice"""
    normalized = view_normalize(scale(cloud, slicing.sigma_s))
    if occluded:
        normalized = flip_for_occlusion(normalized)

    alpha = select_alpha(normalized) if slicing.alpha_policy == "auto" else slicing.alpha
    sliced = slice_and_strip(align(normalized, alpha), slicing.sigma1, slicing.sigma2)

    logger.debug(
        "Cloud prepared",
        points=len(cloud),
        occluded=occluded,
        alpha=alpha,
        n_slices=sliced.n_slices,
        max_strips=sliced.max_strips,
    )
    return sliced


def backproject_depth(
    depth: np.ndarray,
    rgb_image: np.ndarray,
    fx: float,
    fy: float,
    cx: float,
    cy: float,
    mask: Optional[np.ndarray] = None,
    depth_scale: float = 1.0,
) -> ColoredCloud:
    """Pinhole back-projection of the valid (depth > 0, masked) pixels of an RGB-D pair"""
    depth = np.asarray(depth, dtype=np.float64)
    if depth.ndim != 2 or rgb_image.shape[:2] != depth.shape:
        raise ValidationException(
            "depth and colour images must share their height and width",
            details={"depth": list(depth.shape), "rgb": list(rgb_image.shape)},
        )

    valid = depth > 0
    if mask is not None:
        valid &= np.asarray(mask, dtype=bool)

    v, u = np.nonzero(valid)
    z = depth[v, u] * depth_scale
    xyz = np.stack([(u - cx) * z / fx, (v - cy) * z / fy, z], axis=1)
    return ColoredCloud(xyz=xyz, rgb=rgb_image[v, u, :3])
