"""Coloured point clouds and their slice/strip partitions"""

from dataclasses import dataclass, field, replace
from typing import Literal, Tuple

import numpy as np

from thor2.core.exceptions import DataException

Frame = Literal["raw", "view_normalized", "aligned"]


@dataclass(frozen=True)
class ColoredCloud:
    """Points (N, 3) with 8-bit sRGB colours (N, 3)"""

    xyz: np.ndarray
    rgb: np.ndarray
    frame: Frame = "raw"

    def __post_init__(self):
        xyz = np.asarray(self.xyz, dtype=np.float64).reshape(-1, 3)
        rgb = np.asarray(self.rgb).reshape(-1, 3)
        if xyz.shape[0] != rgb.shape[0]:
            raise DataException(
                "Point and colour counts differ",
                details={"points": xyz.shape[0], "colors": rgb.shape[0]},
            )
        if not np.isfinite(xyz).all():
            raise DataException("Cloud has non-finite coordinates")
        if rgb.size and (rgb.min() < 0 or rgb.max() > 255):
            raise DataException("Colour values must lie in [0, 255]")
        object.__setattr__(self, "xyz", xyz)
        object.__setattr__(self, "rgb", rgb.astype(np.uint8))

    def __len__(self) -> int:
        return int(self.xyz.shape[0])

    def with_points(self, xyz: np.ndarray, frame: Frame | None = None) -> "ColoredCloud":
        return replace(self, xyz=xyz, frame=frame or self.frame)

    def subset(self, index: np.ndarray) -> "ColoredCloud":
        return ColoredCloud(xyz=self.xyz[index], rgb=self.rgb[index], frame=self.frame)

    def extents(self) -> np.ndarray:
        """Bounding-box side lengths along x, y, z"""
        if len(self) == 0:
            return np.zeros(3)
        return self.xyz.max(axis=0) - self.xyz.min(axis=0)


@dataclass(frozen=True)
class Strip:
    """Points of one x-interval of a slice; may be empty"""

    index: int
    source: np.ndarray  # indices into the aligned cloud
    xyz: np.ndarray
    rgb: np.ndarray

    def __len__(self) -> int:
        return int(self.source.shape[0])


@dataclass(frozen=True)
class Slice:
    """Strips of one z-interval, ordered by x"""

    index: int
    z: float
    strips: Tuple[Strip, ...] = field(default_factory=tuple)

    @property
    def n_s(self) -> int:
        return len(self.strips)

    @property
    def xyz(self) -> np.ndarray:
        if not self.strips:
            return np.empty((0, 3))
        return np.concatenate([s.xyz for s in self.strips], axis=0)

    @property
    def rgb(self) -> np.ndarray:
        if not self.strips:
            return np.empty((0, 3), dtype=np.uint8)
        return np.concatenate([s.rgb for s in self.strips], axis=0)

    def __len__(self) -> int:
        return sum(len(s) for s in self.strips)


@dataclass(frozen=True)
class SlicedCloud:
    """An aligned cloud partitioned into z-slices and x-strips"""

    slices: Tuple[Slice, ...]
    sigma1: float
    sigma2: float
    h: float
    w: float
    n_points: int

    @property
    def n_slices(self) -> int:
        return len(self.slices)

    @property
    def max_strips(self) -> int:
        return max((s.n_s for s in self.slices), default=0)
