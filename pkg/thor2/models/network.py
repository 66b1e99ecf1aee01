"""Colour network models"""

from dataclasses import dataclass
from typing import Iterator, List, Tuple

import networkx as nx
import numpy as np
from pydantic import Field, field_validator

from thor2.core.hashing import digest
from thor2.models.base import BaseModel
from thor2.models.color import LabColor, RgbColor


@dataclass(frozen=True)
class ColorSamples:
    """Grid samples of the sRGB cube with their CIELAB images, in r-major order"""

    rgb: np.ndarray  # (N, 3) uint8
    lab: np.ndarray  # (N, 3) float64
    grid: np.ndarray  # channel values of the grid
    stride: int

    def __len__(self) -> int:
        return int(self.rgb.shape[0])

    def __getitem__(self, index: int) -> Tuple[RgbColor, LabColor]:
        r, g, b = (int(v) for v in self.rgb[index])
        L, a, bb = (float(v) for v in self.lab[index])
        return RgbColor(r=r, g=g, b=b), LabColor(L_star=L, a_star=a, b_star=bb)

    def __iter__(self) -> Iterator[Tuple[RgbColor, LabColor]]:
        for i in range(len(self)):
            yield self[i]


class CoverSpec(BaseModel):
    """Cubical cover shape over the (chroma, hue) lens image"""

    n_intervals_chroma: int = Field(3, ge=1)
    n_intervals_hue: int = Field(8, ge=1)
    gain_chroma: float = Field(10.0, ge=0.0, lt=100.0)
    gain_hue: float = Field(25.0, ge=0.0, lt=100.0)


class CoverCell(BaseModel):
    """One rectangle of the cover"""

    chroma_index: int
    hue_index: int
    chroma_interval: Tuple[float, float]
    hue_interval: Tuple[float, float]

    def contains(self, lens_points: np.ndarray) -> np.ndarray:
        c_lo, c_hi = self.chroma_interval
        h_lo, h_hi = self.hue_interval
        return (
            (lens_points[:, 0] >= c_lo)
            & (lens_points[:, 0] <= c_hi)
            & (lens_points[:, 1] >= h_lo)
            & (lens_points[:, 1] <= h_hi)
        )


class Cover(BaseModel):
    """Cover cells plus the derived interval lengths"""

    spec: CoverSpec
    chroma_intervals: List[Tuple[float, float]]
    hue_intervals: List[Tuple[float, float]]
    r1: float
    r2: float
    cells: List[CoverCell]


class ColorRegion(BaseModel):
    """A Mapper cluster of sampled colours; a vertex of the colour network"""

    id: int = Field(..., ge=0)
    members: Tuple[int, ...]
    mean_color: LabColor
    cell: Tuple[int, int]

    @field_validator("members")
    @classmethod
    def _non_empty_sorted(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if not value:
            raise ValueError("color region must have at least one member")
        return tuple(sorted(value))


class NetworkEdge(BaseModel):
    """Undirected weighted edge; cyclic edges close the hue seam"""

    source: int
    target: int
    weight: float = Field(0.0, ge=0.0)
    cyclic: bool = False

    @property
    def key(self) -> Tuple[int, int]:
        return (self.source, self.target)


class ColorNetwork(BaseModel):
    """Colour regions and their weighted overlap graph"""

    regions: Tuple[ColorRegion, ...]
    edges: Tuple[NetworkEdge, ...]
    config_hash: str
    stride: int
    illuminant: str = "D65"
    observer: str = "2"
    n_samples: int

    @property
    def n_c(self) -> int:
        return len(self.regions)

    def edge_keys(self) -> set[Tuple[int, int]]:
        return {e.key for e in self.edges}

    def digest(self) -> str:
        """Content digest bound into downstream artifacts"""
        return digest(
            {
                "config_hash": self.config_hash,
                "regions": [list(r.members) for r in self.regions],
                "edges": [[e.source, e.target, e.weight, e.cyclic] for e in self.edges],
            }
        )

    def to_graph(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n_c))
        for edge in self.edges:
            graph.add_edge(edge.source, edge.target, weight=edge.weight, cyclic=edge.cyclic)
        return graph


@dataclass(frozen=True)
class SimilarityMatrix:
    """Region-pair similarity derived from minimum-weight paths in the colour network"""

    delta: np.ndarray  # (n_c, n_c) float64
    network_hash: str

    @property
    def n_c(self) -> int:
        return int(self.delta.shape[0])

    def digest(self) -> str:
        return digest({"network_hash": self.network_hash, "delta": self.delta.tolist()})
