"""Descriptor layout and per-object descriptor records"""

from dataclasses import dataclass

import numpy as np
from pydantic import Field

from thor2.core.hashing import digest
from thor2.models.base import BaseModel


class DescriptorLayout(BaseModel):
    """Fixed block geometry shared by every descriptor of one model"""

    p: int = Field(..., ge=1)
    n_c: int = Field(..., ge=1)
    n_s_max: int = Field(..., ge=1)
    n_slices_max: int = Field(..., ge=1)
    network_hash: str = ""
    config_hash: str = ""

    @property
    def pi_length(self) -> int:
        return self.p * self.p

    @property
    def color_length(self) -> int:
        return self.n_c * self.n_s_max

    @property
    def block_length(self) -> int:
        return self.pi_length + self.color_length

    @property
    def tops_length(self) -> int:
        return self.n_slices_max * self.pi_length

    @property
    def tops2_length(self) -> int:
        return self.n_slices_max * self.block_length

    def digest(self) -> str:
        return digest(self)


@dataclass(frozen=True)
class ObjectDescriptor:
    """TOPS (shape only) and TOPS2 (shape + colour) vectors of one object"""

    tops: np.ndarray
    tops2: np.ndarray
    n_slices: int
    layout: DescriptorLayout
