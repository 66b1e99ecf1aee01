"""Colour value types"""

from pydantic import Field

from thor2.models.base import BaseModel


class RgbColor(BaseModel):
    """8-bit sRGB colour"""

    r: int = Field(..., ge=0, le=255)
    g: int = Field(..., ge=0, le=255)
    b: int = Field(..., ge=0, le=255)

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.r, self.g, self.b)


class LabColor(BaseModel):
    """CIELAB colour"""

    L_star: float
    a_star: float
    b_star: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.L_star, self.a_star, self.b_star)


class LensPoint(BaseModel):
    """Image of a colour under the chroma/hue lens"""

    chroma: float = Field(..., ge=0.0)
    hue_shifted: float
