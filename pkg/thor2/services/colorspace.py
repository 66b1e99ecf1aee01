"""
Colour representations, sRGB <-> CIELAB conversion, the HyAB colour difference
and the chroma/hue lens used to project CIELAB samples for the colour network.
"""

import math

import numpy as np
from skimage import color as skcolor

from thor2.models.color import LabColor, LensPoint, RgbColor

DEFAULT_XI = math.pi / 8
DEFAULT_HUE_EPSILON = 0.5
TWO_PI = 2.0 * math.pi


def srgb_to_lab_array(rgb: np.ndarray, illuminant: str = "D65", observer: str = "2") -> np.ndarray:
    """Convert an (..., 3) array of 8-bit sRGB values to CIELAB"""
    scaled = np.asarray(rgb, dtype=np.float64) / 255.0
    lab = skcolor.rgb2lab(scaled.reshape(-1, 1, 3), illuminant=illuminant, observer=observer)
    return lab.reshape(scaled.shape)


def lab_to_srgb_array(lab: np.ndarray, illuminant: str = "D65", observer: str = "2") -> np.ndarray:
    """Convert an (..., 3) CIELAB array to sRGB floats in [0, 1] (out-of-gamut values clipped)"""
    lab = np.asarray(lab, dtype=np.float64)
    rgb = skcolor.lab2rgb(lab.reshape(-1, 1, 3), illuminant=illuminant, observer=observer)
    return rgb.reshape(lab.shape)


def srgb_to_lab(c: RgbColor, illuminant: str = "D65", observer: str = "2") -> LabColor:
    L, a, b = srgb_to_lab_array(np.array(c.as_tuple()), illuminant, observer)
    return LabColor(L_star=float(L), a_star=float(a), b_star=float(b))


def lab_to_srgb(k: LabColor, illuminant: str = "D65", observer: str = "2") -> RgbColor:
    """Nearest 8-bit sRGB colour of a CIELAB colour"""
    rgb = lab_to_srgb_array(np.array(k.as_tuple()), illuminant, observer)
    r, g, b = np.clip(np.rint(rgb * 255.0), 0, 255).astype(int)
    return RgbColor(r=int(r), g=int(g), b=int(b))


def hyab(m: LabColor, n: LabColor) -> float:
    """HyAB difference: city-block in lightness plus Euclidean in the a*/b* plane"""
    return abs(m.L_star - n.L_star) + math.hypot(m.a_star - n.a_star, m.b_star - n.b_star)


def hyab_rows(m: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Row-wise HyAB between two (N, 3) CIELAB arrays"""
    m = np.asarray(m, dtype=np.float64)
    n = np.asarray(n, dtype=np.float64)
    return np.abs(m[..., 0] - n[..., 0]) + np.hypot(m[..., 1] - n[..., 1], m[..., 2] - n[..., 2])


def hyab_pairwise(m: np.ndarray, n: np.ndarray) -> np.ndarray:
    """(N, M) HyAB matrix between the rows of two CIELAB arrays"""
    m = np.asarray(m, dtype=np.float64)[:, None, :]
    n = np.asarray(n, dtype=np.float64)[None, :, :]
    return hyab_rows(m, n)


def lens_array(
    lab: np.ndarray, xi: float = DEFAULT_XI, hue_epsilon: float = DEFAULT_HUE_EPSILON
) -> np.ndarray:
    """
    Project CIELAB rows to (chroma, shifted hue).

    Hue is the two-argument angle of (a*, b*) in [0, 2pi) plus xi; colours with
    chroma below hue_epsilon get hue xi.
    """
    lab = np.asarray(lab, dtype=np.float64)
    a, b = lab[..., 1], lab[..., 2]
    chroma = np.hypot(a, b)
    theta = np.mod(np.arctan2(b, a), TWO_PI)
    theta = np.where(theta >= TWO_PI, 0.0, theta)
    theta = np.where(chroma < hue_epsilon, 0.0, theta)
    return np.stack([chroma, xi + theta], axis=-1)


def lens(k: LabColor, xi: float = DEFAULT_XI, hue_epsilon: float = DEFAULT_HUE_EPSILON) -> LensPoint:
    chroma, hue = lens_array(np.array(k.as_tuple()), xi, hue_epsilon)
    return LensPoint(chroma=float(chroma), hue_shifted=float(hue))
