"""
Synthetic benchmark: coloured geometric primitives sampled uniformly on their
surfaces, viewed under random rotations and occluded by half-space truncation.
"""

import math
from pathlib import Path
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import structlog
from scipy.spatial.transform import Rotation

from thor2.core.config import SynthSettings
from thor2.core.exceptions import DataException, ValidationException
from thor2.infrastructure.storage.manifest import write_manifest
from thor2.infrastructure.storage.ply_io import write_ply
from thor2.models.base import BaseModel
from thor2.models.cloud import ColoredCloud
from thor2.models.color import RgbColor
from thor2.services.geometry import view_normalize

logger = structlog.get_logger()

Kind = Literal["box", "cylinder", "sphere", "L-shape"]
Scheme = Literal["solid", "two-tone", "striped"]

MIN_POINTS = 100
N_STRIPES = 4
VIEW_CUT_CORRELATION = 0.95

RED = RgbColor(r=255, g=0, b=0)
GREEN = RgbColor(r=0, g=160, b=0)
BLUE = RgbColor(r=0, g=0, b=255)


class ObjectSpec(BaseModel):
    """One benchmark class"""

    label: str
    kind: Kind
    size: Tuple[float, ...]
    scheme: Scheme
    colors: Tuple[RgbColor, ...]


# ==================== Surface sampling ====================

# A patch is a parallelogram: origin + s*u + t*v for s, t in [0, 1)
Patch = Tuple[np.ndarray, np.ndarray, np.ndarray]


def _patch(origin, u, v) -> Patch:
    return np.asarray(origin, float), np.asarray(u, float), np.asarray(v, float)


def _box_patches(a: float, b: float, c: float) -> List[Patch]:
    x, y, z = np.eye(3)
    lo = np.array([-a / 2, -b / 2, -c / 2])
    return [
        _patch(lo, b * y, c * z),
        _patch(lo + a * x, b * y, c * z),
        _patch(lo, a * x, c * z),
        _patch(lo + b * y, a * x, c * z),
        _patch(lo, a * x, b * y),
        _patch(lo + c * z, a * x, b * y),
    ]


def _l_shape_patches(a: float, b: float, t: float, d: float) -> List[Patch]:
    """Extrusion along z by d of the L polygon [0,a]x[0,t] union [0,t]x[0,b]"""
    x, y, z = np.eye(3)
    outline = [(0, 0), (a, 0), (a, t), (t, t), (t, b), (0, b)]
    patches = []
    for p, q in zip(outline, outline[1:] + outline[:1]):
        p, q = np.array([*p, 0.0]), np.array([*q, 0.0])
        patches.append(_patch(p, q - p, d * z))
    for zc in (0.0, d):
        patches.append(_patch([0, 0, zc], a * x, t * y))
        patches.append(_patch([0, t, zc], t * x, (b - t) * y))
    center = np.array([a / 2, b / 2, d / 2])
    return [(o - center, u, v) for o, u, v in patches]


def _sample_patches(patches: Sequence[Patch], n: int, rng: np.random.Generator) -> np.ndarray:
    areas = np.array([np.linalg.norm(np.cross(u, v)) for _, u, v in patches])
    choice = rng.choice(len(patches), size=n, p=areas / areas.sum())
    st = rng.random((n, 2))
    origins = np.array([patches[k][0] for k in choice])
    us = np.array([patches[k][1] for k in choice])
    vs = np.array([patches[k][2] for k in choice])
    return origins + st[:, :1] * us + st[:, 1:] * vs


def _sample_sphere(radius: float, n: int, rng: np.random.Generator) -> np.ndarray:
    directions = rng.normal(size=(n, 3))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    return radius * directions


def _sample_cylinder(radius: float, height: float, n: int, rng: np.random.Generator) -> np.ndarray:
    lateral, cap = 2 * math.pi * radius * height, math.pi * radius**2
    part = rng.choice(3, size=n, p=np.array([lateral, cap, cap]) / (lateral + 2 * cap))

    theta = rng.uniform(0.0, 2 * math.pi, n)
    rho = np.where(part == 0, radius, radius * np.sqrt(rng.random(n)))
    z = np.select(
        [part == 0, part == 1],
        [rng.uniform(-height / 2, height / 2, n), np.full(n, -height / 2)],
        np.full(n, height / 2),
    )
    return np.column_stack([rho * np.cos(theta), rho * np.sin(theta), z])


def _paint(xyz: np.ndarray, scheme: Scheme, colors: Sequence[RgbColor]) -> np.ndarray:
    palette = np.array([c.as_tuple() for c in colors], dtype=np.uint8)
    if scheme == "solid":
        return np.repeat(palette[:1], len(xyz), axis=0)
    if len(palette) < 2:
        raise ValidationException(f"{scheme} scheme needs two colours")

    z = xyz[:, 2]
    if scheme == "two-tone":
        index = (z >= 0.5 * (z.min() + z.max())).astype(int)
    else:
        width = (z.max() - z.min()) / N_STRIPES
        index = np.clip(np.floor((z - z.min()) / width), 0, N_STRIPES - 1).astype(int) % 2
    return palette[index]


def generate_object(
    kind: Kind,
    size: Sequence[float],
    scheme: Scheme = "solid",
    colors: Sequence[RgbColor] = (RED,),
    n_points: int = 1000,
    seed: int = 0,
) -> ColoredCloud:
    """
    Uniform surface sample of a primitive centred at the origin.

    Size parameters: box (a, b, c); cylinder (radius, height); sphere (radius,);
    L-shape (a, b, thickness, depth).
    """
    if n_points < MIN_POINTS:
        raise ValidationException(f"n_points must be at least {MIN_POINTS}", details={"n_points": n_points})

    expected = {"box": 3, "cylinder": 2, "sphere": 1, "L-shape": 4}[kind]
    size = tuple(float(v) for v in size)
    if len(size) != expected or any(v <= 0 for v in size):
        raise ValidationException(
            "invalid size parameters", details={"kind": kind, "size": list(size), "expected": expected}
        )
    if kind == "L-shape" and size[2] >= min(size[0], size[1]):
        raise ValidationException("L-shape thickness must be smaller than both arms", details={"size": list(size)})

    rng = np.random.default_rng(seed)
    if kind == "box":
        xyz = _sample_patches(_box_patches(*size), n_points, rng)
    elif kind == "cylinder":
        xyz = _sample_cylinder(size[0], size[1], n_points, rng)
    elif kind == "sphere":
        xyz = _sample_sphere(size[0], n_points, rng)
    else:
        xyz = _sample_patches(_l_shape_patches(*size), n_points, rng)

    return ColoredCloud(xyz=xyz, rgb=_paint(xyz, scheme, colors))


# ==================== Views and occlusion ====================


def generate_views(cloud: ColoredCloud, n_views: int, seed: int = 0) -> List[ColoredCloud]:
    """n_views copies under uniformly random proper rotations"""
    if n_views < 1:
        raise ValidationException("n_views must be at least 1", details={"n_views": n_views})
    rotations = Rotation.random(n_views, seed)
    return [cloud.with_points(rotations[k].apply(cloud.xyz)) for k in range(n_views)]


def _lowest(values: np.ndarray, keep: int, seed: int) -> np.ndarray:
    """Sorted indices of the keep smallest values; ties broken by a seeded permutation"""
    permutation = np.random.default_rng(seed).permutation(len(values))
    order = permutation[np.argsort(values[permutation], kind="stable")]
    return np.sort(order[:keep])


def _keep_count(cloud: ColoredCloud, fraction: float) -> int:
    if not 0.0 <= fraction < 1.0:
        raise ValidationException("occlusion fraction must lie in [0, 1)", details={"fraction": fraction})
    if fraction == 0.0:
        return len(cloud)
    keep = math.ceil((1.0 - fraction) * len(cloud))
    if keep < MIN_POINTS:
        raise DataException(
            f"occlusion leaves fewer than {MIN_POINTS} points",
            details={"fraction": fraction, "remaining": keep},
        )
    return keep


def occlude(cloud: ColoredCloud, fraction: float, axis: str = "z", seed: int = 0) -> ColoredCloud:
    """
    Keep the ceil((1 - fraction) * N) points lowest along an axis, in original order.

    Ties at the cut are broken by a seeded permutation.
    """
    keep = _keep_count(cloud, fraction)
    if fraction == 0.0:
        return cloud
    return cloud.subset(_lowest(cloud.xyz[:, "xyz".index(axis)], keep, seed))


def occlude_in_view(cloud: ColoredCloud, fraction: float, axis: str = "z", seed: int = 0) -> ColoredCloud:
    """
    Hide the far end of a view along an axis of its own view-normalized frame.

    Cuts are tried along `axis` keeping its low end, then its high end, then
    along the other axes. The first cut whose remainder, normalized again,
    has the cut axis as z with the kept end at z_min is returned, so the kept
    part is sliced from the same end as the whole view. The first cut is
    returned when none qualifies.
    """
    keep = _keep_count(cloud, fraction)
    if fraction == 0.0:
        return cloud

    normalized = view_normalize(cloud).xyz
    first: Optional[np.ndarray] = None
    for name in [axis] + [a for a in "xyz" if a != axis]:
        for direction in (1.0, -1.0):
            depth = direction * normalized[:, "xyz".index(name)]
            kept = _lowest(depth, keep, seed)
            if first is None:
                first = kept
            renormalized = view_normalize(cloud.subset(kept)).xyz[:, 2]
            if np.corrcoef(depth[kept], renormalized)[0, 1] >= VIEW_CUT_CORRELATION:
                return cloud.subset(kept)

    logger.debug("No cut keeps the slicing origin", fraction=fraction, points=len(cloud))
    return cloud.subset(first)


def jitter(cloud: ColoredCloud, sigma: float, seed: int = 0) -> ColoredCloud:
    if sigma <= 0:
        return cloud
    noise = np.random.default_rng(seed).normal(scale=sigma, size=cloud.xyz.shape)
    return cloud.with_points(cloud.xyz + noise)


# ==================== Benchmark ====================


def benchmark_classes(object_size: float = 0.1) -> List[ObjectSpec]:
    """Four primitives, each solid red and two-tone green/blue"""
    s = object_size
    shapes = [
        ("box", (s, 0.6 * s, 0.4 * s)),
        ("cylinder", (0.3 * s, s)),
        ("sphere", (0.5 * s,)),
        ("L-shape", (s, 0.7 * s, 0.3 * s, 0.3 * s)),
    ]
    schemes = [("solid", (RED,)), ("two-tone", (GREEN, BLUE))]
    return [
        ObjectSpec(label=f"{kind}-{scheme}", kind=kind, size=size, scheme=scheme, colors=colors)
        for kind, size in shapes
        for scheme, colors in schemes
    ]


def build_benchmark(
    settings: SynthSettings,
    out_dir: Path,
    seed: int = 0,
    classes: Optional[Sequence[ObjectSpec]] = None,
) -> pd.DataFrame:
    """
    Write train views and occluded test views of every class as PLY files,
    plus manifest.csv (path, label, view_id, occlusion, split).
    """
    out_dir = Path(out_dir)
    classes = list(classes) if classes is not None else benchmark_classes(settings.object_size)
    root = np.random.SeedSequence(seed)

    records = []
    for spec, class_seq in zip(classes, root.spawn(len(classes))):
        obj_seed, train_seed, test_seed, noise_seed = (
            int(s.generate_state(1)[0]) for s in class_seq.spawn(4)
        )
        cloud = generate_object(
            spec.kind, spec.size, spec.scheme, spec.colors, settings.n_points, seed=obj_seed
        )

        for view_id, view in enumerate(generate_views(cloud, settings.train_views, train_seed)):
            view = jitter(view, settings.jitter, noise_seed + view_id)
            path = write_ply(view, out_dir / "train" / f"{spec.label}_{view_id:03d}.ply")
            records.append((path, spec.label, view_id, 0.0, "train"))

        for view_id, view in enumerate(generate_views(cloud, settings.test_views, test_seed)):
            view = jitter(view, settings.jitter, noise_seed + settings.train_views + view_id)
            for fraction in settings.occlusion_fractions:
                cut = occlude_in_view if settings.occlusion_frame == "view" else occlude
                occluded = cut(view, fraction, settings.occlusion_axis, seed=test_seed + view_id)
                split = f"test_{fraction:.2f}"
                path = write_ply(occluded, out_dir / split / f"{spec.label}_{view_id:03d}.ply")
                records.append((path, spec.label, view_id, float(fraction), split))

    manifest = pd.DataFrame(records, columns=["path", "label", "view_id", "occlusion", "split"])
    manifest["path"] = [str(Path(p).relative_to(out_dir)) for p in manifest["path"]]
    write_manifest(manifest, out_dir / "manifest.csv")

    logger.info(
        "Benchmark written",
        out_dir=str(out_dir),
        classes=len(classes),
        files=len(manifest),
        seed=seed,
    )
    return manifest
