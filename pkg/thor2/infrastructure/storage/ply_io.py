"""
PLY reader/writer for coloured point clouds.
Reads ASCII and binary PLY with x/y/z and red/green/blue vertex properties.
"""

from pathlib import Path
from typing import Union

import numpy as np
import structlog
from plyfile import PlyData, PlyElement, PlyElementParseError, PlyHeaderParseError

from thor2.core.exceptions import DataException
from thor2.models.cloud import ColoredCloud

logger = structlog.get_logger()

COORDS = ("x", "y", "z")
COLORS = ("red", "green", "blue")

VERTEX_DTYPE = [
    ("x", "<f4"),
    ("y", "<f4"),
    ("z", "<f4"),
    ("red", "u1"),
    ("green", "u1"),
    ("blue", "u1"),
]


def load_ply(path: Union[str, Path]) -> ColoredCloud:
    """
    Load a coloured point cloud.

    Raises:
        DataException: Missing file, malformed header (with line), short element
            data (with row), or missing coordinate/colour properties
    """
    path = Path(path)
    try:
        ply = PlyData.read(str(path))
    except FileNotFoundError:
        raise DataException("PLY file not found", details={"path": str(path)})
    except PlyHeaderParseError as e:
        raise DataException(
            f"Malformed PLY header: {e.message}",
            details={"path": str(path), "line": e.line},
        )
    except PlyElementParseError as e:
        raise DataException(
            f"Malformed PLY data: {e.message}",
            details={
                "path": str(path),
                "element": e.element.name if e.element is not None else None,
                "row": e.row,
                "property": e.prop.name if e.prop is not None else None,
            },
        )
    except (ValueError, OSError) as e:
        raise DataException(f"Unreadable PLY file: {e}", details={"path": str(path)})

    if "vertex" not in [el.name for el in ply.elements]:
        raise DataException("PLY has no vertex element", details={"path": str(path)})

    vertex = ply["vertex"].data
    names = set(vertex.dtype.names or ())
    missing = [p for p in COORDS if p not in names]
    if missing:
        raise DataException("missing coordinates", details={"path": str(path), "properties": missing})
    missing = [p for p in COLORS if p not in names]
    if missing:
        raise DataException("missing color", details={"path": str(path), "properties": missing})

    xyz = np.stack([vertex[p] for p in COORDS], axis=1).astype(np.float64)
    rgb = np.stack([vertex[p] for p in COLORS], axis=1)
    cloud = ColoredCloud(xyz=xyz, rgb=rgb)

    logger.debug("PLY loaded", path=str(path), points=len(cloud), text=ply.text)
    return cloud


def write_ply(cloud: ColoredCloud, path: Union[str, Path], binary: bool = True) -> Path:
    """Write a cloud as binary little-endian (default) or ASCII PLY"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    vertex = np.empty(len(cloud), dtype=VERTEX_DTYPE)
    for k, p in enumerate(COORDS):
        vertex[p] = cloud.xyz[:, k]
    for k, p in enumerate(COLORS):
        vertex[p] = cloud.rgb[:, k]

    element = PlyElement.describe(vertex, "vertex")
    PlyData([element], text=not binary, byte_order="<").write(str(path))
    return path
