"""Manifest and report CSV files (pandas)"""

from pathlib import Path
from typing import Iterable, Sequence, Union

import pandas as pd
import structlog

from thor2.core.exceptions import DataException
from thor2.models.recognition import EvaluationRow

logger = structlog.get_logger()

MANIFEST_COLUMNS = ("path", "label", "view_id", "occlusion", "split")
REPORT_COLUMNS = ("split", "seed", "accuracy")


def write_manifest(manifest: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    manifest.to_csv(path, index=False, float_format="%.4f")
    return path


def read_manifest(path: Union[str, Path], required: Sequence[str] = ("path",)) -> pd.DataFrame:
    """
    Read a manifest; relative object paths are resolved against its directory.

    Raises:
        DataException: Missing file, unparsable CSV or missing columns
    """
    path = Path(path)
    try:
        manifest = pd.read_csv(path, dtype={"label": str, "split": str})
    except FileNotFoundError:
        raise DataException("manifest not found", details={"path": str(path)})
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DataException(f"Unreadable manifest: {e}", details={"path": str(path)})

    missing = [c for c in required if c not in manifest.columns]
    if missing:
        raise DataException("manifest is missing columns", details={"path": str(path), "columns": missing})

    for column in ("path", "segmentation"):
        if column in manifest.columns:
            manifest[column] = [
                str(p) if Path(p).is_absolute() else str(path.parent / p) for p in manifest[column]
            ]
    if "occluded" not in manifest.columns and "occlusion" in manifest.columns:
        manifest["occluded"] = manifest["occlusion"].astype(float) > 0
    if "split" not in manifest.columns:
        manifest["split"] = "all"

    logger.debug("Manifest loaded", path=str(path), rows=len(manifest))
    return manifest


def write_report(rows: Iterable[EvaluationRow], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame([row.model_dump() for row in rows], columns=list(REPORT_COLUMNS))
    frame.to_csv(path, index=False, float_format="%.6f")
    return path
