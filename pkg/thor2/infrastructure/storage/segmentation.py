"""Instance segmentation maps: 8-bit single-channel images, 0 = background"""

from pathlib import Path
from typing import Union

import numpy as np
from skimage import io as skio

from thor2.core.exceptions import DataException


def load_segmentation(path: Union[str, Path]) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise DataException("segmentation map not found", details={"path": str(path)})
    try:
        image = skio.imread(str(path))
    except (OSError, ValueError) as e:
        raise DataException(f"Unreadable segmentation map: {e}", details={"path": str(path)})

    if image.ndim != 2:
        raise DataException(
            "segmentation map must be single-channel", details={"path": str(path), "shape": list(image.shape)}
        )
    return image.astype(np.int64)


def save_segmentation(segmentation: np.ndarray, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    skio.imsave(str(path), np.asarray(segmentation, dtype=np.uint8), check_contrast=False)
    return path
