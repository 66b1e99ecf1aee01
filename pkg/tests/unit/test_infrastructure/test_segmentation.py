"""Unit tests for segmentation maps"""

import numpy as np
import pytest

from thor2.core.exceptions import DataException
from thor2.infrastructure.storage.segmentation import load_segmentation, save_segmentation


@pytest.mark.unit
class TestSegmentation:
    def test_round_trip(self, tmp_path):
        segmentation = np.zeros((6, 8), dtype=np.uint8)
        segmentation[1:3, 2:5] = 1
        segmentation[4:6, 0:2] = 7

        path = save_segmentation(segmentation, tmp_path / "seg.png")

        assert np.array_equal(load_segmentation(path), segmentation.astype(np.int64))

    def test_missing(self, tmp_path):
        with pytest.raises(DataException, match="not found"):
            load_segmentation(tmp_path / "none.png")

    def test_rejects_colour_image(self, tmp_path):
        from skimage import io as skio

        skio.imsave(str(tmp_path / "rgb.png"), np.zeros((4, 4, 3), dtype=np.uint8), check_contrast=False)

        with pytest.raises(DataException, match="single-channel"):
            load_segmentation(tmp_path / "rgb.png")
