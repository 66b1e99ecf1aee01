"""Unit tests for PLY reading and writing"""

import numpy as np
import pytest

from thor2.core.exceptions import DataException
from thor2.infrastructure.storage.ply_io import load_ply, write_ply
from tests.fixtures.builders import cloud_from_points

HEADER = """ply
format ascii 1.0
element vertex {n}
property float x
property float y
property float z
{colors}end_header
"""

COLOR_PROPERTIES = "property uchar red\nproperty uchar green\nproperty uchar blue\n"


def write_text(path, body, n=3, colors=COLOR_PROPERTIES, header=None):
    path.write_text((header or HEADER).format(n=n, colors=colors) + body)
    return path


@pytest.mark.unit
class TestLoadPly:
    def test_ascii(self, tmp_path):
        """Test a hand-written three-point file"""
        path = write_text(tmp_path / "a.ply", "0 0 0 255 0 0\n1 0 0 0 255 0\n0 1 0.5 0 0 255\n")

        cloud = load_ply(path)

        assert cloud.xyz.tolist() == [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.5]]
        assert cloud.rgb.tolist() == [[255, 0, 0], [0, 255, 0], [0, 0, 255]]
        assert cloud.xyz.dtype == np.float64

    def test_missing_color(self, tmp_path):
        path = write_text(tmp_path / "a.ply", "0 0 0\n1 0 0\n0 1 0\n", colors="")

        with pytest.raises(DataException, match="missing color"):
            load_ply(path)

    def test_bad_header_reports_line(self, tmp_path):
        header = HEADER.replace("format ascii 1.0", "format bogus 1.0")
        path = write_text(tmp_path / "a.ply", "0 0 0 1 2 3\n", n=1, header=header)

        with pytest.raises(DataException, match="Malformed PLY header") as exc_info:
            load_ply(path)

        assert "line" in exc_info.value.details

    def test_truncated_data(self, tmp_path):
        """Test a file declaring more vertices than it holds"""
        path = write_text(tmp_path / "a.ply", "0 0 0 1 2 3\n1 1 1 4 5 6\n", n=3)

        with pytest.raises(DataException, match="Malformed PLY data") as exc_info:
            load_ply(path)

        assert exc_info.value.details["element"] == "vertex"

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataException, match="not found"):
            load_ply(tmp_path / "nothing.ply")


@pytest.mark.unit
class TestWritePly:
    def test_binary_bytes_reproducible(self, tmp_path):
        """Test writing twice gives identical bytes and a faithful reload"""
        cloud = cloud_from_points([[0.25, 0.5, 1.0], [2.0, 4.0, 8.0]], rgb=(10, 20, 30))

        a = write_ply(cloud, tmp_path / "a.ply")
        b = write_ply(cloud, tmp_path / "b.ply")

        assert a.read_bytes() == b.read_bytes()
        reloaded = load_ply(a)
        assert np.array_equal(reloaded.xyz, cloud.xyz)
        assert np.array_equal(reloaded.rgb, cloud.rgb)

    def test_ascii_output(self, tmp_path):
        path = write_ply(cloud_from_points([[1.0, 2.0, 3.0]]), tmp_path / "a.ply", binary=False)

        assert "format ascii 1.0" in path.read_text()
