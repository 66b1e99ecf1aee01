"""Unit tests for digests and exception codes"""

import pytest

from thor2.core.config import MapperSettings
from thor2.core.exceptions import (
    ConfigException,
    DataException,
    HashMismatchException,
    StorageException,
    ValidationException,
)
from thor2.core.hashing import digest


@pytest.mark.unit
class TestDigest:
    def test_key_order_does_not_matter(self):
        """Test canonical JSON"""
        assert digest({"a": 1, "b": [1, 2]}) == digest({"b": [1, 2], "a": 1})

    def test_models_hash_like_their_dump(self):
        """Test pydantic models are dumped before hashing"""
        mapper = MapperSettings()

        assert digest(mapper) == digest(mapper.model_dump(mode="json"))

    def test_different_payloads_differ(self):
        """Test sensitivity"""
        assert digest(MapperSettings(stride=8)) != digest(MapperSettings(stride=16))


@pytest.mark.unit
class TestExitCodes:
    @pytest.mark.parametrize(
        "exc, code, error_code",
        [
            (ConfigException("x"), 2, "CONFIG_ERROR"),
            (DataException("x"), 3, "DATA_ERROR"),
            (ValidationException("x"), 3, "VALIDATION_ERROR"),
            (StorageException("x"), 3, "STORAGE_ERROR"),
            (HashMismatchException("x"), 4, "HASH_MISMATCH"),
        ],
    )
    def test_exit_codes(self, exc, code, error_code):
        """Test each failure class maps to its exit code"""
        assert exc.exit_code == code
        assert exc.error_code == error_code
        assert exc.details == {}
