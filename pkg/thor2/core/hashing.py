"""Content digests binding artifacts to the configuration that produced them."""

import hashlib
import json
from typing import Any

from pydantic import BaseModel


def digest(payload: Any) -> str:
    """SHA-256 of the canonical JSON form of a payload"""
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
