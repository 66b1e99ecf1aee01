"""
Versioned artifact files: colour network, similarity matrix, descriptors and models.

JSON artifacts are written with sorted keys and no timestamps so identical
inputs give byte-identical files. Each artifact carries the digest of what it
was built from and is checked against it on load.
"""

import json
import pickle
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
import structlog
from pydantic import ValidationError

from thor2.core.exceptions import HashMismatchException, StorageException
from thor2.models.descriptor import DescriptorLayout, ObjectDescriptor
from thor2.models.network import ColorNetwork, SimilarityMatrix
from thor2.models.recognition import Preprocess, RecognitionModel

logger = structlog.get_logger()

FORMAT_VERSION = 1
NETWORK_FILE = "network.json"
SIMILARITY_FILE = "similarity.json"


def _write_json(path: Path, payload: Dict[str, Any]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n")
    return path


def _read_json(path: Path, kind: str) -> Dict[str, Any]:
    try:
        payload = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise StorageException(f"{kind} file not found", details={"path": str(path)})
    except (OSError, json.JSONDecodeError) as e:
        raise StorageException(f"Corrupt {kind} file: {e}", details={"path": str(path)})
    _check_header(payload, kind, path)
    return payload


def _check_header(payload: Any, kind: str, path: Path) -> None:
    if not isinstance(payload, dict) or payload.get("format") != f"thor2-{kind}":
        raise StorageException(f"Not a {kind} file", details={"path": str(path)})
    if payload.get("version") != FORMAT_VERSION:
        raise StorageException(
            f"Unsupported {kind} format version",
            details={"path": str(path), "version": payload.get("version")},
        )


class ArtifactStore:
    """Reads and writes pipeline artifacts under one directory"""

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)

    @property
    def network_path(self) -> Path:
        return self.root / NETWORK_FILE

    @property
    def similarity_path(self) -> Path:
        return self.root / SIMILARITY_FILE

    # ==================== Colour network ====================

    def save_network(self, network: ColorNetwork) -> Path:
        payload = {
            "format": "thor2-network",
            "version": FORMAT_VERSION,
            "digest": network.digest(),
            "network": network.model_dump(mode="json"),
        }
        path = _write_json(self.network_path, payload)
        logger.info("Color network saved", path=str(path), n_regions=network.n_c)
        return path

    def load_network(self) -> ColorNetwork:
        """
        Raises:
            StorageException: Missing, corrupt or unversioned file
            HashMismatchException: Stored digest disagrees with the content
        """
        payload = _read_json(self.network_path, "network")
        try:
            network = ColorNetwork.model_validate(payload["network"])
        except (KeyError, ValidationError) as e:
            raise StorageException(f"Invalid network file: {e}", details={"path": str(self.network_path)})

        if network.digest() != payload.get("digest"):
            raise HashMismatchException(
                "Color network content does not match its digest",
                details={"path": str(self.network_path)},
            )
        return network

    # ==================== Similarity ====================

    def save_similarity(self, delta: SimilarityMatrix) -> Path:
        payload = {
            "format": "thor2-similarity",
            "version": FORMAT_VERSION,
            "network_hash": delta.network_hash,
            "n_c": delta.n_c,
            "delta": delta.delta.tolist(),
        }
        return _write_json(self.similarity_path, payload)

    def load_similarity(self, network: Optional[ColorNetwork] = None) -> SimilarityMatrix:
        """
        Raises:
            HashMismatchException: If the matrix was built from another network
        """
        payload = _read_json(self.similarity_path, "similarity")
        try:
            delta = np.asarray(payload["delta"], dtype=np.float64)
            network_hash = str(payload["network_hash"])
        except (KeyError, TypeError, ValueError) as e:
            raise StorageException(f"Invalid similarity file: {e}", details={"path": str(self.similarity_path)})

        if delta.ndim != 2 or delta.shape[0] != delta.shape[1] or delta.shape[0] != payload.get("n_c"):
            raise StorageException("Similarity matrix has the wrong shape", details={"shape": list(delta.shape)})
        if network is not None and network.digest() != network_hash:
            raise HashMismatchException(
                "Similarity matrix belongs to a different color network",
                details={"similarity": network_hash, "network": network.digest()},
            )
        return SimilarityMatrix(delta=delta, network_hash=network_hash)

    # ==================== Descriptors ====================

    @staticmethod
    def save_descriptor(descriptor: ObjectDescriptor, path: Union[str, Path]) -> Path:
        payload = {
            "format": "thor2-descriptor",
            "version": FORMAT_VERSION,
            "layout": descriptor.layout.model_dump(mode="json"),
            "n_slices": descriptor.n_slices,
            "tops": descriptor.tops.tolist(),
            "tops2": descriptor.tops2.tolist(),
        }
        return _write_json(Path(path), payload)

    @staticmethod
    def load_descriptor(path: Union[str, Path], network_hash: Optional[str] = None) -> ObjectDescriptor:
        payload = _read_json(Path(path), "descriptor")
        try:
            layout = DescriptorLayout.model_validate(payload["layout"])
            descriptor = ObjectDescriptor(
                tops=np.asarray(payload["tops"], dtype=np.float64),
                tops2=np.asarray(payload["tops2"], dtype=np.float64),
                n_slices=int(payload["n_slices"]),
                layout=layout,
            )
        except (KeyError, TypeError, ValueError, ValidationError) as e:
            raise StorageException(f"Invalid descriptor file: {e}", details={"path": str(path)})

        if descriptor.tops2.size != layout.tops2_length or descriptor.tops.size != layout.tops_length:
            raise StorageException("Descriptor length disagrees with its layout", details={"path": str(path)})
        if network_hash is not None and layout.network_hash != network_hash:
            raise HashMismatchException(
                "Descriptor belongs to a different color network", details={"path": str(path)}
            )
        return descriptor

    # ==================== Models ====================

    @staticmethod
    def save_model(model: RecognitionModel, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        container = {
            "format": "thor2-model",
            "version": FORMAT_VERSION,
            "labels": list(model.labels),
            "seed": model.seed,
            "preprocess": model.preprocess.model_dump(mode="json"),
            "m1": model.m1,
            "m2": model.m2,
        }
        path.write_bytes(pickle.dumps(container, protocol=pickle.HIGHEST_PROTOCOL))
        logger.info("Model saved", path=str(path), labels=len(model.labels))
        return path

    @staticmethod
    def load_model(path: Union[str, Path]) -> RecognitionModel:
        path = Path(path)
        try:
            container = pickle.loads(path.read_bytes())
        except FileNotFoundError:
            raise StorageException("model file not found", details={"path": str(path)})
        except (OSError, ValueError, pickle.UnpicklingError, EOFError, AttributeError, ImportError) as e:
            raise StorageException(f"Corrupt model file: {e}", details={"path": str(path)})

        _check_header(container, "model", path)
        try:
            return RecognitionModel(
                m1=container["m1"],
                m2=container["m2"],
                labels=tuple(container["labels"]),
                preprocess=Preprocess.model_validate(container["preprocess"]),
                seed=int(container["seed"]),
            )
        except (KeyError, ValidationError) as e:
            raise StorageException(f"Invalid model file: {e}", details={"path": str(path)})
