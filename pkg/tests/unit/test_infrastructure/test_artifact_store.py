"""Unit tests for versioned artifact files"""

import json
import pickle

import numpy as np
import pytest

from thor2.core.exceptions import HashMismatchException, StorageException
from thor2.infrastructure.storage.artifact_store import ArtifactStore
from thor2.models.descriptor import DescriptorLayout, ObjectDescriptor
from thor2.services.similarity import build_similarity
from tests.fixtures.builders import make_network


@pytest.fixture
def network():
    return make_network(3, [(0, 1, 2.0), (1, 2, 3.0)], cyclic=[(1, 2)])


@pytest.fixture
def store(tmp_path):
    return ArtifactStore(tmp_path / "artifacts")


@pytest.mark.unit
class TestNetworkArtifacts:
    def test_round_trip(self, store, network):
        store.save_network(network)

        loaded = store.load_network()

        assert loaded == network
        assert loaded.digest() == network.digest()

    def test_identical_bytes(self, tmp_path, network):
        a = ArtifactStore(tmp_path / "a").save_network(network)
        b = ArtifactStore(tmp_path / "b").save_network(network)

        assert a.read_bytes() == b.read_bytes()

    def test_tampered_content(self, store, network):
        """Test an edited file no longer matches its digest"""
        store.save_network(network)
        payload = json.loads(store.network_path.read_text())
        payload["network"]["edges"][0]["weight"] = 9.0
        store.network_path.write_text(json.dumps(payload))

        with pytest.raises(HashMismatchException):
            store.load_network()

    def test_unknown_version(self, store, network):
        store.save_network(network)
        payload = json.loads(store.network_path.read_text())
        payload["version"] = 99
        store.network_path.write_text(json.dumps(payload))

        with pytest.raises(StorageException, match="version"):
            store.load_network()

    def test_missing(self, store):
        with pytest.raises(StorageException, match="not found"):
            store.load_network()

    def test_corrupt(self, store):
        store.root.mkdir(parents=True)
        store.network_path.write_text("{not json")

        with pytest.raises(StorageException, match="Corrupt"):
            store.load_network()


@pytest.mark.unit
class TestSimilarityArtifacts:
    def test_round_trip(self, store, network):
        delta = build_similarity(network)
        store.save_similarity(delta)

        loaded = store.load_similarity(network)

        assert np.array_equal(loaded.delta, delta.delta)
        assert loaded.network_hash == network.digest()

    def test_other_network(self, store, network):
        store.save_similarity(build_similarity(network))
        other = make_network(3, [(0, 1, 1.0)])

        with pytest.raises(HashMismatchException):
            store.load_similarity(other)


@pytest.mark.unit
class TestDescriptorAndModelArtifacts:
    def test_descriptor_round_trip(self, tmp_path):
        layout = DescriptorLayout(p=2, n_c=2, n_s_max=1, n_slices_max=2, network_hash="abc")
        descriptor = ObjectDescriptor(
            tops=np.arange(8, dtype=float),
            tops2=np.arange(12, dtype=float),
            n_slices=1,
            layout=layout,
        )

        path = ArtifactStore.save_descriptor(descriptor, tmp_path / "d.json")
        loaded = ArtifactStore.load_descriptor(path, network_hash="abc")

        assert np.array_equal(loaded.tops2, descriptor.tops2)
        assert loaded.layout == layout

    def test_descriptor_wrong_network(self, tmp_path):
        layout = DescriptorLayout(p=1, n_c=1, n_s_max=1, n_slices_max=1, network_hash="abc")
        descriptor = ObjectDescriptor(tops=np.zeros(1), tops2=np.zeros(2), n_slices=1, layout=layout)
        path = ArtifactStore.save_descriptor(descriptor, tmp_path / "d.json")

        with pytest.raises(HashMismatchException):
            ArtifactStore.load_descriptor(path, network_hash="xyz")

    def test_model_not_a_model(self, tmp_path):
        path = tmp_path / "m.pkl"
        path.write_bytes(pickle.dumps({"format": "something-else", "version": 1}))

        with pytest.raises(StorageException):
            ArtifactStore.load_model(path)
