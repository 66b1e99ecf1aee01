"""
Global test fixtures and configuration.
Provides small colour networks, clouds and settings shared across tests.
"""

import numpy as np
import pytest

from thor2.core.config import ColorspaceSettings, Settings
from thor2.models.cloud import ColoredCloud
from thor2.services.mapper_network import RegionLookup, build_color_network
from thor2.services.recognition import ColorArtifacts
from thor2.services.similarity import build_similarity
from tests.fixtures.builders import TOY_MAPPER, make_fast_settings


# ==================== Settings Fixtures ====================


@pytest.fixture
def settings() -> Settings:
    """Default settings"""
    return Settings()


@pytest.fixture
def fast_settings() -> Settings:
    """Settings sized for quick end-to-end runs on 0.1 m objects"""
    return make_fast_settings(TOY_MAPPER)


# ==================== Colour Network Fixtures ====================


@pytest.fixture(scope="session")
def toy_network():
    """(network, samples) built on the 5-per-axis sRGB grid"""
    return build_color_network(TOY_MAPPER, ColorspaceSettings())


@pytest.fixture(scope="session")
def toy_lookup(toy_network) -> RegionLookup:
    network, samples = toy_network
    return RegionLookup(network, samples)


@pytest.fixture(scope="session")
def toy_artifacts(toy_network, toy_lookup) -> ColorArtifacts:
    network, _ = toy_network
    return ColorArtifacts(lookup=toy_lookup, delta=build_similarity(network))


# ==================== Cloud Fixtures ====================


@pytest.fixture
def grid_cube() -> ColoredCloud:
    """10 x 10 x 10 lattice at k + 0.5, red"""
    k = np.arange(10) + 0.5
    x, y, z = np.meshgrid(k, k, k, indexing="ij")
    xyz = np.column_stack([x.ravel(), y.ravel(), z.ravel()])
    rgb = np.tile([255, 0, 0], (len(xyz), 1))
    return ColoredCloud(xyz=xyz, rgb=rgb)


@pytest.fixture
def skewed_cloud() -> ColoredCloud:
    """Random cloud with distinct principal variances and non-zero skew on every axis"""
    rng = np.random.default_rng(7)
    xyz = rng.exponential(size=(400, 3)) * np.array([3.0, 2.0, 1.0])
    rgb = rng.integers(0, 256, size=(400, 3))
    return ColoredCloud(xyz=xyz, rgb=rgb)

