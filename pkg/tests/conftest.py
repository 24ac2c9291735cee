# type: ignore
"""Fixtures for tests."""

import math
from pathlib import Path

import numpy as np
import pytest

from capcover._config import CoverConfig
from capcover.models.constellation import builtin_four_d_85
from capcover.models.geometry import Constellation

FIXTURES = Path(__file__).parent / "fixtures"
SQRT3_2 = math.sqrt(3) / 2


@pytest.fixture()
def fixtures_dir() -> Path:
    """Directory holding the test data files."""
    return FIXTURES


@pytest.fixture()
def rng() -> np.random.Generator:
    """Seeded generator, fresh for every test."""
    return np.random.default_rng(20_240_601)


@pytest.fixture()
def cover_cfg() -> CoverConfig:
    """Default solver configuration."""
    return CoverConfig()


@pytest.fixture(scope="session")
def four_d_85() -> Constellation:
    """The embedded 85-point constellation with thresholds sqrt(3)/2."""
    return builtin_four_d_85(SQRT3_2)


@pytest.fixture()
def octahedron() -> Constellation:
    """Six caps around ±e_k in R^3."""
    axes = np.vstack([np.eye(3), -np.eye(3)])
    return Constellation(axes, np.full(6, 0.5))


@pytest.fixture()
def config_file(tmp_path) -> Path:
    """Path of a configuration file that does not exist yet."""
    return tmp_path / "capcover.toml"
