"""
Shared pytest fixtures for the verification toolkit tests.
"""
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from geometry.prolim import truncation_tower
from verifier.fixtures import load_fixture


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def flat():
    """Euclidean plane in Cartesian, polar and skew charts."""
    return load_fixture("flat-cartesian-polar")


@pytest.fixture(scope="session")
def sphere():
    """Round sphere with three stereographic charts."""
    return load_fixture("sphere-stereographic-3chart")


@pytest.fixture(scope="session")
def tower_fixture():
    return load_fixture("truncation-tower-d4")


@pytest.fixture
def tower4():
    return truncation_tower(4)
