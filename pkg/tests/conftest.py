#!/usr/bin/env python3
"""
Shared fixtures for the NuMIT test suite
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add the project root to the path
sys.path.insert(0, str(Path(__file__).parent.parent))

from core.gaussian import GaussianPidSystem
from core.presets import gaussian_preset
from core.var_model import Partition, VarModel


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


@pytest.fixture
def symmetric_system() -> GaussianPidSystem:
    """A = (0.5, 0.5), Sigma_S = [[20, 10], [10, 20]], unit noise"""
    return gaussian_preset("symmetric", 1.0)


@pytest.fixture
def scalar_var() -> VarModel:
    return VarModel.build([[[0.5]]], [[1.0]])


@pytest.fixture
def diagonal_var() -> VarModel:
    return VarModel.build([np.diag([0.5, 0.5])], np.eye(2))


@pytest.fixture
def coupled_var() -> VarModel:
    return VarModel.build([[[0.0, 0.6], [0.6, 0.0]]], np.eye(2))


@pytest.fixture
def split_pair() -> Partition:
    return Partition.of([0], 2)


def random_stable_var(rng: np.random.Generator, n: int, p: int, radius: float = 0.9) -> VarModel:
    """Random VAR(p) rescaled so the companion spectral radius equals radius"""
    from core.ensemble import wishart_bartlett
    from core.var_model import companion_matrix, spectral_radius

    coeffs = [rng.standard_normal((n, n)) for _ in range(p)]
    rho = spectral_radius(companion_matrix(VarModel.build(coeffs, np.eye(n))))
    c = radius / rho
    coeffs = [a * c ** (lag + 1) for lag, a in enumerate(coeffs)]
    return VarModel.build(coeffs, wishart_bartlett(rng, n, df=n + 2))


@pytest.fixture
def make_stable_var():
    return random_stable_var
