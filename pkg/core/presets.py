#!/usr/bin/env python3
"""
Reference Systems
Named Gaussian and discrete systems with known dominant atoms, and random
observed Gaussian systems drawn from the null family
"""

from typing import Callable, Dict, Tuple

import numpy as np

from .discrete import CANONICAL_GATES, DiscreteSystem, JointPmf
from .gaussian import GaussianPidSystem
from .numit import sample_null_params

NEAR_ONE_DELTA = 1e-4
DISCRETE_DELTA = 0.01


def _symmetric(g: float) -> GaussianPidSystem:
    return GaussianPidSystem.build([[0.5, 0.5]], [[20.0, 10.0], [10.0, 20.0]], [[1.0]], g)


def _max_red(g: float) -> GaussianPidSystem:
    corr = 1.0 - NEAR_ONE_DELTA
    return GaussianPidSystem.build([[0.45, 0.45]], [[1.0, corr], [corr, 1.0]], [[0.19]], g)


def _max_unique(g: float) -> GaussianPidSystem:
    return GaussianPidSystem.build([[0.0, 0.9]], np.eye(2), [[0.19]], g)


def _max_syn(g: float) -> GaussianPidSystem:
    return GaussianPidSystem.build([[0.45, 0.45]], [[1.0, -0.9], [-0.9, 1.0]], [[0.998]], g)


def _asymmetric(g: float) -> GaussianPidSystem:
    return GaussianPidSystem.build([[-0.3, 0.9]], 50.0 * np.array([[5.0, 7.0], [7.0, 11.0]]), [[1.0]], g)


GAUSSIAN_PRESETS: Dict[str, Callable[[float], GaussianPidSystem]] = {
    "symmetric": _symmetric,
    "max_red": _max_red,
    "max_unique": _max_unique,
    "max_syn": _max_syn,
    "asymmetric": _asymmetric,
}

DOMINANT_ATOM = {"max_red": "red", "max_unique": "un_y", "max_syn": "syn"}


def gaussian_preset(name: str, g: float = 1.0) -> GaussianPidSystem:
    try:
        return GAUSSIAN_PRESETS[name](float(g))
    except KeyError:
        raise ValueError(f"unknown Gaussian preset {name!r}, choose from {sorted(GAUSSIAN_PRESETS)}")


def random_gaussian_system(d_x: int, d_y: int, d_t: int, seed: int, g: float = 1.0) -> GaussianPidSystem:
    """Observed system drawn from the null family's parameter distribution"""
    a, sigma_s, sigma_eps = sample_null_params(d_x, d_y, d_t, np.random.default_rng(seed))
    return GaussianPidSystem(a, sigma_s, sigma_eps, float(g), d_x, d_y)


def _redundant_pmf(delta: float) -> JointPmf:
    return JointPmf((delta / 2, (1 - delta) / 2, (1 - delta) / 2, delta / 2))


DISCRETE_PRESETS: Dict[str, Tuple[str, Callable[[], JointPmf]]] = {
    "max_red": ("Z5", lambda: _redundant_pmf(DISCRETE_DELTA)),
    "max_unique": ("Z2", JointPmf.uniform),
    "max_syn": ("Z1", JointPmf.uniform),
}

DISCRETE_DOMINANT_ATOM = {"max_red": "red", "max_unique": "un_x", "max_syn": "syn"}


def discrete_preset(name: str, p_eps: float = 0.0) -> DiscreteSystem:
    try:
        gate_name, pmf = DISCRETE_PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown discrete preset {name!r}, choose from {sorted(DISCRETE_PRESETS)}")
    return DiscreteSystem(pmf(), CANONICAL_GATES[gate_name], p_eps)
