#!/usr/bin/env python3
"""
NuMIT for Gaussian Systems
Random same-TMI null channels, noise-gain root finding and quantile normalisation
"""

import logging
from functools import partial
from typing import Tuple

import numpy as np
import scipy.linalg
from scipy.optimize import brentq

from .ensemble import DEFAULTS, NormalizedAtoms, NullEnsemble, build_ensemble, normalize_against, wishart_bartlett
from .exceptions import (
    BracketFailure,
    CholeskyFailure,
    InconsistentInformation,
    NegativeInformation,
    SampleRejected,
    ZeroChannel,
    ZeroTmi,
)
from .gaussian import CovMatrix, GaussianPidSystem, system_tmi
from .pid import ZERO_TMI, PidAtoms, pid_gaussian

logger = logging.getLogger(__name__)

G_BRACKET = (1e-6, 1e6)
G_CAP = 2.0 ** 60
ROOT_TOL = 1e-9
MAX_ITER = 200
ZERO_CHANNEL_TOL = 1e-14
SPD_RETRIES = 5


def sample_null_params(d_x: int, d_y: int, d_t: int,
                       rng: np.random.Generator) -> Tuple[np.ndarray, CovMatrix, CovMatrix]:
    """A ~ N(0,1) i.i.d., Sigma_S ~ W(I, d_S), Sigma_eps ~ W(I, d_T)"""
    if min(d_x, d_y, d_t) < 1:
        raise ValueError(f"dimensions must be positive, got {d_x}/{d_y}/{d_t}")
    d_s = d_x + d_y
    a = rng.standard_normal((d_t, d_s))

    for attempt in range(SPD_RETRIES):
        try:
            sigma_s = CovMatrix(wishart_bartlett(rng, d_s))
            sigma_eps = CovMatrix(wishart_bartlett(rng, d_t))
        except CholeskyFailure as e:
            logger.debug(f"Wishart draw {attempt} not SPD: {e}")
            continue
        return a, sigma_s, sigma_eps
    raise CholeskyFailure(f"no SPD Wishart draw in {SPD_RETRIES} attempts")


def channel_gains(a: np.ndarray, sigma_s: CovMatrix, sigma_eps: CovMatrix) -> np.ndarray:
    """Generalised eigenvalues of (A Sigma_S A^T, Sigma_eps)

    TMI at gain g is 1/2 sum log(1 + lambda / g).
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    signal = a @ sigma_s.entries @ a.T
    signal = 0.5 * (signal + signal.T)
    gains = scipy.linalg.eigh(signal, sigma_eps.entries, eigvals_only=True)
    return np.clip(gains, 0.0, None)


def _tmi_at(gains: np.ndarray, g: float) -> float:
    return 0.5 * float(np.sum(np.log1p(gains / g)))


def _require_channel(gains: np.ndarray) -> None:
    if gains.size == 0 or gains.max() <= ZERO_CHANNEL_TOL:
        raise ZeroChannel("A Sigma_S A^T vanishes, no noise gain reaches a positive TMI")


def noise_root_fn(a: np.ndarray, sigma_s: CovMatrix, sigma_eps: CovMatrix,
                  target_tmi: float, g: float) -> float:
    """exp(-2 TMI(g)) - exp(-2 target), increasing in g, zero at the matching gain"""
    if not g > 0:
        raise ValueError(f"noise gain must be positive, got {g}")
    gains = channel_gains(a, sigma_s, sigma_eps)
    _require_channel(gains)
    return float(np.exp(-2.0 * _tmi_at(gains, g)) - np.exp(-2.0 * target_tmi))


def solve_g(a: np.ndarray, sigma_s: CovMatrix, sigma_eps: CovMatrix, target_tmi: float) -> float:
    """Noise gain g* > 0 with TMI(g*) = target, found on log g"""
    if not target_tmi > 0:
        raise ValueError(f"target TMI must be positive, got {target_tmi}")
    gains = channel_gains(a, sigma_s, sigma_eps)
    _require_channel(gains)

    floor = np.exp(-2.0 * target_tmi)

    def root_fn(log_g: float) -> float:
        return np.exp(-2.0 * _tmi_at(gains, np.exp(log_g))) - floor

    lo, hi = np.log(G_BRACKET[0]), np.log(G_BRACKET[1])
    log_cap, step = np.log(G_CAP), np.log(2.0)
    while root_fn(hi) <= 0:
        hi += step
        if hi > log_cap:
            raise BracketFailure(f"TMI {target_tmi:.3e} needs a gain above 2^60")
    while root_fn(lo) >= 0:
        lo -= step
        if lo < -log_cap:
            raise BracketFailure(f"TMI {target_tmi:.3e} needs a gain below 2^-60")
    logger.debug(f"Gain bracket [{np.exp(lo):.3e}, {np.exp(hi):.3e}] for TMI {target_tmi:.6g}")

    try:
        log_g = brentq(root_fn, lo, hi, xtol=1e-14, maxiter=MAX_ITER)
    except RuntimeError as e:
        raise BracketFailure(f"gain search did not converge: {e}")

    g = float(np.exp(log_g))
    residual = abs(_tmi_at(gains, g) - target_tmi)
    if residual > ROOT_TOL:
        raise BracketFailure(f"gain {g:.6g} leaves TMI residual {residual:.3e}")
    return g


def draw_gaussian_null(d_x: int, d_y: int, d_t: int, target_tmi: float,
                       index: int, rng: np.random.Generator) -> PidAtoms:
    """One random channel tuned to target_tmi, decomposed"""
    a, sigma_s, sigma_eps = sample_null_params(d_x, d_y, d_t, rng)
    g = solve_g(a, sigma_s, sigma_eps, target_tmi)
    try:
        return pid_gaussian(GaussianPidSystem(a, sigma_s, sigma_eps, g, d_x, d_y))
    except (NegativeInformation, InconsistentInformation) as e:
        raise SampleRejected(f"ill-conditioned null draw: {e}")


def build_null_ensemble(target_tmi: float, d_x: int, d_y: int, d_t: int, n: int, seed: int,
                        workers: int = 1, retry_budget: int = DEFAULTS.retry_budget) -> NullEnsemble:
    draw = partial(draw_gaussian_null, d_x, d_y, d_t, target_tmi)
    return build_ensemble(draw, target_tmi, n, seed, "gaussian", workers, retry_budget)


def numit_normalize(sys: GaussianPidSystem, n: int = DEFAULTS.n_null, seed: int = 0,
                    workers: int = 1, retry_budget: int = DEFAULTS.retry_budget) -> NormalizedAtoms:
    """Quantiles of the system's atoms among same-TMI, same-dimension null channels"""
    tmi = system_tmi(sys)
    if tmi < ZERO_TMI:
        raise ZeroTmi(f"system TMI {tmi:.3e} is zero, nothing to normalise")
    atoms = pid_gaussian(sys)
    ensemble = build_null_ensemble(tmi, sys.d_x, sys.d_y, sys.d_t, n, seed, workers, retry_budget)
    return normalize_against(atoms, ensemble)
