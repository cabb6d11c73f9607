#!/usr/bin/env python3
"""
VAR Dynamics
Simulation, least-squares fitting, Lyapunov autocovariances, past-to-future PID
and the spectral-radius null model for vector autoregressions
"""

import logging
from dataclasses import dataclass
from functools import partial
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from scipy.optimize import brentq

from .ensemble import DEFAULTS, NormalizedAtoms, NullEnsemble, build_ensemble, normalize_against, wishart_bartlett
from .exceptions import (
    BracketFailure,
    CholeskyFailure,
    InconsistentInformation,
    NegativeInformation,
    NonFiniteData,
    RankDeficientRegressors,
    SampleRejected,
    TargetUnreachable,
    TooShortEpoch,
    UnstableSystem,
    ZeroDynamics,
    ZeroTmi,
)
from .gaussian import CovMatrix, IndexSet, clamp_information, gaussian_mi, spd_logdet
from .pid import ZERO_TMI, PidAtoms, mmi_pid

logger = logging.getLogger(__name__)

STABILITY_MARGIN = 1e-9
G_VAR_CAP = 1.0 - 1e-6
ROOT_TOL = 1e-9
DIRECT_LYAPUNOV_MAX = 40
SPD_RETRIES = 5


@dataclass(frozen=True, eq=False)
class VarModel:
    """X_t = sum_l A_l X_{t-l} + eta_t, eta ~ N(0, V)"""

    coeffs: Tuple[np.ndarray, ...]
    resid_cov: CovMatrix

    def __post_init__(self):
        if len(self.coeffs) < 1:
            raise ValueError("VAR model needs at least one lag")
        n = self.resid_cov.dim
        coeffs = []
        for lag, a in enumerate(self.coeffs, start=1):
            a = np.atleast_2d(np.array(a, dtype=float))
            if a.shape != (n, n):
                raise ValueError(f"A_{lag} has shape {a.shape}, expected ({n}, {n})")
            if not np.all(np.isfinite(a)):
                raise NonFiniteData(f"A_{lag} has non-finite entries")
            a.setflags(write=False)
            coeffs.append(a)
        object.__setattr__(self, "coeffs", tuple(coeffs))

    @classmethod
    def build(cls, coeffs: Sequence, resid_cov) -> "VarModel":
        v = resid_cov if isinstance(resid_cov, CovMatrix) else CovMatrix(np.atleast_2d(resid_cov))
        return cls(tuple(np.atleast_2d(np.asarray(a, dtype=float)) for a in coeffs), v)

    @property
    def dim(self) -> int:
        return self.resid_cov.dim

    @property
    def order(self) -> int:
        return len(self.coeffs)

    def with_resid_cov(self, v: CovMatrix) -> "VarModel":
        return VarModel(self.coeffs, v)

    def is_stable(self) -> bool:
        return spectral_radius(companion_matrix(self)) < 1.0 - STABILITY_MARGIN


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """One or more epochs of shape (timepoints, n_vars)"""

    epochs: Tuple[np.ndarray, ...]
    sample_rate: Optional[float] = None

    def __post_init__(self):
        if len(self.epochs) == 0:
            raise ValueError("time series has no epochs")
        epochs = []
        for k, e in enumerate(self.epochs):
            e = np.array(e, dtype=float)
            if e.ndim == 1:
                e = e.reshape(-1, 1)
            if e.ndim != 2:
                raise ValueError(f"epoch {k} must be 2-D, got shape {e.shape}")
            if not np.all(np.isfinite(e)):
                raise NonFiniteData(f"epoch {k} has non-finite values")
            e.setflags(write=False)
            epochs.append(e)
        widths = {e.shape[1] for e in epochs}
        if len(widths) != 1:
            raise ValueError(f"epochs disagree on the number of variables: {sorted(widths)}")
        object.__setattr__(self, "epochs", tuple(epochs))

    @property
    def n_vars(self) -> int:
        return self.epochs[0].shape[1]

    def select(self, variables: Sequence[int], epochs: Optional[Sequence[int]] = None) -> "TimeSeries":
        chosen = range(len(self.epochs)) if epochs is None else epochs
        return TimeSeries(tuple(self.epochs[k][:, list(variables)] for k in chosen), self.sample_rate)


@dataclass(frozen=True)
class Partition:
    """Disjoint, covering split of n variables into sources X and Y"""

    x_vars: IndexSet
    y_vars: IndexSet
    n_vars: int

    def __post_init__(self):
        if len(self.x_vars) == 0 or len(self.y_vars) == 0:
            raise ValueError("both sides of a partition must be non-empty")
        if not self.x_vars.isdisjoint(self.y_vars):
            raise ValueError(f"partition sides overlap: {self.x_vars.indices} / {self.y_vars.indices}")
        if set(self.x_vars.indices) | set(self.y_vars.indices) != set(range(self.n_vars)):
            raise ValueError(f"partition does not cover 0..{self.n_vars - 1}")

    @classmethod
    def of(cls, x_vars: Sequence[int], n_vars: int) -> "Partition":
        x = IndexSet.of(x_vars)
        y = IndexSet.of(i for i in range(n_vars) if i not in x.indices)
        return cls(x, y, n_vars)

    def lagged(self, order: int) -> Tuple[IndexSet, IndexSet]:
        """Indices of each side in the stacked past (X_{t-1}, ..., X_{t-p})"""
        n = self.n_vars
        x = IndexSet.of(lag * n + j for lag in range(order) for j in self.x_vars)
        y = IndexSet.of(lag * n + j for lag in range(order) for j in self.y_vars)
        return x, y


def spectral_radius(a: np.ndarray) -> float:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(a))))


def companion_matrix(m: VarModel) -> np.ndarray:
    n, p = m.dim, m.order
    comp = np.zeros((n * p, n * p))
    comp[:n, :] = np.hstack(m.coeffs)
    if p > 1:
        comp[n:, :-n] = np.eye(n * (p - 1))
    return comp


def solve_lyapunov(a: np.ndarray, w: np.ndarray) -> CovMatrix:
    """Stationary covariance Gamma = a Gamma a^T + w"""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    w = np.atleast_2d(np.asarray(w, dtype=float))
    rho = spectral_radius(a)
    if rho >= 1.0 - STABILITY_MARGIN:
        raise UnstableSystem(f"spectral radius {rho:.9f} is not below 1")

    method = "direct" if a.shape[0] <= DIRECT_LYAPUNOV_MAX else "bilinear"
    gamma = scipy.linalg.solve_discrete_lyapunov(a, w, method=method)
    return CovMatrix(0.5 * (gamma + gamma.T))


def _stacked_covariance(m: VarModel) -> CovMatrix:
    """Covariance of the stacked state (X_t, ..., X_{t-p+1})"""
    n, p = m.dim, m.order
    w = np.zeros((n * p, n * p))
    w[:n, :n] = m.resid_cov.entries
    return solve_lyapunov(companion_matrix(m), w)


def autocov_sequence(m: VarModel, k_max: int) -> List[np.ndarray]:
    """[Gamma_0, ..., Gamma_k_max] with Gamma_k = E[X_t X_{t-k}^T]"""
    if k_max < 0:
        raise ValueError(f"k_max must be non-negative, got {k_max}")
    n, p = m.dim, m.order
    stacked = _stacked_covariance(m).entries
    gammas = [stacked[:n, lag * n:(lag + 1) * n].copy() for lag in range(p)]
    for k in range(p, k_max + 1):
        gammas.append(sum(m.coeffs[lag] @ gammas[k - lag - 1] for lag in range(p)))
    return gammas[: k_max + 1]


def simulate_var(m: VarModel, steps: int, burn_in: int, rng: np.random.Generator,
                 epochs: int = 1) -> TimeSeries:
    if steps < 1 or burn_in < 0 or epochs < 1:
        raise ValueError(f"invalid simulation length steps={steps} burn_in={burn_in} epochs={epochs}")
    if not m.is_stable():
        raise UnstableSystem("cannot simulate an unstable VAR model")

    n, p = m.dim, m.order
    chol = m.resid_cov.chol
    total = p + burn_in + steps
    series = []
    for _ in range(epochs):
        x = np.zeros((total, n))
        noise = rng.standard_normal((total, n)) @ chol.T
        for t in range(p, total):
            x[t] = noise[t]
            for lag, a in enumerate(m.coeffs, start=1):
                x[t] += a @ x[t - lag]
        series.append(x[p + burn_in:])
    return TimeSeries(tuple(series))


def fit_var(ts: TimeSeries, p: int) -> VarModel:
    """Pooled OLS over epochs with per-epoch demeaning; no regression across epoch edges"""
    if p < 1:
        raise ValueError(f"VAR order must be positive, got {p}")
    n = ts.n_vars
    targets, regressors = [], []
    for k, epoch in enumerate(ts.epochs):
        if epoch.shape[0] < p + 2:
            raise TooShortEpoch(f"epoch {k} has {epoch.shape[0]} timepoints, order {p} needs {p + 2}")
        x = epoch - epoch.mean(axis=0)
        steps = x.shape[0]
        targets.append(x[p:])
        regressors.append(np.hstack([x[p - lag:steps - lag] for lag in range(1, p + 1)]))

    y = np.vstack(targets)
    z = np.vstack(regressors)
    dof = y.shape[0] - n * p
    if dof <= 0:
        raise TooShortEpoch(f"{y.shape[0]} usable timepoints cannot fit {n * p} regressors")
    if np.linalg.matrix_rank(z) < n * p:
        raise RankDeficientRegressors(f"lagged regressors have rank below {n * p}")

    beta, *_ = np.linalg.lstsq(z, y, rcond=None)
    resid = y - z @ beta
    coeffs = beta.T
    v = resid.T @ resid / dof
    try:
        resid_cov = CovMatrix(0.5 * (v + v.T))
    except CholeskyFailure as e:
        raise RankDeficientRegressors(f"residual covariance is singular: {e}")

    logger.debug(f"Fitted VAR({p}) on {y.shape[0]} samples across {len(ts.epochs)} epochs")
    return VarModel(tuple(coeffs[:, lag * n:(lag + 1) * n] for lag in range(p)), resid_cov)


def var_tmi(m: VarModel, partition: Optional[Partition] = None) -> float:
    """I(past; future) = 1/2 log|Gamma_0| - 1/2 log|V|

    The partition of the sources does not change the joint information; it is
    accepted so callers can pass the same arguments as to var_pid.
    """
    n = m.dim
    gamma0 = CovMatrix(_stacked_covariance(m).entries[:n, :n])
    return clamp_information(0.5 * (spd_logdet(gamma0) - spd_logdet(m.resid_cov)))


def _past_future_joint(m: VarModel) -> CovMatrix:
    """Covariance of (X_{t-1}, ..., X_{t-p}, X_t)"""
    n, p = m.dim, m.order
    past = _stacked_covariance(m).entries
    cross = np.hstack(m.coeffs) @ past
    future = past[:n, :n]
    return CovMatrix(np.block([[past, cross.T], [cross, future]]))


def var_pid(m: VarModel, part: Partition) -> PidAtoms:
    """Past of X and past of Y as sources, joint future state as target"""
    if part.n_vars != m.dim:
        raise ValueError(f"partition covers {part.n_vars} variables, model has {m.dim}")
    n, p = m.dim, m.order
    joint = _past_future_joint(m)
    x_past, y_past = part.lagged(p)
    future = IndexSet.span(n * p, n * p + n)
    i_x = gaussian_mi(joint, x_past, future)
    i_y = gaussian_mi(joint, y_past, future)
    return mmi_pid(i_x, i_y, var_tmi(m))


def sample_null_var(n: int, rng: np.random.Generator) -> Tuple[np.ndarray, CovMatrix]:
    """A_raw ~ N(0,1) i.i.d. and V ~ W(I, n)"""
    if n < 1:
        raise ValueError(f"dimension must be positive, got {n}")
    a_raw = rng.standard_normal((n, n))
    for attempt in range(SPD_RETRIES):
        try:
            return a_raw, CovMatrix(wishart_bartlett(rng, n))
        except CholeskyFailure as e:
            logger.debug(f"Wishart draw {attempt} not SPD: {e}")
    raise CholeskyFailure(f"no SPD Wishart draw in {SPD_RETRIES} attempts")


def _scaled_model(direction: np.ndarray, v: CovMatrix, g: float) -> VarModel:
    return VarModel((g * direction,), v)


def solve_g_var(a_raw: np.ndarray, v: CovMatrix, target_tmi: float) -> float:
    """Spectral radius g in (0, 1 - 1e-6) at which (g / rho) a_raw reaches target_tmi"""
    if not target_tmi > 0:
        raise ValueError(f"target TMI must be positive, got {target_tmi}")
    a_raw = np.atleast_2d(np.asarray(a_raw, dtype=float))
    rho = spectral_radius(a_raw)
    if rho <= 1e-12:
        raise ZeroDynamics("coefficient draw has zero spectral radius")
    direction = a_raw / rho

    def root_fn(g: float) -> float:
        return var_tmi(_scaled_model(direction, v, g)) - target_tmi

    ceiling = root_fn(G_VAR_CAP) + target_tmi
    if ceiling < target_tmi:
        raise TargetUnreachable(
            f"TMI {target_tmi:.4g} exceeds {ceiling:.4g} reachable below the stability cap"
        )
    try:
        g = brentq(root_fn, 0.0, G_VAR_CAP, xtol=1e-15, maxiter=200)
    except RuntimeError as e:
        raise BracketFailure(f"spectral-radius search did not converge: {e}")

    residual = abs(root_fn(g))
    if residual > ROOT_TOL:
        raise BracketFailure(f"spectral radius {g:.9g} leaves TMI residual {residual:.3e}")
    return float(g)


def draw_var_null(part: Partition, target_tmi: float, index: int,
                  rng: np.random.Generator) -> PidAtoms:
    a_raw, v = sample_null_var(part.n_vars, rng)
    g = solve_g_var(a_raw, v, target_tmi)
    model = _scaled_model(a_raw / spectral_radius(a_raw), v, g)
    try:
        return var_pid(model, part)
    except (NegativeInformation, InconsistentInformation) as e:
        raise SampleRejected(f"ill-conditioned null draw: {e}")


def build_var_null_ensemble(target_tmi: float, part: Partition, n: int, seed: int,
                            workers: int = 1, retry_budget: int = DEFAULTS.retry_budget) -> NullEnsemble:
    """VAR(1) nulls of matching dimension, partitioned like the observed model"""
    draw = partial(draw_var_null, part, target_tmi)
    return build_ensemble(draw, target_tmi, n, seed, "var", workers, retry_budget)


def numit_normalize_var(m: VarModel, part: Partition, n_samples: int = DEFAULTS.n_null,
                        seed: int = 0, workers: int = 1,
                        retry_budget: int = DEFAULTS.retry_budget) -> NormalizedAtoms:
    tmi = var_tmi(m)
    if tmi < ZERO_TMI:
        raise ZeroTmi(f"VAR model TMI {tmi:.3e} is zero, nothing to normalise")
    atoms = var_pid(m, part)
    ensemble = build_var_null_ensemble(tmi, part, n_samples, seed, workers, retry_budget)
    return normalize_against(atoms, ensemble)
