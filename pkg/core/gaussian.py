#!/usr/bin/env python3
"""
Linear-Gaussian Systems
Covariance algebra and mutual information for the channel T = A S + sqrt(g) eps
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, Tuple

import numpy as np
import scipy.linalg

from .exceptions import (
    CholeskyFailure,
    EmptyIndexSet,
    NegativeInformation,
    NonFiniteData,
    OverlappingIndexSets,
)

logger = logging.getLogger(__name__)

SYMMETRY_RTOL = 1e-12
JITTER_SCALE = 1e-10
MI_CLAMP_TOL = 1e-9


def _cholesky(m: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor, retried once with a trace-scaled diagonal jitter"""
    try:
        chol = scipy.linalg.cholesky(m, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        dim = m.shape[0]
        jitter = JITTER_SCALE * np.trace(m) / dim
        if not jitter > 0:
            raise CholeskyFailure(f"matrix of dim {dim} has non-positive trace")
        logger.debug(f"Cholesky failed, retrying with jitter {jitter:.3e}")
        try:
            chol = scipy.linalg.cholesky(
                m + jitter * np.eye(dim), lower=True, check_finite=False
            )
        except np.linalg.LinAlgError as e:
            raise CholeskyFailure(f"matrix of dim {dim} is not positive definite: {e}")

    pivots = np.diag(chol)
    if not np.all(np.isfinite(pivots)) or np.any(pivots <= 0):
        raise CholeskyFailure("non-positive Cholesky pivot")
    return chol


@dataclass(frozen=True, eq=False)
class CovMatrix:
    """Symmetric positive-definite matrix with its Cholesky factor"""

    entries: np.ndarray
    chol: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        m = np.array(self.entries, dtype=float)
        if m.ndim == 0:
            m = m.reshape(1, 1)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise ValueError(f"covariance must be a non-empty square matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise NonFiniteData("covariance has non-finite entries")

        scale = max(float(np.max(np.abs(m))), np.finfo(float).tiny)
        if np.max(np.abs(m - m.T)) > SYMMETRY_RTOL * scale:
            raise ValueError("covariance is not symmetric")
        m = 0.5 * (m + m.T)
        m.setflags(write=False)

        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "chol", _cholesky(m))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def sub(self, idx: "IndexSet") -> "CovMatrix":
        """Principal submatrix over an index set"""
        sel = list(idx.indices)
        return CovMatrix(self.entries[np.ix_(sel, sel)])

    def scaled(self, c: float) -> "CovMatrix":
        return CovMatrix(c * self.entries)


@dataclass(frozen=True)
class IndexSet:
    """Strictly increasing indices into a joint covariance"""

    indices: Tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(i < 0 for i in idx):
            raise ValueError(f"negative index in {idx}")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError(f"indices must be strictly increasing, got {idx}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def of(cls, values: Iterable[int]) -> "IndexSet":
        return cls(tuple(sorted(set(int(v) for v in values))))

    @classmethod
    def span(cls, start: int, stop: int) -> "IndexSet":
        return cls(tuple(range(start, stop)))

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def isdisjoint(self, other: "IndexSet") -> bool:
        return set(self.indices).isdisjoint(other.indices)

    def union(self, other: "IndexSet") -> "IndexSet":
        return IndexSet.of(self.indices + other.indices)


@dataclass(frozen=True, eq=False)
class GaussianPidSystem:
    """Source-to-target channel T = A S + sqrt(g) eps with X = first d_x sources"""

    a: np.ndarray
    sigma_s: CovMatrix
    sigma_eps: CovMatrix
    g: float
    d_x: int
    d_y: int

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        if a.ndim == 1:
            a = a.reshape(1, -1)
        if a.ndim != 2:
            raise ValueError(f"coefficient matrix must be 2-D, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NonFiniteData("coefficient matrix has non-finite entries")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

        if not (np.isfinite(self.g) and self.g > 0):
            raise ValueError(f"noise gain must be positive, got {self.g}")
        if self.d_x < 1 or self.d_y < 1:
            raise ValueError(f"source partition must be non-empty, got {self.d_x}/{self.d_y}")
        if self.d_x + self.d_y != self.sigma_s.dim:
            raise ValueError(
                f"partition {self.d_x}+{self.d_y} does not match source dim {self.sigma_s.dim}"
            )
        if a.shape != (self.sigma_eps.dim, self.sigma_s.dim):
            raise ValueError(
                f"A has shape {a.shape}, expected ({self.sigma_eps.dim}, {self.sigma_s.dim})"
            )

    @classmethod
    def build(cls, a, sigma_s, sigma_eps, g: float = 1.0, d_x: int = 1) -> "GaussianPidSystem":
        """Construct from plain arrays; d_y is whatever remains of the sources"""
        sigma_s = sigma_s if isinstance(sigma_s, CovMatrix) else CovMatrix(np.atleast_2d(sigma_s))
        sigma_eps = (
            sigma_eps if isinstance(sigma_eps, CovMatrix) else CovMatrix(np.atleast_2d(sigma_eps))
        )
        return cls(a, sigma_s, sigma_eps, float(g), int(d_x), sigma_s.dim - int(d_x))

    @property
    def d_s(self) -> int:
        return self.d_x + self.d_y

    @property
    def d_t(self) -> int:
        return self.sigma_eps.dim

    @property
    def x_index(self) -> IndexSet:
        return IndexSet.span(0, self.d_x)

    @property
    def y_index(self) -> IndexSet:
        return IndexSet.span(self.d_x, self.d_s)

    @property
    def s_index(self) -> IndexSet:
        return IndexSet.span(0, self.d_s)

    @property
    def t_index(self) -> IndexSet:
        return IndexSet.span(self.d_s, self.d_s + self.d_t)

    def with_gain(self, g: float) -> "GaussianPidSystem":
        return replace(self, g=float(g))


def clamp_information(value: float) -> float:
    """Round values in (-MI_CLAMP_TOL, 0) up to zero; anything lower is an error"""
    if value < 0:
        if value < -MI_CLAMP_TOL:
            raise NegativeInformation(f"information {value:.3e} nat is below rounding tolerance")
        return 0.0
    return float(value)


def spd_logdet(m: CovMatrix) -> float:
    """log|m| from the Cholesky diagonal"""
    return float(2.0 * np.sum(np.log(np.diag(m.chol))))


def target_covariance(sys: GaussianPidSystem) -> CovMatrix:
    """Sigma_T = A Sigma_S A^T + g Sigma_eps"""
    a = sys.a
    return CovMatrix(a @ sys.sigma_s.entries @ a.T + sys.g * sys.sigma_eps.entries)


def joint_covariance(sys: GaussianPidSystem) -> CovMatrix:
    """Covariance of (S, T) assembled blockwise"""
    s = sys.sigma_s.entries
    cross = sys.a @ s
    joint = np.block([[s, cross.T], [cross, target_covariance(sys).entries]])
    return CovMatrix(joint)


def gaussian_mi(joint: CovMatrix, u: IndexSet, v: IndexSet) -> float:
    """I(U;V) in nats for jointly Gaussian variables"""
    if len(u) == 0 or len(v) == 0:
        raise EmptyIndexSet("mutual information needs two non-empty index sets")
    if not u.isdisjoint(v):
        raise OverlappingIndexSets(f"{u.indices} and {v.indices} overlap")
    top = max(u.indices[-1], v.indices[-1])
    if top >= joint.dim:
        raise ValueError(f"index {top} out of range for joint of dim {joint.dim}")

    mi = 0.5 * (
        spd_logdet(joint.sub(u)) + spd_logdet(joint.sub(v)) - spd_logdet(joint.sub(u.union(v)))
    )
    return clamp_information(mi)


def system_tmi(sys: GaussianPidSystem) -> float:
    """I(S;T) = 1/2 log(|Sigma_T| / |g Sigma_eps|)"""
    noise_logdet = sys.d_t * np.log(sys.g) + spd_logdet(sys.sigma_eps)
    tmi = 0.5 * (spd_logdet(target_covariance(sys)) - noise_logdet)
    return clamp_information(tmi)
