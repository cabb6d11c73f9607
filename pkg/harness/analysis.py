#!/usr/bin/env python3
"""
Group Statistics
Interaction regression between normalisations and one-sample t summaries
"""

import logging
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np
from scipy import stats

from core.exceptions import DegenerateDesign, LengthMismatch, NonFiniteData, TooFewSamples

logger = logging.getLogger(__name__)

COEFFICIENT_NAMES = ("intercept", "a", "m", "a_x_m")
MIN_PAIRS = 4
VARIANCE_TOL = 1e-12
ZERO_COEF_TOL = 1e-12


@dataclass(frozen=True)
class SummaryStats:
    n: int
    mean: float
    std: float
    t: float
    p: float

    def as_dict(self) -> Dict[str, float]:
        return {"n": self.n, "mean": self.mean, "std": self.std, "t": self.t, "p": self.p}


@dataclass(frozen=True)
class RegressionFit:
    """b = beta0 + beta1 a + beta2 m + beta3 a m on standardised inputs, m = 1 for NuMIT"""

    beta: Tuple[float, float, float, float]
    std_err: Tuple[float, float, float, float]
    t_values: Tuple[float, float, float, float]
    p_values: Tuple[float, float, float, float]
    r_nmi: float
    r_numit: float
    n: int
    standardize: str = "group"

    def coefficient_table(self) -> Dict[str, list]:
        return {
            "term": list(COEFFICIENT_NAMES),
            "beta": list(self.beta),
            "std_err": list(self.std_err),
            "t": list(self.t_values),
            "p": list(self.p_values),
        }


def _finite_vector(values, name: str) -> np.ndarray:
    v = np.asarray(values, dtype=float).ravel()
    if not np.all(np.isfinite(v)):
        raise NonFiniteData(f"{name} has non-finite values")
    return v


def _degenerate_t(estimate: float) -> Tuple[float, float]:
    """t and p when the standard error is zero"""
    if abs(estimate) <= ZERO_COEF_TOL:
        return 0.0, 1.0
    return float(np.copysign(np.inf, estimate)), 0.0


def summary_stats(values: Sequence[float]) -> SummaryStats:
    """Mean, sample std and a two-sided one-sample t-test against zero"""
    v = _finite_vector(values, "values")
    if v.size < 2:
        raise TooFewSamples(f"t-test needs at least 2 values, got {v.size}")
    mean = float(v.mean())
    std = float(v.std(ddof=1))
    if std == 0.0:
        t, p = _degenerate_t(mean)
    else:
        result = stats.ttest_1samp(v, 0.0)
        t, p = float(result.statistic), float(result.pvalue)
    return SummaryStats(n=int(v.size), mean=mean, std=std, t=t, p=p)


def pearson_r(u: Sequence[float], v: Sequence[float]) -> float:
    u = _finite_vector(u, "u")
    v = _finite_vector(v, "v")
    if u.size != v.size:
        raise LengthMismatch(f"cannot correlate {u.size} with {v.size} values")
    if u.size < 2 or u.std() <= VARIANCE_TOL or v.std() <= VARIANCE_TOL:
        raise DegenerateDesign("correlation needs two non-constant vectors")
    return float(stats.pearsonr(u, v)[0])


def _zscore(v: np.ndarray, name: str) -> np.ndarray:
    std = v.std(ddof=1)
    if not std > VARIANCE_TOL * max(1.0, float(np.abs(v).max())):
        raise DegenerateDesign(f"{name} has zero variance")
    return (v - v.mean()) / std


def interaction_regression(a_nmi: Sequence[float], a_numit: Sequence[float],
                           b_nmi: Sequence[float], b_numit: Sequence[float],
                           standardize: str = "group") -> RegressionFit:
    """Does the a-b relationship strengthen when moving from NMI to NuMIT?

    Each normalisation group is standardised on its own ("group") or the two
    stacked groups are standardised together ("global").
    """
    columns = {
        "a_nmi": _finite_vector(a_nmi, "a_nmi"),
        "a_numit": _finite_vector(a_numit, "a_numit"),
        "b_nmi": _finite_vector(b_nmi, "b_nmi"),
        "b_numit": _finite_vector(b_numit, "b_numit"),
    }
    lengths = {name: v.size for name, v in columns.items()}
    if len(set(lengths.values())) != 1:
        raise LengthMismatch(f"paired columns differ in length: {lengths}")
    n = lengths["a_nmi"]
    if n < MIN_PAIRS:
        raise DegenerateDesign(f"interaction regression needs at least {MIN_PAIRS} pairs, got {n}")

    if standardize == "group":
        z = {name: _zscore(v, name) for name, v in columns.items()}
        a = np.concatenate([z["a_nmi"], z["a_numit"]])
        b = np.concatenate([z["b_nmi"], z["b_numit"]])
    elif standardize == "global":
        a = _zscore(np.concatenate([columns["a_nmi"], columns["a_numit"]]), "a")
        b = _zscore(np.concatenate([columns["b_nmi"], columns["b_numit"]]), "b")
    else:
        raise ValueError(f"standardize must be 'group' or 'global', got {standardize!r}")

    m = np.repeat([0.0, 1.0], n)
    design = np.column_stack([np.ones(2 * n), a, m, a * m])
    if np.linalg.matrix_rank(design) < design.shape[1]:
        raise DegenerateDesign("interaction design matrix is rank deficient")

    beta, *_ = np.linalg.lstsq(design, b, rcond=None)
    resid = b - design @ beta
    dof = design.shape[0] - design.shape[1]
    sigma2 = float(resid @ resid) / dof
    std_err = np.sqrt(np.clip(np.diag(sigma2 * np.linalg.inv(design.T @ design)), 0.0, None))

    t_values, p_values = [], []
    for estimate, se in zip(beta, std_err):
        if se <= 0.0:
            t, p = _degenerate_t(float(estimate))
        else:
            t = float(estimate / se)
            p = float(2.0 * stats.t.sf(abs(t), dof))
        t_values.append(t)
        p_values.append(p)

    fit = RegressionFit(
        beta=tuple(float(x) for x in beta),
        std_err=tuple(float(x) for x in std_err),
        t_values=tuple(t_values),
        p_values=tuple(p_values),
        r_nmi=pearson_r(columns["a_nmi"], columns["b_nmi"]),
        r_numit=pearson_r(columns["a_numit"], columns["b_numit"]),
        n=n,
        standardize=standardize,
    )
    logger.info(f"Interaction beta3={fit.beta[3]:.4f} (p={fit.p_values[3]:.3g}) over {n} pairs")
    return fit
