#!/usr/bin/env python3
"""
Null Ensembles
Seeded substreams, Wishart sampling, order-preserving parallel maps and
quantile normalisation shared by the Gaussian, VAR and discrete null models
"""

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

from .exceptions import EmptyEnsemble, SampleRejected, SamplingExhausted
from .pid import ATOM_NAMES, PidAtoms

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

FAMILIES = ("gaussian", "var", "discrete")
TMI_RTOL = 1e-6
TMI_ATOL = 1e-9
SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class NumitSettings:
    """Library defaults for null-model normalisation"""

    n_null: int = 1000
    retry_budget: int = 10
    discrete_retry_budget: int = 500
    alpha: float = 1.0
    gate_sampling: str = "uniform"
    histogram_bins: int = 50


DEFAULTS = NumitSettings()


def substream(seed: int, index: int, attempt: int = 0) -> np.random.Generator:
    """Independent generator for one (sample, attempt) pair under a master seed"""
    seq = np.random.SeedSequence(entropy=int(seed) & SEED_MASK, spawn_key=(int(index), int(attempt)))
    return np.random.default_rng(seq)


def wishart_bartlett(rng: np.random.Generator, dim: int, df: Optional[float] = None,
                     scale: Optional[np.ndarray] = None) -> np.ndarray:
    """Wishart draw W_dim(scale, df) via the Bartlett decomposition"""
    df = float(dim if df is None else df)
    if df <= dim - 1:
        raise ValueError(f"Wishart needs df > dim - 1, got df={df}, dim={dim}")

    bartlett = np.zeros((dim, dim))
    bartlett[np.diag_indices(dim)] = np.sqrt(rng.chisquare(df - np.arange(dim)))
    lower = np.tril_indices(dim, k=-1)
    bartlett[lower] = rng.standard_normal(len(lower[0]))

    if scale is not None:
        bartlett = np.linalg.cholesky(scale) @ bartlett
    return bartlett @ bartlett.T


def parallel_map(fn: Callable[[T], R], items: Sequence[T], workers: int = 1) -> List[R]:
    """Map in index order; a single worker runs in-process"""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    chunksize = max(1, len(items) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))


@dataclass(frozen=True)
class NullEnsemble:
    """N PID-atom samples drawn at one target TMI"""

    target_tmi: float
    samples: Tuple[PidAtoms, ...]
    family: str
    seed: int
    n_requested: int
    n_failed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown null family {self.family!r}")
        if len(self.samples) != self.n_requested:
            raise ValueError(f"ensemble holds {len(self.samples)} of {self.n_requested} samples")

    def values(self, atom: str) -> np.ndarray:
        return np.array([getattr(s, atom) for s in self.samples])

    def means(self) -> Dict[str, float]:
        return {atom: float(np.mean(self.values(atom))) for atom in ATOM_NAMES}


@dataclass(frozen=True)
class EnsembleMeta:
    family: str
    n: int
    seed: int
    target_tmi: float
    n_failed: int = 0


@dataclass(frozen=True)
class NormalizedAtoms:
    """Quantiles of an observed system's atoms within its null ensemble"""

    red_q: float
    unx_q: float
    uny_q: float
    syn_q: float
    ensemble_meta: EnsembleMeta

    def __post_init__(self):
        for name, q in self.as_dict().items():
            if not 0.0 <= q <= 1.0:
                raise ValueError(f"{name} quantile {q} outside [0, 1]")

    def as_dict(self) -> Dict[str, float]:
        return {"red": self.red_q, "un_x": self.unx_q, "un_y": self.uny_q, "syn": self.syn_q}


def quantile_of(value: float, null_values: Iterable[float]) -> float:
    """Midpoint-rule quantile: (#below + #tied / 2) / N"""
    nulls = np.asarray(list(null_values), dtype=float)
    if nulls.size == 0:
        raise EmptyEnsemble("quantile of an empty null distribution")
    below = np.count_nonzero(nulls < value)
    tied = np.count_nonzero(nulls == value)
    return float((below + 0.5 * tied) / nulls.size)


def normalize_against(atoms: PidAtoms, ensemble: NullEnsemble) -> NormalizedAtoms:
    q = {atom: quantile_of(getattr(atoms, atom), ensemble.values(atom)) for atom in ATOM_NAMES}
    meta = EnsembleMeta(
        family=ensemble.family,
        n=ensemble.n_requested,
        seed=ensemble.seed,
        target_tmi=ensemble.target_tmi,
        n_failed=ensemble.n_failed,
    )
    return NormalizedAtoms(q["red"], q["un_x"], q["un_y"], q["syn"], meta)


def _draw_with_retries(draw: Callable[[int, np.random.Generator], PidAtoms], seed: int,
                       target_tmi: float, retry_budget: int, index: int) -> Tuple[PidAtoms, int]:
    """One ensemble member: resample rejected draws until the budget runs out"""
    failed = 0
    last_error: Optional[Exception] = None
    for attempt in range(retry_budget + 1):
        try:
            atoms = draw(index, substream(seed, index, attempt))
        except SampleRejected as e:
            last_error = e
        else:
            if abs(atoms.tmi - target_tmi) <= max(TMI_RTOL * target_tmi, TMI_ATOL):
                return atoms, failed
            last_error = SampleRejected(f"sample TMI {atoms.tmi:.9g} misses target {target_tmi:.9g}")
        failed += 1
        logger.debug(f"Null sample {index} attempt {attempt} rejected: {last_error}")

    raise SamplingExhausted(
        f"null sample {index} failed {failed} times at TMI {target_tmi:.6g}: {last_error}"
    )


def build_ensemble(draw: Callable[[int, np.random.Generator], PidAtoms], target_tmi: float,
                   n: int, seed: int, family: str, workers: int = 1,
                   retry_budget: int = DEFAULTS.retry_budget) -> NullEnsemble:
    """Draw n null samples at target_tmi; results do not depend on the worker count"""
    if n < 1:
        raise ValueError(f"ensemble size must be positive, got {n}")
    if not target_tmi > 0:
        raise ValueError(f"target TMI must be positive, got {target_tmi}")

    started = time.perf_counter()
    job = partial(_draw_with_retries, draw, seed, target_tmi, retry_budget)
    results = parallel_map(job, range(n), workers)

    samples = tuple(atoms for atoms, _ in results)
    n_failed = sum(failed for _, failed in results)
    logger.info(
        f"Built {family} null ensemble: N={n}, TMI={target_tmi:.4f} nat, "
        f"resampled={n_failed}, {time.perf_counter() - started:.2f}s"
    )
    return NullEnsemble(
        target_tmi=float(target_tmi),
        samples=samples,
        family=family,
        seed=int(seed),
        n_requested=n,
        n_failed=n_failed,
    )
