#!/usr/bin/env python3
"""
Experiment Drivers
Noise sweeps, TMI sweeps over the null family and the random-subset VAR pipeline
"""

import logging
import math
from dataclasses import dataclass
from functools import partial
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from core.discrete import DiscreteSystem, numit_normalize_discrete, pid_discrete
from core.ensemble import DEFAULTS, parallel_map
from core.exceptions import NumitError, TooFewSamples, TooFewVariables, UnstableSystem
from core.gaussian import GaussianPidSystem
from core.numit import build_null_ensemble, numit_normalize
from core.pid import ATOM_NAMES, ZERO_TMI, PidAtoms, nmi_normalize, pid_gaussian
from core.var_model import Partition, TimeSeries, VarModel, fit_var, numit_normalize_var, var_pid

from .analysis import summary_stats
from .records import ATOM_COLUMNS, SweepRow

logger = logging.getLogger(__name__)

PIPELINE_STREAM = 0x5EB5E7


def _row(param: float, atoms: PidAtoms, normalize) -> SweepRow:
    """Shares and quantiles are left empty when the TMI vanishes"""
    if atoms.tmi < ZERO_TMI:
        logger.warning(f"TMI is zero at {param:.6g}, skipping NMI and NuMIT")
        return SweepRow(param, atoms)
    quantiles = normalize() if normalize is not None else None
    n_failed = quantiles.ensemble_meta.n_failed if quantiles is not None else 0
    return SweepRow(param, atoms, nmi_normalize(atoms), quantiles, n_failed)


def gaussian_row(sys: GaussianPidSystem, param: float, n_null: int, seed: int, workers: int = 1,
                 retry_budget: int = DEFAULTS.retry_budget, normalize: bool = True) -> SweepRow:
    job = partial(numit_normalize, sys, n_null, seed, workers, retry_budget) if normalize else None
    return _row(param, pid_gaussian(sys), job)


def discrete_row(sys: DiscreteSystem, n_null: int, seed: int, workers: int = 1,
                 alpha: float = DEFAULTS.alpha, gate_sampling: str = DEFAULTS.gate_sampling,
                 retry_budget: int = DEFAULTS.discrete_retry_budget) -> SweepRow:
    job = partial(numit_normalize_discrete, sys, n_null, alpha, seed, workers, gate_sampling, retry_budget)
    return _row(sys.p_eps, pid_discrete(sys), job)


def var_row(m: VarModel, part: Partition, n_null: int, seed: int, workers: int = 1,
            retry_budget: int = DEFAULTS.retry_budget, normalize: bool = True) -> SweepRow:
    job = partial(numit_normalize_var, m, part, n_null, seed, workers, retry_budget) if normalize else None
    return _row(float(m.order), var_pid(m, part), job)


def noise_sweep(cfg, seed: int, workers: int = 1) -> List[SweepRow]:
    """One row per grid point; every row reuses the run seed"""
    rows: List[SweepRow] = []
    for k, value in enumerate(cfg.grid):
        if cfg.family == "gaussian":
            sys = cfg.gaussian.to_system(g=value)
            row = gaussian_row(sys, value, cfg.n_null, seed, workers, cfg.retry_budget)
        else:
            sys = cfg.discrete.to_system(p_eps=value)
            row = discrete_row(sys, cfg.n_null, seed, workers, cfg.alpha, cfg.gate_sampling,
                               cfg.discrete_retry_budget)
        logger.info(f"Sweep point {k + 1}/{len(cfg.grid)}: {cfg.param_name}={value:.6g}, "
                    f"TMI={row.atoms.tmi:.4f} nat")
        rows.append(row)
    return rows


@dataclass(frozen=True)
class TmiSweepResult:
    means: pd.DataFrame
    histograms: pd.DataFrame
    n_failed: int


def tmi_sweep(cfg, seed: int, workers: int = 1) -> TmiSweepResult:
    """Null-family atom means, share means and histograms across a TMI grid"""
    mean_rows: List[Dict[str, float]] = []
    hist_rows: List[Dict[str, float]] = []
    n_failed = 0
    for tmi in cfg.tmi_grid:
        ensemble = build_null_ensemble(tmi, cfg.d_x, cfg.d_y, cfg.d_t, cfg.n_samples, seed,
                                       workers, cfg.retry_budget)
        n_failed += ensemble.n_failed
        row: Dict[str, float] = {"tmi": float(tmi)}
        for atom in ATOM_NAMES:
            values = ensemble.values(atom)
            row[f"{atom}_mean"] = float(values.mean())
            row[f"{atom}_share"] = float(values.mean() / tmi)
            counts, edges = np.histogram(values, bins=cfg.histogram_bins, range=(0.0, tmi))
            hist_rows.extend(
                {"tmi": float(tmi), "atom": atom, "bin_left": float(lo), "bin_right": float(hi),
                 "count": int(c)}
                for lo, hi, c in zip(edges[:-1], edges[1:], counts)
            )
        mean_rows.append(row)
        logger.info(f"TMI {tmi:.4g}: mean atoms " +
                    ", ".join(f"{a}={row[f'{a}_mean']:.4f}" for a in ATOM_NAMES))
    return TmiSweepResult(pd.DataFrame(mean_rows), pd.DataFrame(hist_rows), n_failed)


@dataclass(frozen=True)
class PipelineResult:
    subsets: pd.DataFrame
    summary: pd.DataFrame
    n_skipped: int
    n_zero_tmi: int
    n_failed: int


def split_subset(chosen: np.ndarray) -> Tuple[List[int], List[int]]:
    """X takes the first ceil(k/2) of the drawn variables"""
    half = math.ceil(len(chosen) / 2)
    return sorted(int(v) for v in chosen[:half]), sorted(int(v) for v in chosen[half:])


def _subset_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(PIPELINE_STREAM, index)))


def summarize_columns(frame: pd.DataFrame, columns: List[str]) -> pd.DataFrame:
    rows = []
    for column in columns:
        values = frame[column].dropna().to_numpy(dtype=float) if column in frame else np.array([])
        try:
            rows.append({"column": column, **summary_stats(values).as_dict()})
        except TooFewSamples:
            rows.append({"column": column, "n": int(values.size), "mean": np.nan,
                         "std": np.nan, "t": np.nan, "p": np.nan})
    return pd.DataFrame(rows, columns=["column", "n", "mean", "std", "t", "p"])


@dataclass(frozen=True)
class SubsetFit:
    index: int
    x_vars: List[int]
    y_vars: List[int]
    model: VarModel
    part: Partition
    null_seed: int


def _fit_subset(ts: TimeSeries, subset_size: int, epochs: int, p: int, seed: int, index: int) -> SubsetFit:
    rng = _subset_rng(seed, index)
    chosen = rng.choice(ts.n_vars, size=subset_size, replace=False)
    x_vars, y_vars = split_subset(chosen)
    n_epochs = len(ts.epochs)
    picked = sorted(rng.choice(n_epochs, size=epochs, replace=False)) if epochs < n_epochs else None
    null_seed = int(rng.integers(2 ** 63))

    variables = sorted(int(v) for v in chosen)
    local = {v: k for k, v in enumerate(variables)}
    part = Partition.of([local[v] for v in x_vars], subset_size)
    model = fit_var(ts.select(variables, picked), p)
    if not model.is_stable():
        raise UnstableSystem("fitted model is not stable")
    return SubsetFit(index, x_vars, y_vars, model, part, null_seed)


def _normalize_subset(n_null: int, retry_budget: int, fit: SubsetFit) -> Tuple[Optional[SweepRow], str]:
    """Null ensemble of one fitted subset; a NumitError comes back as its message"""
    try:
        return var_row(fit.model, fit.part, n_null, fit.null_seed, 1, retry_budget), ""
    except NumitError as e:
        return None, f"{type(e).__name__}: {e}"


def pipeline_subsets(ts: TimeSeries, subset_size: int, n_subsets: int, epochs: int, p: int,
                     n_null: int, seed: int, workers: int = 1,
                     retry_budget: int = DEFAULTS.retry_budget) -> PipelineResult:
    """Random variable subsets, random source split, epoch resample, VAR(p) fit and PID

    Fits run in order in the caller; the null ensembles of all fitted subsets
    share one worker pool, one subset per task.
    """
    if subset_size < 2 or subset_size > ts.n_vars:
        raise TooFewVariables(f"subset of {subset_size} needs between 2 and {ts.n_vars} variables")

    fits: List[SubsetFit] = []
    skipped = zero_tmi = failed = 0
    for i in range(n_subsets):
        try:
            fits.append(_fit_subset(ts, subset_size, epochs, p, seed, i))
        except NumitError as e:
            skipped += 1
            logger.warning(f"Subset {i} skipped: {type(e).__name__}: {e}")

    outcomes = parallel_map(partial(_normalize_subset, n_null, retry_budget), fits, workers)

    records: List[Dict[str, object]] = []
    for fit, (row, error) in zip(fits, outcomes):
        if row is None:
            skipped += 1
            logger.warning(f"Subset {fit.index} skipped: {error}")
            continue
        if row.quantiles is None:
            zero_tmi += 1
        failed += row.n_failed
        record = row.as_record("subset")
        record["subset"] = fit.index
        record["x_vars"] = ";".join(str(v) for v in fit.x_vars)
        record["y_vars"] = ";".join(str(v) for v in fit.y_vars)
        records.append(record)

    subsets = pd.DataFrame(records, columns=["subset", "x_vars", "y_vars", *ATOM_COLUMNS])
    logger.info(f"Pipeline: {len(records)}/{n_subsets} subsets fitted, {skipped} skipped, "
                f"{zero_tmi} with zero TMI")
    return PipelineResult(subsets, summarize_columns(subsets, ATOM_COLUMNS), skipped, zero_tmi, failed)
