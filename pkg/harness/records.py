#!/usr/bin/env python3
"""
Result Records
Sweep rows, CSV tables, time-series files and run sidecars
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from core.ensemble import NormalizedAtoms
from core.exceptions import DataFormatError, NonFiniteData
from core.pid import ATOM_NAMES, AtomShares, PidAtoms
from core.var_model import TimeSeries

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.9g"
SUM_TOL = 1e-9

RAW_COLUMNS = ["tmi", *ATOM_NAMES]
NMI_COLUMNS = [f"{atom}_nmi" for atom in ATOM_NAMES]
NUMIT_COLUMNS = [f"{atom}_numit" for atom in ATOM_NAMES]
ATOM_COLUMNS = RAW_COLUMNS + NMI_COLUMNS + NUMIT_COLUMNS
REGRESSION_COLUMNS = ["a_nmi", "a_numit", "b_nmi", "b_numit"]


@dataclass(frozen=True)
class SweepRow:
    """Raw atoms, TMI shares and NuMIT quantiles at one parameter value"""

    param: float
    atoms: PidAtoms
    shares: Optional[AtomShares] = None
    quantiles: Optional[NormalizedAtoms] = None
    n_failed: int = 0

    def check(self) -> None:
        total = sum(self.atoms.atoms())
        if abs(total - self.atoms.tmi) > SUM_TOL * max(1.0, self.atoms.tmi):
            raise ValueError(f"atoms sum to {total!r}, TMI is {self.atoms.tmi!r}")
        if self.shares is not None:
            share_sum = sum(self.shares.as_dict().values())
            if abs(share_sum - 1.0) > SUM_TOL:
                raise ValueError(f"NMI shares sum to {share_sum!r}")
        if self.quantiles is not None:
            for name, q in self.quantiles.as_dict().items():
                if not 0.0 <= q <= 1.0:
                    raise ValueError(f"{name} quantile {q} outside [0, 1]")

    def as_record(self, param_name: str) -> Dict[str, float]:
        record: Dict[str, float] = {param_name: float(self.param), **self.atoms.as_dict()}
        shares = self.shares.as_dict() if self.shares is not None else {}
        quantiles = self.quantiles.as_dict() if self.quantiles is not None else {}
        for atom in ATOM_NAMES:
            record[f"{atom}_nmi"] = shares.get(atom, np.nan)
            record[f"{atom}_numit"] = quantiles.get(atom, np.nan)
        return record


def rows_to_frame(rows: Sequence[SweepRow], param_name: str) -> pd.DataFrame:
    for row in rows:
        row.check()
    return pd.DataFrame(
        [row.as_record(param_name) for row in rows], columns=[param_name, *ATOM_COLUMNS]
    )


def write_table(frame: pd.DataFrame, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def sibling_path(out, suffix: str) -> Path:
    """results/run.csv + '_summary' -> results/run_summary.csv"""
    out = Path(out)
    return out.with_name(f"{out.stem}{suffix}{out.suffix or '.csv'}")


def write_sidecar(out, payload: Dict[str, Any]) -> Path:
    path = Path(out)
    path = path.with_name(path.name + ".meta.json")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")
    return path


def read_time_series(path, sample_rate: Optional[float] = None) -> TimeSeries:
    """Long-format CSV: epoch, t, v0, v1, ..."""
    path = Path(path)
    if not path.is_file():
        raise DataFormatError(f"time-series file not found: {path}")
    try:
        frame = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataFormatError(f"{path}: unreadable CSV: {e}")

    value_cols = [c for c in frame.columns if c not in ("epoch", "t")]
    expected = [f"v{i}" for i in range(len(value_cols))]
    if list(frame.columns[:2]) != ["epoch", "t"] or value_cols != expected or not value_cols:
        raise DataFormatError(f"{path}: header must be epoch,t,v0,v1,... got {list(frame.columns)}")
    try:
        values = frame[value_cols].astype(float)
    except ValueError as e:
        raise DataFormatError(f"{path}: non-numeric values: {e}")
    if not np.all(np.isfinite(values.to_numpy())):
        raise NonFiniteData(f"{path}: missing or non-finite values")

    frame = frame.sort_values(["epoch", "t"], kind="mergesort")
    epochs = tuple(group[value_cols].to_numpy(dtype=float) for _, group in frame.groupby("epoch", sort=True))
    logger.info(f"Loaded {len(epochs)} epochs of {len(value_cols)} variables from {path}")
    return TimeSeries(epochs, sample_rate)


def time_series_frame(ts: TimeSeries) -> pd.DataFrame:
    frames: List[pd.DataFrame] = []
    for k, epoch in enumerate(ts.epochs):
        frame = pd.DataFrame(epoch, columns=[f"v{i}" for i in range(ts.n_vars)])
        frame.insert(0, "t", np.arange(epoch.shape[0]))
        frame.insert(0, "epoch", k)
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)


def write_time_series(ts: TimeSeries, path) -> Path:
    return write_table(time_series_frame(ts), path)


def read_regression_input(path) -> pd.DataFrame:
    path = Path(path)
    if not path.is_file():
        raise DataFormatError(f"regression input not found: {path}")
    frame = pd.read_csv(path)
    missing = [c for c in REGRESSION_COLUMNS if c not in frame.columns]
    if missing:
        raise DataFormatError(f"{path}: missing columns {missing}")
    return frame[REGRESSION_COLUMNS].astype(float)
