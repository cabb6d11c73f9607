#!/usr/bin/env python3
"""
Run Configuration
JSON run documents validated with pydantic, plus seed and worker resolution
"""

import json
import logging
import os
from pathlib import Path
from typing import List, Literal, Optional, Type, TypeVar

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from core.discrete import GATE_SAMPLING_MODES, DiscreteSystem, Gate, JointPmf
from core.ensemble import DEFAULTS
from core.exceptions import ConfigError
from core.gaussian import GaussianPidSystem
from core.presets import DISCRETE_PRESETS, GAUSSIAN_PRESETS, discrete_preset, gaussian_preset, random_gaussian_system
from core.var_model import Partition, VarModel

logger = logging.getLogger(__name__)

SEED_ENV = "NUMIT_SEED"
WORKERS_ENV = "NUMIT_WORKERS"
LOG_LEVEL_ENV = "NUMIT_LOG_LEVEL"

Matrix = List[List[float]]
C = TypeVar("C", bound="RunConfig")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class RandomSystemSpec(_Strict):
    d_x: int = Field(ge=1)
    d_y: int = Field(ge=1)
    d_t: int = Field(ge=1)
    seed: int = Field(default=0, ge=0)


class GaussianSystemSpec(_Strict):
    """One of: a named preset, explicit matrices, or a random draw"""

    preset: Optional[str] = None
    a: Optional[Matrix] = None
    sigma_s: Optional[Matrix] = None
    sigma_eps: Optional[Matrix] = None
    d_x: int = Field(default=1, ge=1)
    random: Optional[RandomSystemSpec] = None
    g: float = Field(default=1.0, gt=0)

    @model_validator(mode="after")
    def _one_source(self):
        explicit = [self.a, self.sigma_s, self.sigma_eps]
        has_explicit = any(m is not None for m in explicit)
        chosen = sum([self.preset is not None, has_explicit, self.random is not None])
        if chosen != 1:
            raise ValueError("give exactly one of 'preset', explicit matrices, or 'random'")
        if self.preset is not None and self.preset not in GAUSSIAN_PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}, choose from {sorted(GAUSSIAN_PRESETS)}")
        if has_explicit:
            if any(m is None for m in explicit):
                raise ValueError("explicit systems need 'a', 'sigma_s' and 'sigma_eps'")
            a, s, e = (np.asarray(m, dtype=float) for m in explicit)
            if s.ndim != 2 or s.shape[0] != s.shape[1] or e.ndim != 2 or e.shape[0] != e.shape[1]:
                raise ValueError("'sigma_s' and 'sigma_eps' must be square")
            if a.shape != (e.shape[0], s.shape[0]):
                raise ValueError(f"'a' has shape {a.shape}, expected {(e.shape[0], s.shape[0])}")
            if not 1 <= self.d_x < s.shape[0]:
                raise ValueError(f"'d_x' must lie in [1, {s.shape[0] - 1}]")
        return self

    def to_system(self, g: Optional[float] = None) -> GaussianPidSystem:
        gain = self.g if g is None else g
        if self.preset is not None:
            return gaussian_preset(self.preset, gain)
        if self.random is not None:
            r = self.random
            return random_gaussian_system(r.d_x, r.d_y, r.d_t, r.seed, gain)
        return GaussianPidSystem.build(self.a, self.sigma_s, self.sigma_eps, gain, self.d_x)


class DiscreteSystemSpec(_Strict):
    """A named preset, or a gate bitstring with a source pmf"""

    preset: Optional[str] = None
    gate: Optional[str] = None
    pmf: Optional[List[float]] = None
    p_eps: float = Field(default=0.0, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _one_source(self):
        if (self.preset is None) == (self.gate is None):
            raise ValueError("give exactly one of 'preset' or 'gate'")
        if self.preset is not None and self.preset not in DISCRETE_PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}, choose from {sorted(DISCRETE_PRESETS)}")
        if self.gate is not None:
            Gate.from_bits(self.gate)
            if self.pmf is not None:
                JointPmf(tuple(self.pmf))
        elif self.pmf is not None:
            raise ValueError("'pmf' only applies together with 'gate'")
        return self

    def to_system(self, p_eps: Optional[float] = None) -> DiscreteSystem:
        flip = self.p_eps if p_eps is None else p_eps
        if self.preset is not None:
            return discrete_preset(self.preset, flip)
        pmf = JointPmf.uniform() if self.pmf is None else JointPmf(tuple(self.pmf))
        return DiscreteSystem(pmf, Gate.from_bits(self.gate), flip)


class VarModelSpec(_Strict):
    coeffs: List[Matrix] = Field(min_length=1)
    resid_cov: Matrix
    x_vars: List[int] = Field(min_length=1)

    @model_validator(mode="after")
    def _shapes(self):
        n = len(self.resid_cov)
        for lag, a in enumerate(self.coeffs, start=1):
            if np.asarray(a, dtype=float).shape != (n, n):
                raise ValueError(f"A_{lag} must be {n}x{n}")
        if any(not 0 <= i < n for i in self.x_vars) or len(set(self.x_vars)) >= n:
            raise ValueError(f"'x_vars' must be a proper subset of 0..{n - 1}")
        return self

    def to_model(self) -> VarModel:
        return VarModel.build(self.coeffs, self.resid_cov)

    def to_partition(self) -> Partition:
        return Partition.of(self.x_vars, len(self.resid_cov))


class RunConfig(_Strict):
    schema_version: Literal[1] = 1
    seed: Optional[int] = Field(default=None, ge=0)
    workers: Optional[int] = Field(default=None, ge=1)
    n_null: int = Field(default=DEFAULTS.n_null, ge=1)
    retry_budget: int = Field(default=DEFAULTS.retry_budget, ge=0)


class PidConfig(RunConfig):
    system: GaussianSystemSpec


class NormalizeConfig(RunConfig):
    system: GaussianSystemSpec


class DiscreteRunConfig(RunConfig):
    system: DiscreteSystemSpec
    alpha: float = Field(default=DEFAULTS.alpha, gt=0)
    gate_sampling: str = DEFAULTS.gate_sampling
    retry_budget: int = Field(default=DEFAULTS.discrete_retry_budget, ge=0)

    @model_validator(mode="after")
    def _gate_mode(self):
        if self.gate_sampling not in GATE_SAMPLING_MODES:
            raise ValueError(f"'gate_sampling' must be one of {GATE_SAMPLING_MODES}")
        return self


class NoiseSweepConfig(RunConfig):
    """Gaussian sweeps walk the gain g; discrete sweeps walk p_eps"""

    family: Literal["gaussian", "discrete"] = "gaussian"
    gaussian: Optional[GaussianSystemSpec] = None
    discrete: Optional[DiscreteSystemSpec] = None
    grid: List[float] = Field(min_length=1)
    alpha: float = Field(default=DEFAULTS.alpha, gt=0)
    gate_sampling: str = DEFAULTS.gate_sampling
    discrete_retry_budget: int = Field(default=DEFAULTS.discrete_retry_budget, ge=0)

    @model_validator(mode="after")
    def _family(self):
        if self.family == "gaussian":
            if self.gaussian is None:
                raise ValueError("gaussian sweeps need a 'gaussian' system")
            if any(not g > 0 for g in self.grid):
                raise ValueError("noise gains in 'grid' must be positive")
        else:
            if self.discrete is None:
                raise ValueError("discrete sweeps need a 'discrete' system")
            if any(not 0.0 <= p <= 1.0 for p in self.grid):
                raise ValueError("flip probabilities in 'grid' must lie in [0, 1]")
        if self.gate_sampling not in GATE_SAMPLING_MODES:
            raise ValueError(f"'gate_sampling' must be one of {GATE_SAMPLING_MODES}")
        return self

    @property
    def param_name(self) -> str:
        return "g" if self.family == "gaussian" else "p_eps"


class TmiSweepConfig(RunConfig):
    tmi_grid: List[float] = Field(min_length=1)
    d_x: int = Field(default=1, ge=1)
    d_y: int = Field(default=1, ge=1)
    d_t: int = Field(default=1, ge=1)
    n_samples: int = Field(default=10_000, ge=1)
    histogram_bins: int = Field(default=DEFAULTS.histogram_bins, ge=1)

    @model_validator(mode="after")
    def _grid(self):
        if any(not t > 0 for t in self.tmi_grid):
            raise ValueError("TMI grid values must be positive")
        return self


class VarPidConfig(RunConfig):
    model: VarModelSpec
    normalize: bool = True


class VarSimulateConfig(RunConfig):
    model: VarModelSpec
    steps: int = Field(ge=1)
    burn_in: int = Field(default=1000, ge=0)
    epochs: int = Field(default=1, ge=1)


class PipelineConfig(RunConfig):
    data: Path
    subset_size: int = Field(default=10, ge=2)
    n_subsets: int = Field(default=1000, ge=1)
    epochs: int = Field(default=50, ge=1)
    order: int = Field(default=1, ge=1)


class RegressConfig(RunConfig):
    data: Path
    standardize: Literal["group", "global"] = "group"


def load_config(path, model: Type[C]) -> C:
    """Parse and validate a JSON run document; relative data paths follow the file"""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON: {e}")
    if isinstance(raw, dict) and isinstance(raw.get("data"), str):
        data = Path(raw["data"])
        if not data.is_absolute():
            raw["data"] = str(path.parent / data)
    try:
        cfg = model.model_validate(raw)
    except (ValidationError, ValueError) as e:
        raise ConfigError(f"{path}: {e}")
    logger.debug(f"Loaded {model.__name__} from {path}")
    return cfg


def _env_int(name: str) -> Optional[int]:
    value = os.getenv(name)
    if value is None or value.strip() == "":
        return None
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"environment variable {name}={value!r} is not an integer")


def resolve_seed(flag: Optional[int], cfg: RunConfig) -> int:
    """--seed, then the config, then NUMIT_SEED, then 0"""
    for candidate in (flag, cfg.seed, _env_int(SEED_ENV)):
        if candidate is not None:
            if candidate < 0:
                raise ConfigError(f"seed must be non-negative, got {candidate}")
            return int(candidate)
    return 0


def resolve_workers(flag: Optional[int], cfg: RunConfig) -> int:
    """--workers, then the config, then NUMIT_WORKERS, then the CPU count"""
    for candidate in (flag, cfg.workers, _env_int(WORKERS_ENV)):
        if candidate is not None:
            if candidate < 1:
                raise ConfigError(f"worker count must be positive, got {candidate}")
            return int(candidate)
    return os.cpu_count() or 1
