"""
NuMIT PID - Core Module
"""

from .discrete import (
    CANONICAL_GATES,
    DiscreteSystem,
    Gate,
    JointPmf,
    Source,
    discrete_tmi,
    gate_classes,
    numit_normalize_discrete,
    pid_discrete,
    solve_p_eps,
)
from .ensemble import DEFAULTS, NormalizedAtoms, NullEnsemble, NumitSettings, quantile_of
from .exceptions import NumitError, SampleRejected
from .gaussian import CovMatrix, GaussianPidSystem, IndexSet, gaussian_mi, system_tmi
from .numit import build_null_ensemble, numit_normalize, solve_g
from .pid import AtomShares, PidAtoms, mmi_pid, nmi_normalize, pid_gaussian
from .presets import discrete_preset, gaussian_preset, random_gaussian_system
from .var_model import (
    Partition,
    TimeSeries,
    VarModel,
    fit_var,
    numit_normalize_var,
    simulate_var,
    var_pid,
    var_tmi,
)

__version__ = "1.0.0"
__author__ = "NuMIT PID Team"

__all__ = [
    "CovMatrix",
    "IndexSet",
    "GaussianPidSystem",
    "gaussian_mi",
    "system_tmi",
    "PidAtoms",
    "AtomShares",
    "mmi_pid",
    "nmi_normalize",
    "pid_gaussian",
    "NumitSettings",
    "DEFAULTS",
    "NullEnsemble",
    "NormalizedAtoms",
    "quantile_of",
    "solve_g",
    "build_null_ensemble",
    "numit_normalize",
    "VarModel",
    "TimeSeries",
    "Partition",
    "simulate_var",
    "fit_var",
    "var_tmi",
    "var_pid",
    "numit_normalize_var",
    "JointPmf",
    "Gate",
    "Source",
    "DiscreteSystem",
    "CANONICAL_GATES",
    "gate_classes",
    "discrete_tmi",
    "pid_discrete",
    "solve_p_eps",
    "numit_normalize_discrete",
    "gaussian_preset",
    "discrete_preset",
    "random_gaussian_system",
    "NumitError",
    "SampleRejected",
]
