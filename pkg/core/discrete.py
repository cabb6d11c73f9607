#!/usr/bin/env python3
"""
Discrete Systems
Binary sources through two-input logic gates with output flip noise,
exact entropies and the gate-ensemble null model
"""

import logging
from dataclasses import dataclass
from enum import Enum
from functools import partial
from typing import Dict, Iterable, List, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import entr

from .ensemble import DEFAULTS, NormalizedAtoms, NullEnsemble, build_ensemble, normalize_against
from .exceptions import BracketFailure, NonFiniteData, TargetUnreachable, ZeroTmi
from .gaussian import clamp_information
from .pid import ZERO_TMI, PidAtoms, mmi_pid

logger = logging.getLogger(__name__)

PMF_ATOL = 1e-12
ROOT_TOL = 1e-9
P_EPS_MAX = 0.5
GATE_SAMPLING_MODES = ("uniform", "stratified")

# (x, y) outcomes in table order
OUTCOMES = ((0, 0), (0, 1), (1, 0), (1, 1))


class Source(str, Enum):
    X = "x"
    Y = "y"


@dataclass(frozen=True)
class JointPmf:
    """p(X, Y) ordered (p00, p01, p10, p11)"""

    probs: Tuple[float, float, float, float]

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).ravel()
        if p.size != 4:
            raise ValueError(f"joint pmf needs 4 entries, got {p.size}")
        if not np.all(np.isfinite(p)):
            raise NonFiniteData("joint pmf has non-finite entries")
        if np.any(p < 0):
            raise ValueError(f"joint pmf has negative entries: {p.tolist()}")
        if abs(p.sum() - 1.0) > PMF_ATOL:
            raise ValueError(f"joint pmf sums to {p.sum():.15g}, expected 1")
        object.__setattr__(self, "probs", tuple(float(v) for v in p))

    @classmethod
    def uniform(cls) -> "JointPmf":
        return cls((0.25, 0.25, 0.25, 0.25))

    @classmethod
    def normalized(cls, weights: Iterable[float]) -> "JointPmf":
        w = np.asarray(list(weights), dtype=float)
        return cls(tuple(w / w.sum()))

    def table(self) -> np.ndarray:
        """p(x, y) as a 2x2 array"""
        return np.asarray(self.probs).reshape(2, 2)


@dataclass(frozen=True)
class Gate:
    """Output bits over inputs (00, 01, 10, 11)"""

    truth: Tuple[int, int, int, int]

    def __post_init__(self):
        truth = tuple(int(b) for b in self.truth)
        if len(truth) != 4 or any(b not in (0, 1) for b in truth):
            raise ValueError(f"gate truth table must be 4 bits, got {self.truth}")
        object.__setattr__(self, "truth", truth)

    @classmethod
    def from_bits(cls, bits: str) -> "Gate":
        bits = bits.strip()
        if len(bits) != 4 or set(bits) - {"0", "1"}:
            raise ValueError(f"gate must be a 4-character bitstring, got {bits!r}")
        return cls(tuple(int(b) for b in bits))

    @property
    def bits(self) -> str:
        return "".join(str(b) for b in self.truth)

    @property
    def label(self) -> str:
        return CANONICAL_NAMES.get(self.bits, self.bits)

    def output(self, x: int, y: int) -> int:
        return self.truth[2 * x + y]

    def complement(self) -> "Gate":
        return Gate(tuple(1 - b for b in self.truth))

    def is_constant(self) -> bool:
        return len(set(self.truth)) == 1


CANONICAL_GATES: Dict[str, Gate] = {
    "Z1": Gate.from_bits("0110"),
    "Z2": Gate.from_bits("0011"),
    "Z3": Gate.from_bits("0101"),
    "Z4": Gate.from_bits("0111"),
    "Z5": Gate.from_bits("1011"),
    "Z6": Gate.from_bits("1101"),
    "Z7": Gate.from_bits("1110"),
}
CANONICAL_NAMES = {gate.bits: name for name, gate in CANONICAL_GATES.items()}
GATE_ORDER: Tuple[Gate, ...] = tuple(CANONICAL_GATES.values())


def gate_classes() -> Dict[str, Tuple[Gate, ...]]:
    """Non-constant 2-input tables grouped under output complement, keyed by canonical name"""
    classes: Dict[str, List[Gate]] = {}
    for code in range(16):
        gate = Gate(tuple((code >> (3 - k)) & 1 for k in range(4)))
        if gate.is_constant():
            continue
        members = {gate.bits, gate.complement().bits}
        name = next(CANONICAL_NAMES[b] for b in sorted(members) if b in CANONICAL_NAMES)
        classes.setdefault(name, []).append(gate)
    return {name: tuple(classes[name]) for name in CANONICAL_GATES}


@dataclass(frozen=True)
class DiscreteSystem:
    """T = f(X, Y) flipped with probability p_eps"""

    pmf: JointPmf
    gate: Gate
    p_eps: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.p_eps) and 0.0 <= self.p_eps <= 1.0):
            raise ValueError(f"flip probability must lie in [0, 1], got {self.p_eps}")
        object.__setattr__(self, "p_eps", float(self.p_eps))

    def with_p_eps(self, p_eps: float) -> "DiscreteSystem":
        return DiscreteSystem(self.pmf, self.gate, p_eps)


def discrete_entropy(p) -> float:
    """Shannon entropy in nats of a probability array of any shape"""
    p = np.asarray(p, dtype=float).ravel()
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise ValueError("entropy needs finite non-negative probabilities")
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {p.sum():.12g}, expected 1")
    return float(np.sum(entr(p)))


def binary_entropy(p: float) -> float:
    return float(entr(p) + entr(1.0 - p))


def joint_table(sys: DiscreteSystem) -> np.ndarray:
    """p(x, y, t) as a 2x2x2 array"""
    table = np.zeros((2, 2, 2))
    pxy = sys.pmf.table()
    for x, y in OUTCOMES:
        z = sys.gate.output(x, y)
        table[x, y, z] = pxy[x, y] * (1.0 - sys.p_eps)
        table[x, y, 1 - z] = pxy[x, y] * sys.p_eps
    return table


def gate_output_prob(pmf: JointPmf, gate: Gate) -> float:
    """p(Z = 1) before noise"""
    return float(sum(p for p, bit in zip(pmf.probs, gate.truth) if bit))


def target_distribution(sys: DiscreteSystem) -> Tuple[float, float]:
    z1 = gate_output_prob(sys.pmf, sys.gate)
    t0 = (1.0 - z1) * (1.0 - sys.p_eps) + z1 * sys.p_eps
    return float(t0), float(1.0 - t0)


def discrete_tmi(sys: DiscreteSystem) -> float:
    """I(X,Y;T) = H(T) - H2(p_eps)"""
    return clamp_information(discrete_entropy(target_distribution(sys)) - binary_entropy(sys.p_eps))


def marginal_mi_discrete(sys: DiscreteSystem, source: Source) -> float:
    """I(X;T) or I(Y;T) from the joint (source, T) table"""
    table = joint_table(sys)
    axis = 1 if Source(source) is Source.X else 0
    pst = table.sum(axis=axis)
    mi = discrete_entropy(pst.sum(axis=1)) + discrete_entropy(pst.sum(axis=0)) - discrete_entropy(pst)
    return clamp_information(mi)


def pid_discrete(sys: DiscreteSystem) -> PidAtoms:
    i_x = marginal_mi_discrete(sys, Source.X)
    i_y = marginal_mi_discrete(sys, Source.Y)
    return mmi_pid(i_x, i_y, discrete_tmi(sys))


def solve_p_eps(pmf: JointPmf, gate: Gate, target_tmi: float) -> float:
    """Flip probability in [0, 0.5) at which the system carries target_tmi"""
    if not target_tmi > 0:
        raise ValueError(f"target TMI must be positive, got {target_tmi}")
    base = DiscreteSystem(pmf, gate, 0.0)
    ceiling = discrete_tmi(base)
    if target_tmi > ceiling + ROOT_TOL:
        raise TargetUnreachable(
            f"TMI {target_tmi:.6g} exceeds noiseless {ceiling:.6g} for gate {gate.label}"
        )
    if target_tmi >= ceiling - ROOT_TOL:
        return 0.0

    def root_fn(p_eps: float) -> float:
        return discrete_tmi(base.with_p_eps(p_eps)) - target_tmi

    try:
        p_eps = brentq(root_fn, 0.0, P_EPS_MAX, xtol=1e-15, maxiter=200)
    except RuntimeError as e:
        raise BracketFailure(f"flip-probability search did not converge: {e}")

    residual = abs(root_fn(p_eps))
    if residual > ROOT_TOL:
        raise BracketFailure(f"flip probability {p_eps:.9g} leaves TMI residual {residual:.3e}")
    return float(min(p_eps, np.nextafter(P_EPS_MAX, 0.0)))


def sample_source_pmf(alpha: float, rng: np.random.Generator) -> JointPmf:
    """Symmetric Dirichlet(alpha) draw over the four (x, y) outcomes"""
    if not alpha > 0:
        raise ValueError(f"Dirichlet concentration must be positive, got {alpha}")
    return JointPmf.normalized(rng.dirichlet(np.full(4, float(alpha))))


def _pick_gate(gate_sampling: str, index: int, rng: np.random.Generator) -> Gate:
    if gate_sampling == "stratified":
        return GATE_ORDER[index % len(GATE_ORDER)]
    return GATE_ORDER[int(rng.integers(len(GATE_ORDER)))]


def draw_discrete_null(alpha: float, gate_sampling: str, target_tmi: float,
                       index: int, rng: np.random.Generator) -> PidAtoms:
    """Random canonical gate and Dirichlet sources, flip noise tuned to target_tmi"""
    gate = _pick_gate(gate_sampling, index, rng)
    pmf = sample_source_pmf(alpha, rng)
    p_eps = solve_p_eps(pmf, gate, target_tmi)
    return pid_discrete(DiscreteSystem(pmf, gate, p_eps))


def build_discrete_null_ensemble(target_tmi: float, n: int, seed: int,
                                 alpha: float = DEFAULTS.alpha,
                                 gate_sampling: str = DEFAULTS.gate_sampling, workers: int = 1,
                                 retry_budget: int = DEFAULTS.discrete_retry_budget) -> NullEnsemble:
    if gate_sampling not in GATE_SAMPLING_MODES:
        raise ValueError(f"gate sampling must be one of {GATE_SAMPLING_MODES}, got {gate_sampling!r}")
    draw = partial(draw_discrete_null, float(alpha), gate_sampling, target_tmi)
    return build_ensemble(draw, target_tmi, n, seed, "discrete", workers, retry_budget)


def numit_normalize_discrete(sys: DiscreteSystem, n: int = DEFAULTS.n_null,
                             alpha: float = DEFAULTS.alpha, seed: int = 0, workers: int = 1,
                             gate_sampling: str = DEFAULTS.gate_sampling,
                             retry_budget: int = DEFAULTS.discrete_retry_budget) -> NormalizedAtoms:
    tmi = discrete_tmi(sys)
    if tmi < ZERO_TMI:
        raise ZeroTmi(f"discrete system TMI {tmi:.3e} is zero, nothing to normalise")
    atoms = pid_discrete(sys)
    ensemble = build_discrete_null_ensemble(tmi, n, seed, alpha, gate_sampling, workers, retry_budget)
    logger.debug(f"Normalised gate {sys.gate.label} at p_eps={sys.p_eps:.4g}")
    return normalize_against(atoms, ensemble)
