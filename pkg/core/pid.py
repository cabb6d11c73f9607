#!/usr/bin/env python3
"""
PID Atoms
Minimal-mutual-information decomposition and the TMI share normalisation
"""

import logging
from dataclasses import dataclass
from typing import Dict, Tuple

from .exceptions import InconsistentInformation, NegativeInformation, ZeroTmi
from .gaussian import GaussianPidSystem, clamp_information, gaussian_mi, joint_covariance, system_tmi

logger = logging.getLogger(__name__)

ATOM_NAMES = ("red", "un_x", "un_y", "syn")

INCONSISTENCY_TOL = 1e-6
ZERO_TMI = 1e-12


@dataclass(frozen=True)
class PidAtoms:
    """Two-source decomposition of I(X,Y;T), all in nats"""

    tmi: float
    red: float
    un_x: float
    un_y: float
    syn: float

    def atoms(self) -> Tuple[float, float, float, float]:
        return (self.red, self.un_x, self.un_y, self.syn)

    def as_dict(self) -> Dict[str, float]:
        return {"tmi": self.tmi, **dict(zip(ATOM_NAMES, self.atoms()))}

    def scaled(self, c: float) -> "PidAtoms":
        return PidAtoms(*(c * v for v in (self.tmi, self.red, self.un_x, self.un_y, self.syn)))


@dataclass(frozen=True)
class AtomShares:
    """Atoms divided by TMI"""

    red: float
    un_x: float
    un_y: float
    syn: float
    method: str = "nmi"

    def as_dict(self) -> Dict[str, float]:
        return {"red": self.red, "un_x": self.un_x, "un_y": self.un_y, "syn": self.syn}


def mmi_pid(i_x: float, i_y: float, tmi: float) -> PidAtoms:
    """Decompose with redundancy = min(I(X;T), I(Y;T))

    A TMI that falls short of the larger marginal by less than INCONSISTENCY_TOL
    is lifted to that marginal, which leaves synergy at zero and keeps the sum
    identity exact.
    """
    if i_x < 0 or i_y < 0:
        raise NegativeInformation(f"marginal informations must be non-negative, got {i_x}, {i_y}")

    top = max(i_x, i_y)
    if tmi < top - INCONSISTENCY_TOL:
        raise InconsistentInformation(
            f"TMI {tmi:.9g} is below the marginal information {top:.9g}"
        )
    if tmi < top:
        logger.debug(f"Lifting TMI {tmi:.12g} to marginal {top:.12g}")
        tmi = top

    red = min(i_x, i_y)
    un_x = i_x - red
    un_y = i_y - red
    syn = clamp_information(tmi - top)
    return PidAtoms(tmi=float(tmi), red=float(red), un_x=float(un_x), un_y=float(un_y), syn=syn)


def nmi_normalize(atoms: PidAtoms) -> AtomShares:
    if atoms.tmi < ZERO_TMI:
        raise ZeroTmi(f"cannot normalise atoms with TMI {atoms.tmi:.3e}")
    return AtomShares(*(v / atoms.tmi for v in atoms.atoms()))


def pid_gaussian(sys: GaussianPidSystem) -> PidAtoms:
    joint = joint_covariance(sys)
    i_x = gaussian_mi(joint, sys.x_index, sys.t_index)
    i_y = gaussian_mi(joint, sys.y_index, sys.t_index)
    return mmi_pid(i_x, i_y, system_tmi(sys))
