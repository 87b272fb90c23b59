"""Stochastic three-phase mesostructure: phase labels, bond classes and pore bonds.

Phases are sampled per point; a bond's class follows from its two endpoint
phases. Porosity is represented by pre-breaking bonds: each endpoint of a
bond independently "draws pore" with probability equal to its pre-damage
index, and a bond touching a pore endpoint starts broken.

All random draws come from Philox streams keyed by the seed and a stream id,
consumed in point-index (or pair-index) order, so assignments depend only on
the seed and the point ordering.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .errors import ConfigError


class Phase(IntEnum):
    AGGREGATE = 0
    MORTAR = 1
    ITZ = 2


class BondType(IntEnum):
    """The six combined bond types."""

    AA = 0
    CC = 1
    II = 2
    AC = 3
    AI = 4
    CI = 5


class EffectiveClass(IntEnum):
    """Mechanical class a combined bond behaves as."""

    AGGREGATE = 0
    MORTAR = 1
    INTERFACE = 2
    HOMOGENIZED = 3


# Indexed [phase_i, phase_j].
_TYPE_TABLE = np.array(
    [
        [BondType.AA, BondType.AC, BondType.AI],
        [BondType.AC, BondType.CC, BondType.CI],
        [BondType.AI, BondType.CI, BondType.II],
    ],
    dtype=np.int8,
)

EFFECTIVE_OF_TYPE = np.array(
    [
        EffectiveClass.AGGREGATE,  # AA
        EffectiveClass.MORTAR,  # CC
        EffectiveClass.INTERFACE,  # II
        EffectiveClass.HOMOGENIZED,  # AC
        EffectiveClass.INTERFACE,  # AI
        EffectiveClass.INTERFACE,  # CI
    ],
    dtype=np.int8,
)

_PHASE_STREAM = 0x5048
_PORE_STREAM = 0x504F


@dataclass(frozen=True)
class MesoModel:
    """Phase volume fractions (aggregate, mortar, ITZ), porosity and RNG seed."""

    volume_fractions: tuple = (0.4, 0.55, 0.05)
    porosity: float = 0.0
    critical_porosity: float = 1.0
    seed: int = 0

    def __post_init__(self):
        f = np.asarray(self.volume_fractions, dtype=float)
        if f.shape != (3,) or np.any(f < 0):
            raise ConfigError("volume fractions must be three non-negative numbers")
        if abs(f.sum() - 1.0) > 1e-12:
            raise ConfigError(f"volume fractions sum to {f.sum():.15g}, expected 1")
        if self.critical_porosity <= 0:
            raise ConfigError("critical porosity must be positive")
        if not 0.0 <= self.porosity <= self.critical_porosity:
            raise ConfigError("porosity must lie in [0, critical porosity]")

    @property
    def pre_damage(self) -> float:
        return pre_damage_index(self.porosity, self.critical_porosity)


def _stream(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[int(seed) & (2**64 - 1), stream]))


def assign_phases(n_points: int, meso: MesoModel) -> np.ndarray:
    """Label each point i.i.d. according to the volume fractions.

    Returns:
        int8 array of :class:`Phase` values.
    """
    u = _stream(meso.seed, _PHASE_STREAM).random(n_points)
    edges = np.cumsum(meso.volume_fractions)[:-1]
    return np.searchsorted(edges, u, side="right").astype(np.int8)


def classify_bond(phase_i, phase_j):
    """Combined bond type of two endpoint phases (vectorized, symmetric)."""
    return _TYPE_TABLE[np.asarray(phase_i, dtype=np.intp), np.asarray(phase_j, dtype=np.intp)]


def effective_class(bond_type):
    return EFFECTIVE_OF_TYPE[np.asarray(bond_type, dtype=np.intp)]


def bond_classes(phases: np.ndarray, pair_i: np.ndarray, pair_j: np.ndarray):
    """Combined type and effective class of every bond pair."""
    types = classify_bond(phases[pair_i], phases[pair_j])
    return types, effective_class(types)


def pre_damage_index(porosity, critical_porosity=1.0):
    """Pre-damage index ``d = porosity / critical_porosity``."""
    if critical_porosity <= 0:
        raise ConfigError("critical porosity must be positive")
    phi = np.asarray(porosity, dtype=float)
    if np.any(phi < 0) or np.any(phi > critical_porosity):
        raise ConfigError("porosity must lie in [0, critical porosity]")
    d = phi / critical_porosity
    return float(d) if d.ndim == 0 else d


def apply_pore_prebreak(pair_i: np.ndarray, pair_j: np.ndarray, d, seed: int) -> np.ndarray:
    """Decide which bonds start broken.

    Args:
        pair_i, pair_j: endpoint indices of each bond.
        d: pre-damage index, scalar or per point.
        seed: RNG seed.

    Returns:
        Boolean pre-broken flag per bond; each bond breaks with probability
        ``1 - (1 - d_i)(1 - d_j)``.
    """
    n = len(pair_i)
    d = np.asarray(d, dtype=float)
    if np.any(d < 0) or np.any(d > 1):
        raise ConfigError("pre-damage index must lie in [0, 1]")
    if d.ndim == 0:
        d_i = d_j = float(d)
    else:
        d_i, d_j = d[pair_i], d[pair_j]
    draws = _stream(seed, _PORE_STREAM).random((n, 2))
    return (draws[:, 0] < d_i) | (draws[:, 1] < d_j)


def class_fractions(effective: np.ndarray) -> dict:
    """Share of bonds in each effective class."""
    counts = np.bincount(np.asarray(effective, dtype=np.intp), minlength=len(EffectiveClass))
    total = max(counts.sum(), 1)
    return {cls.name.lower(): counts[cls] / total for cls in EffectiveClass}
