"""Bond breakage with saturation- and rate-dependent critical stretches.

A bond breaks irreversibly once its stretch leaves the band
``(-s_c * DIF_c, s_t * DIF_t)``, where the static stretches come from the
fracture energy (tension) and compressive strength (compression), reduced
for wet concrete, and the dynamic increase factors depend on the bond
stretch rate and the saturation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .lattice import Bonds, volume_factor
from .mesostructure import EffectiveClass

# Below this rate the wet amplification is inactive.
WET_RATE_THRESHOLD = 1e-5


@dataclass(frozen=True)
class StrengthParams:
    """Quasi-static strengths of dry concrete (Pa)."""

    compressive: float = 39.5e6
    tensile: float = 3.95e6

    def __post_init__(self):
        if not self.compressive > self.tensile > 0:
            raise ValueError("strengths must satisfy compressive > tensile > 0")


@dataclass(frozen=True)
class DifParams:
    """Dynamic increase factor constants.

    Compression: ``1 + c_comp * ln(rate / ref_rate_comp)`` (never below 1).
    Tension: ``(rate / ref_rate_tens) ** zeta`` up to ``transition_rate``,
    then ``beta * (rate / ref_rate_tens) ** (1/3)`` with ``beta`` chosen for
    continuity at the transition.
    """

    c_comp: float = 0.007
    ref_rate_comp: float = 1.0
    zeta: float = 0.0307
    ref_rate_tens: float = 1e-6
    transition_rate: float = 30.0
    min_rate: float = 1e-6
    saturation_sensitivity: float = 0.15

    def __post_init__(self):
        for name in ("c_comp", "ref_rate_comp", "zeta", "ref_rate_tens", "transition_rate",
                     "min_rate", "saturation_sensitivity"):
            if not getattr(self, name) > 0:
                raise ValueError(f"DIF constant {name} must be positive")

    @property
    def beta(self) -> float:
        return (self.transition_rate / self.ref_rate_tens) ** (self.zeta - 1.0 / 3.0)

    def as_array(self, saturation: float, strength_ratio: float) -> np.ndarray:
        """Packed constants for the kernels; ``strength_ratio`` is f_t / f_c of dry concrete."""
        return np.array([
            self.c_comp, self.ref_rate_comp, self.zeta, self.ref_rate_tens,
            self.transition_rate, self.min_rate, self.beta,
            1.0 + self.saturation_sensitivity * saturation, strength_ratio,
        ])


def static_critical_stretches(bulk, horizon, youngs_modulus, fracture_energy, compressive_strength):
    """(tensile, compressive) critical stretch magnitudes.

    Tension from the fracture energy, ``sqrt(5 G0 / (9 k delta))``;
    compression from the strength, ``sigma_c / E``.
    """
    s_t = np.sqrt(5.0 * np.asarray(fracture_energy, float) / (9.0 * np.asarray(bulk, float) * horizon))
    s_c = np.asarray(compressive_strength, float) / np.asarray(youngs_modulus, float)
    return _scalar(s_t), _scalar(s_c)


def wet_static_strength(f_c, f_t, saturation):
    """Quasi-static strengths of wet concrete, linear in saturation."""
    if not 0 <= saturation <= 1:
        raise ValueError("saturation must lie in [0, 1]")
    factor = 1.0 - 0.2 * saturation
    return f_c * factor, f_t * factor


@njit(cache=True)
def _dif_tension(rate, p):
    if rate <= 0.0:
        return 1.0
    r = max(rate, p[5])
    if r <= p[4]:
        return (r / p[3]) ** p[2]
    return p[6] * (r / p[3]) ** (1.0 / 3.0)


@njit(cache=True)
def _dif_compression(rate, p):
    if rate <= 0.0:
        return 1.0
    r = max(rate, p[5])
    return max(1.0 + p[0] * math.log(r / p[1]), 1.0)


@njit(cache=True)
def _g_tension(rate, p):
    if rate <= WET_RATE_THRESHOLD:
        return 1.0
    return 2.0 - p[7] ** (-math.log10(rate) - 5.0)


@njit(cache=True)
def _dif_wet(rate, p):
    """(DIF_t^w, DIF_c^w) for a non-negative rate."""
    dt_dry = _dif_tension(rate, p)
    dc_dry = _dif_compression(rate, p)
    if rate <= WET_RATE_THRESHOLD:
        return dt_dry, dc_dry
    dt_wet = dt_dry * _g_tension(rate, p)
    r = p[8]
    g_c = (dt_wet * r + 1.0) / (dt_dry * r + 1.0)
    return dt_wet, dc_dry * g_c


def dif_dry(rate: float, dif: DifParams, sense: str) -> float:
    """Dry-concrete dynamic increase factor; non-positive rates return 1."""
    p = dif.as_array(0.0, 0.1)
    if sense == "tension":
        return float(_dif_tension(float(rate), p))
    if sense == "compression":
        return float(_dif_compression(float(rate), p))
    raise ValueError(f"sense must be 'tension' or 'compression', got {sense!r}")


def saturation_amplification(rate: float, saturation: float, dif: DifParams = DifParams(),
                             strength_ratio: float = 0.1):
    """(g_t, g_c): ratios of wet to dry dynamic increase factors."""
    p = dif.as_array(saturation, strength_ratio)
    g_t = float(_g_tension(float(rate), p))
    if rate <= WET_RATE_THRESHOLD:
        return g_t, 1.0
    dt_dry = float(_dif_tension(float(rate), p))
    r = strength_ratio
    return g_t, (dt_dry * g_t * r + 1.0) / (dt_dry * r + 1.0)


def dif_wet(rate: float, saturation: float, dif: DifParams = DifParams(), strength_ratio: float = 0.1):
    """(DIF_t^w, DIF_c^w) of wet concrete."""
    t, c = _dif_wet(float(rate), dif.as_array(saturation, strength_ratio))
    return float(t), float(c)


@dataclass
class ClassThresholds:
    """Wet static critical stretch magnitudes per effective bond class."""

    tensile: np.ndarray
    compressive: np.ndarray

    def __post_init__(self):
        self.tensile = np.ascontiguousarray(self.tensile, dtype=np.float64)
        self.compressive = np.ascontiguousarray(self.compressive, dtype=np.float64)
        n = len(EffectiveClass)
        if self.tensile.shape != (n,) or self.compressive.shape != (n,):
            raise ValueError("one threshold per effective bond class is required")


@njit(cache=True)
def _bond_breaks(s, rate, cls, s_t, s_c, p):
    if s >= s_t[cls]:
        dt, _ = _dif_wet(abs(rate), p)
        return s >= s_t[cls] * dt
    if s <= -s_c[cls]:
        _, dc = _dif_wet(abs(rate), p)
        return s <= -s_c[cls] * dc
    return False


def update_bond_state(stretch: float, rate: float, bond_class: int,
                      thresholds: ClassThresholds, dif: DifParams, saturation: float,
                      strength_ratio: float = 0.1) -> int:
    """Intact flag (1 or 0) of a currently intact bond after this step."""
    p = dif.as_array(saturation, strength_ratio)
    broken = _bond_breaks(float(stretch), float(rate), int(bond_class),
                          thresholds.tensile, thresholds.compressive, p)
    return 0 if broken else 1


@njit(parallel=True, cache=True)
def _break_kernel(X, Y, V, pair_i, pair_j, pair_class, broken, s_t, s_c, p, newly):
    n = pair_i.shape[0]
    for k in prange(n):
        newly[k] = 0
        if broken[k]:
            continue
        i = pair_i[k]
        j = pair_j[k]
        d0 = X[j, 0] - X[i, 0]
        d1 = X[j, 1] - X[i, 1]
        d2 = X[j, 2] - X[i, 2]
        x = math.sqrt(d0 * d0 + d1 * d1 + d2 * d2)
        e0 = Y[j, 0] - Y[i, 0]
        e1 = Y[j, 1] - Y[i, 1]
        e2 = Y[j, 2] - Y[i, 2]
        y = math.sqrt(e0 * e0 + e1 * e1 + e2 * e2)
        s = (y - x) / x
        cls = pair_class[k]
        if s < s_t[cls] and s > -s_c[cls]:
            continue
        rate = 0.0
        if y > 0.0:
            rate = ((V[j, 0] - V[i, 0]) * e0 + (V[j, 1] - V[i, 1]) * e1
                    + (V[j, 2] - V[i, 2]) * e2) / (y * x)
        if _bond_breaks(s, rate, cls, s_t, s_c, p):
            broken[k] = 1
            newly[k] = 1


@njit(parallel=True, cache=True)
def _sync_intact(pair, broken, intact):
    for b in prange(pair.shape[0]):
        intact[b] = 1 - broken[pair[b]]


@njit(parallel=True, cache=True)
def _damage_kernel(X, vol, offsets, nbr, pair, broken, prebroken, dx, horizon, raw, rel):
    n = offsets.shape[0] - 1
    for i in prange(n):
        total = 0.0
        alive = 0.0
        initial = 0.0
        for b in range(offsets[i], offsets[i + 1]):
            j = nbr[b]
            d0 = X[j, 0] - X[i, 0]
            d1 = X[j, 1] - X[i, 1]
            d2 = X[j, 2] - X[i, 2]
            x = math.sqrt(d0 * d0 + d1 * d1 + d2 * d2)
            w = vol[j] * volume_factor(x, dx, horizon)
            total += w
            k = pair[b]
            if prebroken[k] == 0:
                initial += w
            if broken[k] == 0:
                alive += w
        raw[i] = 1.0 - alive / total if total > 0.0 else 0.0
        rel[i] = 1.0 - alive / initial if initial > 0.0 else 0.0


class BondFailureState:
    """Per-bond broken flags, kept once per pair and mirrored into the CSR lists."""

    def __init__(self, bonds: Bonds, pair_class: np.ndarray, prebroken: np.ndarray | None = None):
        self.bonds = bonds
        self.pair_class = np.ascontiguousarray(pair_class, dtype=np.int8)
        pre = np.zeros(bonds.n_pairs, bool) if prebroken is None else np.asarray(prebroken, bool)
        self.prebroken = np.ascontiguousarray(pre, dtype=np.uint8)
        self.broken = self.prebroken.copy()
        self.intact = np.empty(len(bonds.neighbors), dtype=np.uint8)
        self._newly = np.zeros(bonds.n_pairs, dtype=np.uint8)
        self.sync()

    def sync(self):
        _sync_intact(self.bonds.pair, self.broken, self.intact)

    @property
    def n_broken(self) -> int:
        return int(np.count_nonzero(self.broken))

    @property
    def n_load_broken(self) -> int:
        return self.n_broken - int(np.count_nonzero(self.prebroken))

    def endpoint_flags(self):
        """Intact flag of every pair as seen from its i and j CSR records."""
        b = self.bonds
        owners = b.owners()
        from_i = np.empty(b.n_pairs, np.uint8)
        from_j = np.empty(b.n_pairs, np.uint8)
        lower = owners < b.neighbors
        from_i[b.pair[lower]] = self.intact[lower]
        from_j[b.pair[~lower]] = self.intact[~lower]
        return from_i, from_j

    def commit(self, X, Y, V, thresholds: ClassThresholds, dif_array: np.ndarray) -> int:
        """Evaluate the criterion on every intact bond and commit new breaks."""
        b = self.bonds
        _break_kernel(X, Y, V, b.pair_i, b.pair_j, self.pair_class, self.broken,
                      thresholds.tensile, thresholds.compressive, dif_array, self._newly)
        count = int(np.count_nonzero(self._newly))
        if count:
            self.sync()
        return count

    def damage(self, X, volumes):
        """(raw, load-induced) volume-weighted damage per point."""
        b = self.bonds
        raw = np.empty(b.n_points)
        rel = np.empty(b.n_points)
        _damage_kernel(np.ascontiguousarray(X, np.float64), np.ascontiguousarray(volumes, np.float64),
                       b.offsets, b.neighbors, b.pair, self.broken, self.prebroken,
                       b.dx, b.horizon, raw, rel)
        return raw, rel


def damage(state: BondFailureState, X, volumes) -> np.ndarray:
    """Raw volume-weighted damage ``1 - sum(mu V) / sum(V)``."""
    return state.damage(X, volumes)[0]


def _scalar(a):
    a = np.asarray(a)
    return float(a) if a.ndim == 0 else a
