"""Ordinary state-based force states and the wet-concrete equation of state.

Force states follow the linear peridynamic solid: the scalar force on a bond
is an isotropic part ``3 k theta / m * omega * x`` plus a deviatoric part
``alpha * omega * e_d`` with ``alpha = 15 G / m``. Under strong compression
the isotropic pressure ``k * mu`` is replaced by the equation of state (dry
polynomial plus Biot-weighted Mie-Gruneisen water pressure), blended with a
C1 smoothstep so pressure stays continuous at the crush point.

Per-point sums run over each point's own CSR bond list in a fixed order, and
every point writes only its own output; results are therefore independent
of the number of threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit, prange
from scipy.optimize import brentq

from .errors import DomainError, ModelError
from .lattice import Bonds, volume_factor

INFLUENCE_KINDS = {"unit": 0, "inverse": 1}

# Smallest admissible denominator of the water Hugoniot fit before clamping.
WATER_DENOM_FLOOR = 1e-2


@njit(cache=True)
def influence(x, horizon, kind):
    if kind == 1:
        return horizon / x
    return 1.0


@dataclass
class PointElasticity:
    """Per-point bulk modulus, shear modulus and density."""

    bulk: np.ndarray
    shear: np.ndarray
    density: np.ndarray
    influence: str = "unit"

    def __post_init__(self):
        self.bulk = np.ascontiguousarray(self.bulk, dtype=np.float64)
        self.shear = np.ascontiguousarray(self.shear, dtype=np.float64)
        self.density = np.ascontiguousarray(self.density, dtype=np.float64)
        if np.any(self.bulk <= 0) or np.any(self.shear <= 0) or np.any(self.density <= 0):
            raise DomainError("bulk modulus, shear modulus and density must be positive")
        if self.influence not in INFLUENCE_KINDS:
            raise DomainError(f"unknown influence function {self.influence!r}")

    def alpha(self, m: np.ndarray) -> np.ndarray:
        """Deviatoric constant 15 G / m."""
        return 15.0 * self.shear / m

    def dilatational_speed(self) -> np.ndarray:
        return np.sqrt((self.bulk + 4.0 * self.shear / 3.0) / self.density)


# --------------------------------------------------------------------------- EOS


@dataclass(frozen=True)
class EosParams:
    """Dry-concrete polynomial and pore-water Mie-Gruneisen constants."""

    k1: float = 15.7e9
    k2: float = -30.8e9
    k3: float = 10.8e9
    p_crush: float = 14e6
    mu_crush: float = 8.1e-4
    p_lock: float = 3e9
    mu_lock: float = 0.16
    rho0: float = 1000.0
    sound_speed: float = 1480.0
    s1: float = 2.56
    s2: float = 1.986
    s3: float = 1.2268
    gamma0: float = 0.35
    alpha: float = 0.0
    e_int: float = 1.89e6
    blend_band: float = 0.05
    stable_compression: float = 0.3
    """Largest compression the stable time step is sized for."""
    _derived: tuple = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.mu_lock > self.mu_crush:
            raise DomainError("mu_lock must exceed mu_crush")
        if self.mu_crush <= 0 or self.blend_band <= 0:
            raise DomainError("mu_crush and the blend band must be positive")
        if self.stable_compression <= self.mu_crush:
            raise DomainError("stable_compression must exceed mu_crush")
        object.__setattr__(self, "_derived", (self._dry_peak(), self._water_limit()))

    def _dry_peak(self) -> float:
        # First local maximum of the cubic in mu_bar > 0; beyond it the fit softens.
        roots = np.roots([3 * self.k3, 2 * self.k2, self.k1])
        real = sorted(r.real for r in roots if abs(r.imag) < 1e-12 and r.real > 0)
        for r in real:
            if self.k2 * 2 + 6 * self.k3 * r < 0:
                return float(r)
        return math.inf

    def _water_limit(self) -> float:
        def g(mu):
            return _water_denominator(mu, self.s1, self.s2, self.s3) - WATER_DENOM_FLOOR

        hi = 1.0
        if g(hi) > 0:
            return math.inf
        return float(brentq(g, 0.0, hi, xtol=1e-15))

    @property
    def dry_peak(self) -> float:
        return self._derived[0]

    @property
    def water_limit(self) -> float:
        """Largest water compression evaluated before clamping."""
        return self._derived[1]

    def as_array(self) -> np.ndarray:
        return np.array(
            [
                self.k1, self.k2, self.k3, self.mu_crush, self.mu_lock,
                self.rho0, self.sound_speed, self.s1, self.s2, self.s3,
                self.gamma0, self.alpha, self.e_int, self.blend_band,
                min(self.dry_peak, 1e300), min(self.water_limit, 1e300),
            ],
            dtype=np.float64,
        )

    def max_tangent_bulk(self, water_weight: float) -> float:
        """Largest dP/dmu of the blended pressure between crush and ``stable_compression``."""
        span = self.mu_lock - self.mu_crush
        return self.k1 / span + water_weight * self.rho0 * self.sound_speed**2 * _water_slope_bound(self)


def _water_slope_bound(eos: EosParams) -> float:
    # Relative slope of P_w up to the design compression, sampled.
    lim = min(eos.water_limit, eos.stable_compression)
    mu = np.linspace(0.0, lim, 2001)
    p = np.array([_water_pressure_raw(m, eos.rho0, eos.sound_speed, eos.s1, eos.s2, eos.s3,
                                      eos.gamma0, eos.alpha, eos.e_int) for m in mu])
    return float(np.max(np.diff(p) / np.diff(mu))) / (eos.rho0 * eos.sound_speed**2)


@njit(cache=True)
def _water_denominator(mu, s1, s2, s3):
    return 1.0 - (s1 - 1.0) * mu - s2 * mu * mu / (mu + 1.0) - s3 * mu**3 / (mu + 1.0) ** 2


@njit(cache=True)
def _water_pressure_raw(mu, rho0, c, s1, s2, s3, gamma0, alpha, e_int):
    num = rho0 * c * c * mu * (1.0 + (1.0 - 0.5 * gamma0) * mu - 0.5 * alpha * mu * mu)
    return num / _water_denominator(mu, s1, s2, s3) + (gamma0 + alpha * mu) * e_int


def biot_coefficient(porosity):
    """Biot coefficient ``1 - (1 - phi)**3``."""
    phi = np.asarray(porosity, dtype=float)
    if np.any(phi < 0) or np.any(phi > 1):
        raise DomainError("porosity must lie in [0, 1]")
    b = 1.0 - (1.0 - phi) ** 3
    return float(b) if b.ndim == 0 else b


@njit(cache=True)
def dry_pressure(mu_bar, k1, k2, k3):
    """Cubic solid-skeleton pressure in the normalized compression ``mu_bar``."""
    return k1 * mu_bar + k2 * mu_bar * mu_bar + k3 * mu_bar * mu_bar * mu_bar


class EosDiagnostics:
    """Counts clamp events of the equation of state."""

    def __init__(self):
        self.water_clamps = 0
        self.dry_clamps = 0

    @property
    def total(self) -> int:
        return self.water_clamps + self.dry_clamps


def water_pressure(mu_water: float, eos: EosParams, diagnostics: EosDiagnostics | None = None) -> float:
    """Mie-Gruneisen pore-water pressure.

    Compressions beyond the range where the Hugoniot fit has a positive
    denominator are clamped to ``eos.water_limit``; the event is counted in
    ``diagnostics`` when given.
    """
    mu = float(mu_water)
    if mu > eos.water_limit:
        mu = eos.water_limit
        if diagnostics is not None:
            diagnostics.water_clamps += 1
    return float(_water_pressure_raw(mu, eos.rho0, eos.sound_speed, eos.s1, eos.s2, eos.s3,
                                     eos.gamma0, eos.alpha, eos.e_int))


def normalized_compression(mu, eos: EosParams):
    return (mu - eos.mu_crush) / (eos.mu_lock - eos.mu_crush)


def wet_pressure(mu_bar, mu_water, porosity, saturation, eos: EosParams,
                 diagnostics: EosDiagnostics | None = None) -> float:
    """Hydrostatic pressure of wet concrete: ``P_dry + w * b * P_w``."""
    if not 0 <= saturation <= 1:
        raise DomainError("saturation must lie in [0, 1]")
    p = float(dry_pressure(float(mu_bar), eos.k1, eos.k2, eos.k3))
    weight = saturation * biot_coefficient(porosity)
    if weight == 0:
        return p
    return p + weight * water_pressure(mu_water, eos, diagnostics)


@njit(cache=True)
def _wet_pressure_clamped(mu, water_weight, eos):
    """Returns (pressure, clamp_flags) with flag bit 1 = dry peak, bit 2 = water limit."""
    flags = 0
    mu_bar = (mu - eos[3]) / (eos[4] - eos[3])
    if mu_bar > eos[14]:
        mu_bar = eos[14]
        flags |= 1
    p = dry_pressure(mu_bar, eos[0], eos[1], eos[2])
    if water_weight > 0.0:
        mw = mu
        if mw > eos[15]:
            mw = eos[15]
            flags |= 2
        p += water_weight * _water_pressure_raw(mw, eos[5], eos[6], eos[7], eos[8], eos[9],
                                                eos[10], eos[11], eos[12])
    return p, flags


@njit(cache=True)
def eos_pressure(mu, bulk, water_weight, eos):
    """Blended volumetric pressure for compression ``mu`` (positive in compression).

    Below the crush strain the response is linear, ``bulk * mu``. Above it
    the equation-of-state increment ``P'(mu) - P'(mu_crush)`` is added to the
    crush-point pressure, and the two branches are joined by a smoothstep over
    ``blend_band * mu_crush``.

    Returns:
        (pressure, clamp_flags)
    """
    mu_c = eos[3]
    p_el = bulk * mu
    if mu <= mu_c:
        return p_el, 0
    p_mu, flags = _wet_pressure_clamped(mu, water_weight, eos)
    p_c, _ = _wet_pressure_clamped(mu_c, water_weight, eos)
    p_eos = bulk * mu_c + (p_mu - p_c)
    t = (mu - mu_c) / (eos[13] * mu_c)
    if t >= 1.0:
        return p_eos, flags
    h = t * t * (3.0 - 2.0 * t)
    return (1.0 - h) * p_el + h * p_eos, flags


# ------------------------------------------------------------------- force states


@njit(cache=True)
def scalar_force_state(theta, e_dev, x, m, bulk, alpha, omega, pressure, use_pressure, intact):
    """Scalar force state of one bond.

    With ``use_pressure`` the isotropic term uses ``-3 * pressure / m`` in
    place of ``3 * bulk * theta / m``. Broken bonds carry no force.
    """
    if not intact:
        return 0.0
    if use_pressure:
        iso = -3.0 * pressure / m
    else:
        iso = 3.0 * bulk * theta / m
    return iso * omega * x + alpha * omega * e_dev


@njit(parallel=True, cache=True)
def _bond_geometry_kernel(X, vol, offsets, nbr, dx, horizon, kind, xref, weight):
    """Reference length and ``omega * V_j * volume_factor`` of every CSR bond."""
    n = offsets.shape[0] - 1
    for i in prange(n):
        for b in range(offsets[i], offsets[i + 1]):
            j = nbr[b]
            d0 = X[j, 0] - X[i, 0]
            d1 = X[j, 1] - X[i, 1]
            d2 = X[j, 2] - X[i, 2]
            x = math.sqrt(d0 * d0 + d1 * d1 + d2 * d2)
            xref[b] = x
            weight[b] = influence(x, horizon, kind) * vol[j] * volume_factor(x, dx, horizon)


@njit(parallel=True, cache=True)
def _weighted_volume_kernel(offsets, xref, weight, out):
    n = offsets.shape[0] - 1
    for i in prange(n):
        acc = 0.0
        for b in range(offsets[i], offsets[i + 1]):
            acc += weight[b] * xref[b] * xref[b]
        out[i] = acc


@njit(cache=True)
def _bond_length(Y, i, j):
    e0 = Y[j, 0] - Y[i, 0]
    e1 = Y[j, 1] - Y[i, 1]
    e2 = Y[j, 2] - Y[i, 2]
    return math.sqrt(e0 * e0 + e1 * e1 + e2 * e2)


@njit(parallel=True, cache=True)
def _dilatation_kernel(Y, offsets, nbr, intact, xref, weight, m, out):
    n = offsets.shape[0] - 1
    for i in prange(n):
        acc = 0.0
        for b in range(offsets[i], offsets[i + 1]):
            if intact[b] == 0:
                continue
            x = xref[b]
            acc += weight[b] * x * (_bond_length(Y, i, nbr[b]) - x)
        out[i] = 3.0 * acc / m[i] if m[i] > 0.0 else 0.0


@njit(parallel=True, cache=True)
def _isotropic_kernel(theta, m, bulk, eos_mask, water_weight, eos, use_eos, iso, pressure, flags):
    n = theta.shape[0]
    for i in prange(n):
        mu = -theta[i]
        f = 0
        if use_eos and eos_mask[i]:
            p, f = eos_pressure(mu, bulk[i], water_weight, eos)
        else:
            p = bulk[i] * mu
        pressure[i] = p
        flags[i] = f
        iso[i] = -3.0 * p / m[i] if m[i] > 0.0 else 0.0


@njit(parallel=True, cache=True)
def _force_kernel(Y, offsets, nbr, intact, xref, weight, coef, alpha, out):
    # coef = iso - alpha * theta / 3 per point; weight already carries V_j,
    # so the sum is a force density at i.
    n = offsets.shape[0] - 1
    for i in prange(n):
        f0 = 0.0
        f1 = 0.0
        f2 = 0.0
        ci = coef[i]
        ai = alpha[i]
        for b in range(offsets[i], offsets[i + 1]):
            if intact[b] == 0:
                continue
            j = nbr[b]
            e0 = Y[j, 0] - Y[i, 0]
            e1 = Y[j, 1] - Y[i, 1]
            e2 = Y[j, 2] - Y[i, 2]
            y = math.sqrt(e0 * e0 + e1 * e1 + e2 * e2)
            if y == 0.0:
                continue
            x = xref[b]
            s = ((ci + coef[j]) * x + (ai + alpha[j]) * (y - x)) * weight[b] / y
            f0 += s * e0
            f1 += s * e1
            f2 += s * e2
        out[i, 0] = f0
        out[i, 1] = f1
        out[i, 2] = f2


@njit(parallel=True, cache=True)
def _strain_energy_kernel(Y, offsets, nbr, intact, xref, weight, theta, bulk, alpha, out):
    n = offsets.shape[0] - 1
    for i in prange(n):
        acc = 0.0
        for b in range(offsets[i], offsets[i + 1]):
            if intact[b] == 0:
                continue
            x = xref[b]
            ed = (_bond_length(Y, i, nbr[b]) - x) - theta[i] * x / 3.0
            acc += weight[b] * ed * ed
        out[i] = 0.5 * bulk[i] * theta[i] * theta[i] + 0.5 * alpha[i] * acc


class StateBasedBody:
    """Reference configuration of a peridynamic body and its force evaluation.

    Args:
        positions: reference positions (N, 3).
        volumes: point volumes (N,).
        bonds: neighbor structure.
        elasticity: per-point moduli and density.
        eos: equation of state, or ``None`` for a linear volumetric response.
        water_weight: ``saturation * biot`` multiplying the water pressure.
        eos_mask: points governed by the equation of state (default all).
    """

    def __init__(self, positions, volumes, bonds: Bonds, elasticity: PointElasticity,
                 eos: EosParams | None = None, water_weight: float = 0.0, eos_mask=None):
        self.X = _c(positions)
        self.volumes = _c(volumes)
        self.bonds = bonds
        self.elasticity = elasticity
        self.kind = INFLUENCE_KINDS[elasticity.influence]
        self.eos = eos
        self.eos_array = eos.as_array() if eos is not None else np.zeros(16)
        self.water_weight = float(water_weight)
        n = len(self.X)
        self.eos_mask = (np.ones(n, dtype=np.bool_) if eos_mask is None
                         else np.ascontiguousarray(eos_mask, dtype=np.bool_))
        self.xref, self.weight = bond_geometry(self.X, self.volumes, bonds, elasticity.influence)
        _check_horizons(bonds)
        self.m = np.empty(n)
        _weighted_volume_kernel(bonds.offsets, self.xref, self.weight, self.m)
        self.alpha = np.ascontiguousarray(elasticity.alpha(np.where(self.m > 0, self.m, 1.0)))
        self._iso = np.empty(n)
        self.pressure = np.zeros(n)
        self._flags = np.zeros(n, dtype=np.int64)
        self.eos_clamps = 0

    @property
    def n_points(self) -> int:
        return len(self.X)

    def all_intact(self) -> np.ndarray:
        return np.ones(len(self.bonds.neighbors), dtype=np.uint8)

    def dilatation(self, Y, intact) -> np.ndarray:
        out = np.empty(self.n_points)
        b = self.bonds
        _dilatation_kernel(_c(Y), b.offsets, b.neighbors, intact, self.xref, self.weight, self.m, out)
        return out

    def isotropic(self, theta) -> np.ndarray:
        """Isotropic force coefficient per point; also updates ``pressure``."""
        _isotropic_kernel(theta, self.m, self.elasticity.bulk, self.eos_mask, self.water_weight,
                          self.eos_array, self.eos is not None, self._iso, self.pressure, self._flags)
        if self.eos is not None:
            self.eos_clamps += int(np.count_nonzero(self._flags))
        return self._iso

    def force_density(self, Y, intact, theta=None, out=None) -> np.ndarray:
        """Internal force density at every point for current positions ``Y``."""
        Y = _c(Y)
        if theta is None:
            theta = self.dilatation(Y, intact)
        iso = self.isotropic(theta)
        if out is None:
            out = np.empty((self.n_points, 3))
        b = self.bonds
        coef = iso - self.alpha * theta / 3.0
        _force_kernel(Y, b.offsets, b.neighbors, intact, self.xref, self.weight, coef,
                      self.alpha, out)
        return out

    def strain_energy_density(self, Y, intact, theta=None) -> np.ndarray:
        """Elastic energy density ``k theta^2 / 2 + alpha/2 (omega e_d) . e_d`` per point."""
        Y = _c(Y)
        if theta is None:
            theta = self.dilatation(Y, intact)
        out = np.empty(self.n_points)
        b = self.bonds
        _strain_energy_kernel(Y, b.offsets, b.neighbors, intact, self.xref, self.weight, theta,
                              self.elasticity.bulk, self.alpha, out)
        return out

    def strain_energy(self, Y, intact) -> float:
        return float(self.strain_energy_density(Y, intact) @ self.volumes)


def _c(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def _check_horizons(bonds: Bonds):
    if bonds.n_points and np.any(bonds.counts() == 0):
        empty = int(np.flatnonzero(bonds.counts() == 0)[0])
        raise ModelError(f"point {empty} has an empty horizon")


def bond_geometry(positions, volumes, bonds: Bonds, influence_kind: str = "unit"):
    """Per CSR bond: reference length and ``omega * V_j * volume_factor``."""
    xref = np.empty(len(bonds.neighbors))
    weight = np.empty(len(bonds.neighbors))
    _bond_geometry_kernel(_c(positions), _c(volumes), bonds.offsets, bonds.neighbors,
                          bonds.dx, bonds.horizon, INFLUENCE_KINDS[influence_kind], xref, weight)
    return xref, weight


def weighted_volume(positions, volumes, bonds: Bonds, influence_kind: str = "unit") -> np.ndarray:
    """Weighted volume ``m = sum omega * xi^2 * V`` over every geometric bond."""
    _check_horizons(bonds)
    xref, weight = bond_geometry(positions, volumes, bonds, influence_kind)
    out = np.empty(bonds.n_points)
    _weighted_volume_kernel(bonds.offsets, xref, weight, out)
    return out


def dilatation(body: StateBasedBody, current, intact=None) -> np.ndarray:
    return body.dilatation(current, body.all_intact() if intact is None else intact)


def internal_force_density(body: StateBasedBody, current, intact=None) -> np.ndarray:
    return body.force_density(current, body.all_intact() if intact is None else intact)


def strain_energy_density(body: StateBasedBody, current, intact=None) -> np.ndarray:
    return body.strain_energy_density(current, body.all_intact() if intact is None else intact)
