"""Effective bulk and shear moduli of porous, saturated and unsaturated mortar.

The mortar is treated as a two-phase spherical composite (matrix + pores).
Pore water is replaced by an equivalent porosity of the matrix that has the
water's bulk modulus; unsaturated mortar first absorbs the dry and half of
the partially filled pores into an "equivalent body", then embeds the water
in it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class MatrixModuli:
    bulk: float
    shear: float

    def __post_init__(self):
        if self.bulk <= 0 or self.shear <= 0:
            raise DomainError("matrix moduli must be positive")

    @classmethod
    def from_young(cls, youngs_modulus: float, poisson_ratio: float) -> "MatrixModuli":
        bulk, shear = bulk_shear_from_young(youngs_modulus, poisson_ratio)
        return cls(bulk, shear)


@dataclass(frozen=True)
class WaterProperties:
    """Pore water: bulk modulus and the viscous shear-enhancement coefficients."""

    bulk: float = 2.2e9
    f1: float = 0.0
    f2: float = 0.0


@dataclass(frozen=True)
class SaturationState:
    """Split of the total porosity into saturated, half-filled and dry pores.

    The saturated pore share is ``porosity * saturation``; the remainder is
    kept as dry porosity, so ``unsaturated`` is zero. The equivalent-body
    formulas only depend on ``porosity * saturation``.
    """

    porosity: float
    saturation: float

    def __post_init__(self):
        _check_unit("porosity", self.porosity)
        _check_unit("saturation", self.saturation)

    @property
    def saturated(self) -> float:
        return self.porosity * self.saturation

    @property
    def unsaturated(self) -> float:
        return 0.0

    @property
    def dry(self) -> float:
        return self.porosity - self.saturated


def _check_unit(name, value):
    v = np.asarray(value, dtype=float)
    if np.any(~np.isfinite(v)) or np.any(v < 0) or np.any(v > 1):
        raise DomainError(f"{name} must lie in [0, 1]")


def bulk_shear_from_young(youngs_modulus, poisson_ratio):
    """Isotropic (K, G) from (E, nu)."""
    e = np.asarray(youngs_modulus, dtype=float)
    nu = float(poisson_ratio)
    if not -1.0 < nu < 0.5:
        raise DomainError("Poisson ratio must lie in (-1, 0.5)")
    return e / (3 * (1 - 2 * nu)), e / (2 * (1 + nu))


def young_poisson_from_bulk_shear(bulk, shear):
    """Isotropic (E, nu) from (K, G); zero moduli map to E = 0, nu = nan-free 0."""
    k = np.asarray(bulk, dtype=float)
    g = np.asarray(shear, dtype=float)
    denom = 3 * k + g
    with np.errstate(invalid="ignore", divide="ignore"):
        e = np.where(denom > 0, 9 * k * g / denom, 0.0)
        nu = np.where(denom > 0, (3 * k - 2 * g) / (2 * denom), 0.0)
    return e, nu


def _porous_bulk(k_m, mu_m, phi):
    return 4 * k_m * mu_m * (1 - phi) / (4 * mu_m + 3 * k_m * phi)


def dry_porous_moduli(matrix: MatrixModuli, porosity):
    """(K*, mu*) of matrix with empty spherical pores."""
    _check_unit("porosity", porosity)
    phi = np.asarray(porosity, dtype=float)
    k = _porous_bulk(matrix.bulk, matrix.shear, phi)
    mu = matrix.shear * (1 - phi**2)
    return _maybe_scalar(k), _maybe_scalar(mu)


def water_equivalent_porosity(matrix: MatrixModuli, water_bulk: float) -> float:
    """Porosity at which the porous matrix is as compressible as water.

    This is the exact inverse of the porous bulk-modulus relation, so
    ``dry_porous_moduli(matrix, phi1)[0] == water_bulk``.
    """
    if water_bulk <= 0:
        raise DomainError("water bulk modulus must be positive")
    if water_bulk > matrix.bulk:
        raise DomainError(
            f"water bulk modulus {water_bulk:g} exceeds the matrix bulk modulus {matrix.bulk:g}"
        )
    k_m, mu_m = matrix.bulk, matrix.shear
    return 4 * mu_m * (k_m - water_bulk) / (k_m * (3 * water_bulk + 4 * mu_m))


def saturated_moduli(matrix: MatrixModuli, water: WaterProperties, porosity):
    """(K_w*, mu_w*) of fully saturated porous matrix."""
    _check_unit("porosity", porosity)
    phi = np.asarray(porosity, dtype=float)
    phi1 = water_equivalent_porosity(matrix, water.bulk)
    k = _porous_bulk(matrix.bulk, matrix.shear, phi * phi1)
    mu = (1 + water.f1 * phi**2 + water.f2 * phi) * (1 - phi**2) * matrix.shear
    return _maybe_scalar(k), _maybe_scalar(mu)


def unsaturated_moduli(
    matrix: MatrixModuli,
    water: WaterProperties,
    porosity,
    saturation,
    consistent_viscous_shear: bool = False,
):
    """(K*, mu*) of partially saturated porous matrix.

    With ``consistent_viscous_shear`` the viscous enhancement factor of the
    saturated shear modulus is applied with the water-filled porosity
    ``porosity * saturation``, making ``saturation = 1`` agree with
    :func:`saturated_moduli` for non-zero ``f1``/``f2``.
    """
    _check_unit("porosity", porosity)
    _check_unit("saturation", saturation)
    phi = np.asarray(porosity, dtype=float)
    w = np.asarray(saturation, dtype=float)
    phi_w = phi * w
    phi1 = water_equivalent_porosity(matrix, water.bulk)
    with np.errstate(invalid="ignore", divide="ignore"):
        body_porosity = np.where(phi_w < 1, (phi - phi_w) / (1 - phi_w), 0.0)
    k1 = _porous_bulk(matrix.bulk, matrix.shear, body_porosity)
    mu1 = matrix.shear * (1 - body_porosity**2)
    phi2 = phi_w * phi1
    with np.errstate(invalid="ignore", divide="ignore"):
        k = np.where(mu1 > 0, 4 * k1 * mu1 * (1 - phi2) / (4 * mu1 + 3 * k1 * phi2), 0.0)
    mu = mu1 * (1 - phi_w**2)
    if consistent_viscous_shear:
        mu = mu * (1 + water.f1 * phi_w**2 + water.f2 * phi_w)
    return _maybe_scalar(k), _maybe_scalar(mu)


def effective_moduli(
    matrix: MatrixModuli,
    water: WaterProperties,
    porosity: float,
    saturation: float,
    consistent_viscous_shear: bool = False,
):
    """Mortar moduli at any saturation; dry uses the empty-pore relation exactly."""
    if saturation == 0:
        return dry_porous_moduli(matrix, porosity)
    return unsaturated_moduli(matrix, water, porosity, saturation, consistent_viscous_shear)


def sweep(matrix: MatrixModuli, water: WaterProperties, porosities, saturations,
          consistent_viscous_shear: bool = False) -> np.ndarray:
    """Rows of (phi, w, K*, mu*, E*, nu*) over the product grid."""
    phi, w = np.meshgrid(np.asarray(porosities, float), np.asarray(saturations, float),
                         indexing="ij")
    phi, w = phi.ravel(), w.ravel()
    k, mu = unsaturated_moduli(matrix, water, phi, w, consistent_viscous_shear)
    e, nu = young_poisson_from_bulk_shear(k, mu)
    return np.column_stack([phi, w, k, mu, e, nu])


def _maybe_scalar(a):
    a = np.asarray(a)
    return float(a) if a.ndim == 0 else a
