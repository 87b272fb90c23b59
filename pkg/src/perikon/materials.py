"""Per-phase material data and its mapping onto points and bond classes.

Mortar points take the homogenized (porous, possibly wet) moduli of the
mortar matrix; aggregate and ITZ points keep their phase moduli. Failure
thresholds are set per effective bond class from the class modulus and
fracture energy, then reduced for saturation by the strength factor
``1 - 0.2 w`` and the stiffening of the wet mortar.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constitutive import PointElasticity
from .errors import ConfigError
from .failure import ClassThresholds, StrengthParams, static_critical_stretches, wet_static_strength
from .homogenization import (MatrixModuli, WaterProperties, bulk_shear_from_young, effective_moduli,
                             young_poisson_from_bulk_shear)
from .mesostructure import EffectiveClass, Phase


@dataclass(frozen=True)
class PhaseMaterial:
    youngs_modulus: float
    poisson_ratio: float = 0.2
    density: float = 2400.0
    fracture_energy: float = 100.0

    def __post_init__(self):
        if self.youngs_modulus <= 0 or self.density <= 0 or self.fracture_energy <= 0:
            raise ConfigError("Young's modulus, density and fracture energy must be positive")
        if not -1.0 < self.poisson_ratio < 0.5:
            raise ConfigError("Poisson ratio must lie in (-1, 0.5)")

    @property
    def bulk(self) -> float:
        return float(bulk_shear_from_young(self.youngs_modulus, self.poisson_ratio)[0])

    @property
    def shear(self) -> float:
        return float(bulk_shear_from_young(self.youngs_modulus, self.poisson_ratio)[1])


@dataclass(frozen=True)
class WetConcreteMaterial:
    """Three phases plus the homogenized concrete used for aggregate-mortar bonds.

    Defaults are the concrete of the impact experiments: E of 32 / 56.5 /
    26.3 / 20.2 GPa and fracture energies of 107 / 365 / 110 / 90 N/m for
    concrete / aggregate / mortar / ITZ.
    """

    concrete: PhaseMaterial = PhaseMaterial(32e9, fracture_energy=107.0)
    aggregate: PhaseMaterial = PhaseMaterial(56.5e9, fracture_energy=365.0)
    mortar: PhaseMaterial = PhaseMaterial(26.3e9, fracture_energy=110.0)
    itz: PhaseMaterial = PhaseMaterial(20.2e9, fracture_energy=90.0)
    strength: StrengthParams = StrengthParams()
    water: WaterProperties = WaterProperties()
    porosity: float = 0.0
    saturation: float = 0.0
    consistent_viscous_shear: bool = False
    _mortar: tuple = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0 <= self.porosity < 1:
            raise ConfigError("porosity must lie in [0, 1)")
        if not 0 <= self.saturation <= 1:
            raise ConfigError("saturation must lie in [0, 1]")
        matrix = MatrixModuli(self.mortar.bulk, self.mortar.shear)
        wet = effective_moduli(matrix, self.water, self.porosity, self.saturation,
                               self.consistent_viscous_shear)
        dry = effective_moduli(matrix, self.water, self.porosity, 0.0)
        object.__setattr__(self, "_mortar", (wet, dry))

    @property
    def mortar_moduli(self):
        """(K, G) of the homogenized mortar at the configured porosity and saturation."""
        return self._mortar[0]

    @property
    def mortar_youngs_ratio(self) -> float:
        """Young's modulus of the wet homogenized mortar over the dry one."""
        (kw, gw), (kd, gd) = self._mortar
        e_w = young_poisson_from_bulk_shear(kw, gw)[0]
        e_d = young_poisson_from_bulk_shear(kd, gd)[0]
        return float(e_w / e_d)

    def phase_moduli(self) -> np.ndarray:
        """Rows (K, G, rho) indexed by :class:`Phase`."""
        k_m, g_m = self.mortar_moduli
        rows = np.empty((len(Phase), 3))
        rows[Phase.AGGREGATE] = self.aggregate.bulk, self.aggregate.shear, self.aggregate.density
        rows[Phase.MORTAR] = k_m, g_m, self.mortar.density
        rows[Phase.ITZ] = self.itz.bulk, self.itz.shear, self.itz.density
        return rows

    def point_elasticity(self, phases: np.ndarray, influence: str = "unit") -> PointElasticity:
        rows = self.phase_moduli()[np.asarray(phases, dtype=np.intp)]
        return PointElasticity(rows[:, 0], rows[:, 1], rows[:, 2], influence)

    def class_materials(self):
        out = [None] * len(EffectiveClass)
        out[EffectiveClass.AGGREGATE] = self.aggregate
        out[EffectiveClass.MORTAR] = self.mortar
        out[EffectiveClass.INTERFACE] = self.itz
        out[EffectiveClass.HOMOGENIZED] = self.concrete
        return out

    def thresholds(self, horizon: float) -> ClassThresholds:
        """Wet static critical stretches for every effective bond class.

        Dry stretches come from the class bulk modulus and fracture energy
        (tension) and the concrete compressive strength over the class
        modulus (compression). Saturation scales both by the strength factor
        and, for mortar bonds, by the inverse wet-to-dry mortar modulus ratio.
        """
        n = len(EffectiveClass)
        tensile = np.empty(n)
        compressive = np.empty(n)
        f_c_w, _ = wet_static_strength(self.strength.compressive, self.strength.tensile,
                                       self.saturation)
        strength_factor = f_c_w / self.strength.compressive
        for cls, mat in enumerate(self.class_materials()):
            s_t, s_c = static_critical_stretches(mat.bulk, horizon, mat.youngs_modulus,
                                                 mat.fracture_energy, self.strength.compressive)
            stiffening = self.mortar_youngs_ratio if cls == EffectiveClass.MORTAR else 1.0
            tensile[cls] = s_t * strength_factor / stiffening
            compressive[cls] = s_c * strength_factor / stiffening
        return ClassThresholds(tensile, compressive)

    @property
    def strength_ratio(self) -> float:
        return self.strength.tensile / self.strength.compressive

    def max_dilatational_speed(self) -> float:
        rows = self.phase_moduli()
        return float(np.max(np.sqrt((rows[:, 0] + 4.0 * rows[:, 1] / 3.0) / rows[:, 2])))
