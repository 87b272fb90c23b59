"""Ordinary state-based peridynamics for impact failure of wet concrete.

The package combines a stochastic three-phase mesostructure (aggregate,
mortar and interfacial transition zone), homogenized moduli of porous wet
mortar, rate- and saturation-dependent bond failure, a wet-concrete equation
of state and rigid-projectile contact, integrated explicitly in time.
"""

from __future__ import annotations

import warnings

# Old TBB builds trigger a harmless warning from numba at import time.
warnings.filterwarnings("ignore", message=".*TBB.*", module="numba")

from .config import ScenarioConfig, load, load_preset, loads  # noqa: E402
from .errors import (ArrivalNotDetected, ConfigError, DomainError, InstabilityError,  # noqa: E402
                     ModelError, PerikonError)

__version__ = "0.1.0"

__all__ = [
    "ArrivalNotDetected",
    "ConfigError",
    "DomainError",
    "InstabilityError",
    "ModelError",
    "PerikonError",
    "ScenarioConfig",
    "load",
    "load_preset",
    "loads",
]
