"""Scenario configuration files.

Configurations are INI files with one section per dataclass below. Every
key is optional (defaults apply), unknown sections and keys are rejected,
and floats are written with ``repr`` so that parse -> write -> parse is
exact.
"""

from __future__ import annotations

import configparser
import dataclasses
import io
import typing
from dataclasses import dataclass, field
from importlib import resources

from .errors import ConfigError

SCHEMA_VERSION = 1
KINDS = ("homogenize-sweep", "wave-modulus", "impact")


@dataclass
class HeaderConfig:
    schema_version: int = SCHEMA_VERSION
    kind: str = "impact"
    name: str = ""


@dataclass
class GeometryConfig:
    shape: str = "box"
    size: tuple = (0.75, 0.75, 0.3)
    dx: float = 0.015
    m_ratio: float = 4.0
    placement: str = "cell"

    @property
    def horizon(self) -> float:
        return self.m_ratio * self.dx


@dataclass
class PhaseConfig:
    youngs_modulus: float = 32e9
    poisson_ratio: float = 0.2
    density: float = 2400.0
    fracture_energy: float = 107.0


@dataclass
class StrengthConfig:
    compressive: float = 39.5e6
    tensile: float = 3.95e6


@dataclass
class MesoConfig:
    fractions: tuple = (0.4, 0.55, 0.05)
    porosity: float = 0.0
    critical_porosity: float = 1.0
    seed: int = 0


@dataclass
class WaterConfig:
    saturation: float = 0.0
    bulk_modulus: float = 2.2e9
    f1: float = 0.0
    f2: float = 0.0
    consistent_viscous_shear: bool = False


@dataclass
class DifConfig:
    enabled: bool = True
    c_comp: float = 0.007
    ref_rate_comp: float = 1.0
    zeta: float = 0.0307
    ref_rate_tens: float = 1e-6
    transition_rate: float = 30.0
    min_rate: float = 1e-6
    saturation_sensitivity: float = 0.15


@dataclass
class EosConfig:
    enabled: bool = True
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


@dataclass
class ProjectileConfig:
    mass: float = 2.44
    velocity: float = 333.0
    diameter: float = 0.04
    length: float = 0.25
    nose: str = "ogival"
    crh: float = 3.0
    gap: float = 0.1
    """Initial clearance beyond the contact distance, in grid spacings."""


@dataclass
class LoadingConfig:
    pressure: float = 1e6
    duration: float = 5e-6


@dataclass
class BoundaryConfig:
    culvert: bool = True
    shell_thickness: float = 0.0
    """Pinned lateral shell thickness; 0 means one horizon."""


@dataclass
class RunConfig:
    t_end: float = 2e-3
    safety: float = 0.5
    influence: str = "unit"
    failure: bool = True
    frame_interval: float = 0.0
    log_interval: int = 10
    energy_audit: bool = False
    checkpoint_interval: int = 0
    damage_threshold: float = 0.35


@dataclass
class WaveConfig:
    porosities: tuple = (0.0, 0.1, 0.3, 0.5, 0.7)
    saturations: tuple = (0.0, 1.0)
    stations: tuple = (0.75, 0.25)
    arrival_fraction: float = 0.01


@dataclass
class HomogenizeConfig:
    youngs_modulus: float = 26.3e9
    poisson_ratio: float = 0.2
    porosity_min: float = 0.0
    porosity_max: float = 0.7
    porosity_count: int = 100
    saturation_count: int = 100


def _phase(e, g0):
    return field(default_factory=lambda: PhaseConfig(youngs_modulus=e, fracture_energy=g0))


@dataclass
class ScenarioConfig:
    perikon: HeaderConfig = field(default_factory=HeaderConfig)
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    concrete: PhaseConfig = _phase(32e9, 107.0)
    aggregate: PhaseConfig = _phase(56.5e9, 365.0)
    mortar: PhaseConfig = _phase(26.3e9, 110.0)
    itz: PhaseConfig = _phase(20.2e9, 90.0)
    strength: StrengthConfig = field(default_factory=StrengthConfig)
    meso: MesoConfig = field(default_factory=MesoConfig)
    water: WaterConfig = field(default_factory=WaterConfig)
    dif: DifConfig = field(default_factory=DifConfig)
    eos: EosConfig = field(default_factory=EosConfig)
    projectile: ProjectileConfig = field(default_factory=ProjectileConfig)
    loading: LoadingConfig = field(default_factory=LoadingConfig)
    boundary: BoundaryConfig = field(default_factory=BoundaryConfig)
    run: RunConfig = field(default_factory=RunConfig)
    wave: WaveConfig = field(default_factory=WaveConfig)
    homogenize: HomogenizeConfig = field(default_factory=HomogenizeConfig)

    @property
    def kind(self) -> str:
        return self.perikon.kind

    def validate(self) -> "ScenarioConfig":
        validate(self)
        return self


# Section names in the file; the phase sections are namespaced.
_SECTION_NAMES = {
    "concrete": "material.concrete",
    "aggregate": "material.aggregate",
    "mortar": "material.mortar",
    "itz": "material.itz",
}


def _section_name(attr: str) -> str:
    return _SECTION_NAMES.get(attr, attr)


def _parse_value(text: str, kind, where: str):
    text = text.strip()
    try:
        if kind is bool:
            low = text.lower()
            if low in ("true", "yes", "on", "1"):
                return True
            if low in ("false", "no", "off", "0"):
                return False
            raise ValueError(text)
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
        if kind is tuple:
            return tuple(float(t) for t in text.split(",") if t.strip())
        return text
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {text!r} as {kind.__name__}") from None


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    return str(value)


def _hints(cls):
    return typing.get_type_hints(cls)


def loads(text: str, source: str = "<string>") -> ScenarioConfig:
    """Parse configuration text; raises :class:`ConfigError` on any problem."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    cfg = ScenarioConfig()
    by_section = {_section_name(f.name): f.name for f in dataclasses.fields(ScenarioConfig)}
    for section in parser.sections():
        if section not in by_section:
            raise ConfigError(f"{source}: unknown section [{section}]")
        attr = by_section[section]
        sub = getattr(cfg, attr)
        hints = _hints(type(sub))
        for key, raw in parser.items(section):
            if key not in hints:
                raise ConfigError(f"{source}: unknown key {key!r} in [{section}]")
            setattr(sub, key, _parse_value(raw, hints[key], f"{source} [{section}] {key}"))
    return validate(cfg)


def load(path) -> ScenarioConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from None
    return loads(text, source=str(path))


def dumps(cfg: ScenarioConfig) -> str:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    for f in dataclasses.fields(ScenarioConfig):
        sub = getattr(cfg, f.name)
        section = _section_name(f.name)
        parser.add_section(section)
        for key in _hints(type(sub)):
            value = getattr(sub, key)
            if value is not None:
                parser.set(section, key, _format_value(value))
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def dump(cfg: ScenarioConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(cfg))


def preset_names() -> list:
    files = resources.files("perikon") / "presets"
    return sorted(p.name[:-4] for p in files.iterdir() if p.name.endswith(".cfg"))


def load_preset(name: str) -> ScenarioConfig:
    """Load a shipped preset such as ``"desk-4.2"``."""
    path = resources.files("perikon") / "presets" / f"{name}.cfg"
    if not path.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return loads(path.read_text(encoding="utf-8"), source=f"preset {name}")


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def validate(cfg: ScenarioConfig) -> ScenarioConfig:
    h = cfg.perikon
    _require(h.schema_version == SCHEMA_VERSION,
             f"unsupported schema_version {h.schema_version} (expected {SCHEMA_VERSION})")
    _require(h.kind in KINDS, f"kind must be one of {', '.join(KINDS)}; got {h.kind!r}")

    g = cfg.geometry
    _require(g.shape in ("box", "cylinder"), f"unknown geometry shape {g.shape!r}")
    _require(len(g.size) == (3 if g.shape == "box" else 2),
             "box size needs 3 values, cylinder size needs (radius, thickness)")
    _require(all(s > 0 for s in g.size), "geometry size must be positive")
    _require(g.dx > 0, "dx must be positive")
    _require(g.m_ratio >= 3.0, f"m_ratio {g.m_ratio} is below 3")
    _require(g.placement in ("cell", "node"), f"unknown placement {g.placement!r}")

    for name in ("concrete", "aggregate", "mortar", "itz"):
        p = getattr(cfg, name)
        _require(p.youngs_modulus > 0 and p.density > 0 and p.fracture_energy > 0,
                 f"[material.{name}] moduli, density and fracture energy must be positive")
        _require(-1.0 < p.poisson_ratio < 0.5, f"[material.{name}] Poisson ratio out of range")

    s = cfg.strength
    _require(s.compressive > s.tensile > 0, "strengths must satisfy compressive > tensile > 0")

    m = cfg.meso
    _require(len(m.fractions) == 3 and all(f >= 0 for f in m.fractions),
             "meso fractions must be three non-negative numbers")
    _require(abs(sum(m.fractions) - 1.0) <= 1e-12,
             f"meso fractions sum to {sum(m.fractions):.15g}, expected 1")
    _require(m.critical_porosity > 0, "critical porosity must be positive")
    _require(0 <= m.porosity <= m.critical_porosity, "porosity must lie in [0, critical porosity]")
    _require(m.porosity < 1, "porosity must be below 1")
    _require(m.seed >= 0, "seed must be non-negative")

    w = cfg.water
    _require(0 <= w.saturation <= 1, "saturation must lie in [0, 1]")
    _require(w.bulk_modulus > 0, "water bulk modulus must be positive")

    d = cfg.dif
    for key in ("c_comp", "ref_rate_comp", "zeta", "ref_rate_tens", "transition_rate",
                "min_rate", "saturation_sensitivity"):
        _require(getattr(d, key) > 0, f"[dif] {key} must be positive")

    e = cfg.eos
    _require(e.mu_lock > e.mu_crush > 0, "[eos] requires mu_lock > mu_crush > 0")
    _require(e.rho0 > 0 and e.sound_speed > 0 and e.blend_band > 0,
             "[eos] rho0, sound_speed and blend_band must be positive")
    _require(e.stable_compression > e.mu_crush, "[eos] stable_compression must exceed mu_crush")

    p = cfg.projectile
    _require(p.mass > 0, "projectile mass must be positive")
    _require(p.velocity >= 0, "projectile velocity must be non-negative")
    _require(p.diameter > 0 and p.length > 0, "projectile dimensions must be positive")
    _require(p.nose in ("hemispherical", "ogival", "flat"), f"unknown nose shape {p.nose!r}")
    _require(p.crh >= 0.5, "ogive caliber-radius-head must be at least 0.5")
    _require(p.gap >= 0, "projectile gap must be non-negative")

    lo = cfg.loading
    _require(lo.duration > 0, "pulse duration must be positive")
    _require(cfg.boundary.shell_thickness >= 0, "shell thickness must be non-negative")

    r = cfg.run
    _require(r.t_end > 0, "t_end must be positive")
    _require(0 < r.safety <= 1, "safety factor must lie in (0, 1]")
    _require(r.influence in ("unit", "inverse"), f"unknown influence {r.influence!r}")
    _require(r.frame_interval >= 0, "frame interval must be non-negative")
    _require(r.log_interval >= 1, "log interval must be at least 1")
    _require(r.checkpoint_interval >= 0, "checkpoint interval must be non-negative")
    _require(0 < r.damage_threshold <= 1, "damage threshold must lie in (0, 1]")

    wv = cfg.wave
    _require(len(wv.porosities) >= 1 and all(0 <= x < 1 for x in wv.porosities),
             "wave porosities must lie in [0, 1)")
    _require(len(wv.saturations) >= 1 and all(0 <= x <= 1 for x in wv.saturations),
             "wave saturations must lie in [0, 1]")
    _require(len(wv.stations) == 2 and all(0 < x < 1 for x in wv.stations)
             and wv.stations[0] != wv.stations[1], "wave needs two distinct stations in (0, 1)")
    _require(0 < wv.arrival_fraction < 1, "arrival fraction must lie in (0, 1)")

    hz = cfg.homogenize
    _require(hz.youngs_modulus > 0 and -1 < hz.poisson_ratio < 0.5,
             "[homogenize] matrix moduli out of range")
    _require(0 <= hz.porosity_min <= hz.porosity_max < 1, "[homogenize] porosity range invalid")
    _require(hz.porosity_count >= 1 and hz.saturation_count >= 1, "[homogenize] counts must be >= 1")
    return cfg
