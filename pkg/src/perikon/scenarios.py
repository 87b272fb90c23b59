"""Experiment drivers: homogenization sweep, wave-speed modulus and projectile impact."""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import config as cfgmod
from .constitutive import EosParams, StateBasedBody, biot_coefficient
from .contact import ContactModel, ContactParams, build_projectile
from .errors import ArrivalNotDetected, ConfigError
from .failure import BondFailureState, DifParams, StrengthParams
from .homogenization import MatrixModuli, WaterProperties, sweep
from .lattice import (ENTRY_FACE, EXIT_FACE, LOADED, PINNED, Lattice, build_lattice,
                      build_neighbor_lists)
from .materials import PhaseMaterial, WetConcreteMaterial
from .mesostructure import (MesoModel, apply_pore_prebreak, assign_phases, bond_classes)
from .metrics import crater_metrics
from .output import CsvLog, FrameWriter, ensure_dir, write_csv, write_summary
from .solver import Pulse, Simulation

# ------------------------------------------------------------------ builders


def _phase(p: cfgmod.PhaseConfig) -> PhaseMaterial:
    return PhaseMaterial(p.youngs_modulus, p.poisson_ratio, p.density, p.fracture_energy)


def build_material(cfg: cfgmod.ScenarioConfig) -> WetConcreteMaterial:
    w = cfg.water
    return WetConcreteMaterial(
        concrete=_phase(cfg.concrete), aggregate=_phase(cfg.aggregate),
        mortar=_phase(cfg.mortar), itz=_phase(cfg.itz),
        strength=StrengthParams(cfg.strength.compressive, cfg.strength.tensile),
        water=WaterProperties(w.bulk_modulus, w.f1, w.f2),
        porosity=cfg.meso.porosity, saturation=w.saturation,
        consistent_viscous_shear=w.consistent_viscous_shear,
    )


def build_eos(cfg: cfgmod.ScenarioConfig) -> EosParams | None:
    e = cfg.eos
    if not e.enabled:
        return None
    return EosParams(e.k1, e.k2, e.k3, e.p_crush, e.mu_crush, e.p_lock, e.mu_lock, e.rho0,
                     e.sound_speed, e.s1, e.s2, e.s3, e.gamma0, e.alpha, e.e_int, e.blend_band,
                     e.stable_compression)


def build_dif(cfg: cfgmod.ScenarioConfig) -> DifParams:
    d = cfg.dif
    return DifParams(d.c_comp, d.ref_rate_comp, d.zeta, d.ref_rate_tens, d.transition_rate,
                     d.min_rate, d.saturation_sensitivity)


def dif_array(cfg: cfgmod.ScenarioConfig, material: WetConcreteMaterial) -> np.ndarray:
    p = build_dif(cfg).as_array(cfg.water.saturation, material.strength_ratio)
    if not cfg.dif.enabled:
        # Rate-independent: zero exponents and slopes give factors of exactly 1,
        # and an infinite transition rate keeps tension on the power-law branch.
        p[0] = 0.0
        p[2] = 0.0
        p[4] = np.inf
        p[6] = 1.0
        p[7] = 1.0
    return p


@dataclass
class Target:
    lattice: Lattice
    bonds: object
    phases: np.ndarray
    pair_type: np.ndarray
    pair_class: np.ndarray
    prebroken: np.ndarray


def build_target(cfg: cfgmod.ScenarioConfig) -> Target:
    g = cfg.geometry
    lat = build_lattice(g.shape, g.size, g.dx, g.horizon, g.placement)
    bonds = build_neighbor_lists(lat.positions, lat.horizon, lat.dx)
    m = cfg.meso
    meso = MesoModel(tuple(m.fractions), m.porosity, m.critical_porosity, m.seed)
    phases = assign_phases(lat.n_points, meso)
    types, classes = bond_classes(phases, bonds.pair_i, bonds.pair_j)
    prebroken = apply_pore_prebreak(bonds.pair_i, bonds.pair_j, meso.pre_damage, m.seed)
    return Target(lat, bonds, phases, types, classes, prebroken)


def tag_boundaries(lat: Lattice, cfg: cfgmod.ScenarioConfig, pin_lateral: bool) -> np.ndarray:
    X = lat.positions
    lo, hi = lat.extent_min, lat.extent_max
    tags = np.zeros(lat.n_points, np.uint8)
    tags[X[:, 2] - lo[2] < lat.dx] |= ENTRY_FACE
    tags[hi[2] - X[:, 2] < lat.dx] |= EXIT_FACE
    if pin_lateral:
        t = cfg.boundary.shell_thickness or lat.horizon
        if lat.shape == "cylinder":
            c = lat.axis_center
            r = np.hypot(X[:, 0] - c[0], X[:, 1] - c[1])
            shell = r > 0.5 * (hi[0] - lo[0]) - t
        else:
            shell = ((X[:, 0] - lo[0] < t) | (hi[0] - X[:, 0] < t)
                     | (X[:, 1] - lo[1] < t) | (hi[1] - X[:, 1] < t))
        tags[shell] |= PINNED
    lat.tags = tags
    return tags


def build_body(cfg, target: Target, material: WetConcreteMaterial, eos=None) -> StateBasedBody:
    lat = target.lattice
    el = material.point_elasticity(target.phases, cfg.run.influence)
    weight = 0.0
    if eos is not None:
        weight = cfg.water.saturation * biot_coefficient(cfg.meso.porosity)
    return StateBasedBody(lat.positions, lat.volumes, target.bonds, el, eos=eos,
                          water_weight=weight)


# ------------------------------------------------------------- homogenize


def run_homogenize_sweep(cfg: cfgmod.ScenarioConfig, out_dir=None) -> np.ndarray:
    """Effective mortar moduli over a (porosity, saturation) grid.

    Returns:
        Rows of (phi, w, K, G, E, nu).
    """
    h = cfg.homogenize
    matrix = MatrixModuli.from_young(h.youngs_modulus, h.poisson_ratio)
    water = WaterProperties(cfg.water.bulk_modulus, cfg.water.f1, cfg.water.f2)
    phi = np.linspace(h.porosity_min, h.porosity_max, h.porosity_count)
    w = np.linspace(0.0, 1.0, h.saturation_count) if h.saturation_count > 1 else np.zeros(1)
    table = sweep(matrix, water, phi, w, cfg.water.consistent_viscous_shear)
    if out_dir is not None:
        ensure_dir(out_dir)
        write_csv(os.path.join(out_dir, "homogenize.csv"),
                  ["porosity", "saturation", "bulk", "shear", "youngs", "poisson"], table)
        write_summary(os.path.join(out_dir, "summary.json"), {
            "kind": "homogenize-sweep", "name": cfg.perikon.name, "rows": len(table),
            "matrix_youngs": h.youngs_modulus, "water_bulk": water.bulk,
        })
    return table


# ------------------------------------------------------------------- wave


@dataclass
class WaveRun:
    porosity: float
    saturation: float
    speed: float
    t_near: float
    t_far: float
    steps: int
    ratio: float = float("nan")


def _station_points(X, lat: Lattice, frac: float) -> np.ndarray:
    lo, hi = lat.extent_min, lat.extent_max
    y_target = lo[1] + frac * (hi[1] - lo[1])
    layer_y = X[np.argmin(np.abs(X[:, 1] - y_target)), 1]
    xc = 0.5 * (lo[0] + hi[0])
    sel = (np.abs(X[:, 1] - layer_y) < 1e-9 * lat.dx + 1e-12) & (np.abs(X[:, 0] - xc) <= lat.horizon)
    return np.flatnonzero(sel)


def _crossing(t, signal, level):
    k = int(np.argmax(signal > level))
    if signal[k] <= level:
        return None
    if k == 0:
        return float(t[0])
    s0, s1 = signal[k - 1], signal[k]
    return float(t[k - 1] + (level - s0) / (s1 - s0) * (t[k] - t[k - 1]))


def wave_speed(cfg: cfgmod.ScenarioConfig, porosity: float, saturation: float,
               log=None) -> WaveRun:
    """Measure the pulse front speed between the two stations of the slab.

    The pulse acts on the top layer (largest y) towards -y. A station's
    arrival is the first time its mean |u_y| exceeds ``arrival_fraction``
    of the near station's peak up to the moment the far station is reached.
    """
    c = replace(cfg, meso=replace(cfg.meso, porosity=porosity),
                water=replace(cfg.water, saturation=saturation))
    target = build_target(c)
    lat = target.lattice
    material = build_material(c)
    body = build_body(c, target, material, None)
    X = lat.positions
    top = X[:, 1] >= X[:, 1].max() - 0.5 * lat.dx
    tag_boundaries(lat, c, pin_lateral=False)
    lat.tags[top] |= LOADED
    pulse = Pulse(c.loading.pressure, c.loading.duration, (0.0, -1.0, 0.0), lat.dx)
    # Elastic run: only the pre-broken pore bonds are removed.
    intact = BondFailureState(target.bonds, target.pair_class, target.prebroken).intact
    sim = Simulation(body, pulse=pulse, loaded=top, safety=c.run.safety, intact=intact)

    near_frac, far_frac = c.wave.stations
    near = _station_points(X, lat, near_frac)
    far = _station_points(X, lat, far_frac)
    y_near, y_far = X[near, 1].mean(), X[far, 1].mean()
    frac = c.wave.arrival_fraction
    times, s_near, s_far = [0.0], [0.0], [0.0]
    peak = 0.0
    n_max = int(math.ceil(c.run.t_end / sim.dt))
    while sim.step_count < n_max:
        sim.step()
        un = float(np.abs(sim.u[near, 1].mean()))
        uf = float(np.abs(sim.u[far, 1].mean()))
        times.append(sim.time)
        s_near.append(un)
        s_far.append(uf)
        peak = max(peak, un)
        if log is not None and sim.step_count % c.run.log_interval == 0:
            log(sim, un, uf)
        if peak > 0 and uf > frac * peak and sim.time > c.loading.duration:
            break
    else:
        raise ArrivalNotDetected(
            f"wave front did not reach the far station within t_end={c.run.t_end:g} s "
            f"(porosity={porosity:g}, saturation={saturation:g})")
    t = np.asarray(times)
    level = frac * peak
    t_near = _crossing(t, np.asarray(s_near), level)
    t_far = _crossing(t, np.asarray(s_far), level)
    if t_near is None or t_far is None or t_far <= t_near:
        raise ArrivalNotDetected("could not order the station arrivals")
    speed = abs(y_near - y_far) / (t_far - t_near)
    return WaveRun(porosity, saturation, speed, t_near, t_far, sim.step_count)


def run_wave_modulus(cfg: cfgmod.ScenarioConfig, out_dir=None, progress=None) -> list:
    """Wave speed and modulus ratio ``(C / C_ref)^2`` for every (porosity, saturation).

    The reference speed is the zero-porosity run.
    """
    runs = []
    ref = wave_speed(cfg, 0.0, 0.0)
    ref.ratio = 1.0
    for w in cfg.wave.saturations:
        for phi in cfg.wave.porosities:
            if phi == 0.0:
                r = replace(ref, saturation=float(w))
            else:
                r = wave_speed(cfg, float(phi), float(w))
                r.ratio = (r.speed / ref.speed) ** 2
            runs.append(r)
            if progress is not None:
                progress(r)
    if out_dir is not None:
        ensure_dir(out_dir)
        write_csv(os.path.join(out_dir, "wave_modulus.csv"),
                  ["porosity", "saturation", "wave_speed", "t_near", "t_far", "modulus_ratio"],
                  [[r.porosity, r.saturation, r.speed, r.t_near, r.t_far, r.ratio] for r in runs])
        write_summary(os.path.join(out_dir, "summary.json"), {
            "kind": "wave-modulus", "name": cfg.perikon.name, "reference_speed": ref.speed,
            "runs": [r.__dict__ for r in runs],
        })
    return runs


# ----------------------------------------------------------------- impact


@dataclass
class RunMetrics:
    residual_velocity: float = 0.0
    peak_acceleration: float = 0.0
    penetration_depth: float = 0.0
    crater_radius: float = 0.0
    crater_depth: float = 0.0
    scabbing_radius: float = 0.0
    scabbing_depth: float = 0.0
    broken_bonds: int = 0
    eos_clamps: int = 0
    steps: int = 0
    dt: float = 0.0
    wall_time: float = 0.0


@dataclass
class ImpactResult:
    metrics: RunMetrics
    series: np.ndarray
    damage: np.ndarray
    relative_damage: np.ndarray
    frames: list = field(default_factory=list)


SERIES_HEADER = ["step", "time", "position", "velocity", "acceleration", "depth", "broken",
                 "kinetic", "strain", "contact", "projectile_kinetic", "dissipated", "total"]


def build_impact(cfg: cfgmod.ScenarioConfig, dump_dir=None):
    """Assemble target, projectile and solver for an impact scenario."""
    target = build_target(cfg)
    lat = target.lattice
    material = build_material(cfg)
    eos = build_eos(cfg)
    body = build_body(cfg, target, material, eos)
    tags = tag_boundaries(lat, cfg, pin_lateral=cfg.boundary.culvert)
    pinned = (tags & PINNED) > 0

    failure = thresholds = dif = None
    if cfg.run.failure:
        failure = BondFailureState(target.bonds, target.pair_class, target.prebroken)
        thresholds = material.thresholds(lat.horizon)
        dif = dif_array(cfg, material)

    p = cfg.projectile
    proj = build_projectile(p.diameter, p.length, lat.dx, p.mass, p.nose, p.crh)
    contact = ContactModel(ContactParams.from_bulk_modulus(material.concrete.bulk, lat.horizon, lat.dx))
    z_first = lat.positions[:, 2].min()
    tip = proj.offsets[:, 2].max()
    c = lat.axis_center
    proj.position = np.array([c[0], c[1],
                              z_first - contact.params.distance - p.gap * lat.dx - tip])
    proj.velocity = np.array([0.0, 0.0, p.velocity])

    intact = None
    if not cfg.run.failure:
        intact = BondFailureState(target.bonds, target.pair_class, target.prebroken).intact
    sim = Simulation(body, failure, thresholds, dif, pinned=pinned, projectile=proj,
                     contact=contact, safety=cfg.run.safety, energy_audit=cfg.run.energy_audit,
                     dump_dir=dump_dir, intact=intact)
    return sim, target


def _series_row(sim: Simulation, entry_face: float, audit: bool):
    p = sim.projectile
    tip_z = p.position[2] + p.offsets[:, 2].max()
    broken = sim.failure.n_load_broken if sim.failure is not None else 0
    row = [sim.step_count, sim.time, float(p.position[2]), float(p.velocity[2]),
           float(sim.projectile_accel[2]), float(max(tip_z - entry_face, 0.0)), broken]
    if audit:
        e = sim.energy()
        row += [e.kinetic, e.strain, e.contact, e.projectile, e.dissipated, e.total]
    else:
        row += [float("nan")] * 6
    return row


def _frame_fields(sim: Simulation, target: Target):
    if sim.failure is not None:
        raw, _ = sim.failure.damage(sim.body.X, sim.body.volumes)
    else:
        raw = np.zeros(sim.body.n_points)
    return {
        "displacement": sim.u, "velocity": sim.v, "damage": raw,
        "phase": target.phases.astype(np.int32), "pressure": sim.body.pressure,
    }


def run_impact(cfg: cfgmod.ScenarioConfig, out_dir=None, progress=None) -> ImpactResult:
    """Run a projectile impact and extract the end-of-run metrics.

    Args:
        cfg: validated impact configuration.
        out_dir: directory for the CSV series, frames, checkpoints and summary.
        progress: optional ``callback(sim)`` called every ``log_interval`` steps.
    """
    if cfg.kind != "impact":
        raise ConfigError(f"configuration kind is {cfg.kind!r}, expected 'impact'")
    t0 = time.perf_counter()
    if out_dir is not None:
        ensure_dir(out_dir)
    sim, target = build_impact(cfg, dump_dir=out_dir)
    lat = target.lattice
    entry = float(lat.extent_min[2])
    audit = cfg.run.energy_audit
    rows = []
    log = CsvLog(os.path.join(out_dir, "projectile.csv"), SERIES_HEADER) if out_dir else None
    frames = FrameWriter(os.path.join(out_dir, "frames")) if out_dir and cfg.run.frame_interval > 0 else None
    frame_every = max(int(round(cfg.run.frame_interval / sim.dt)), 1) if frames else 0
    peak_acc = 0.0

    def record(s: Simulation):
        row = _series_row(s, entry, audit)
        rows.append(row)
        if log is not None:
            log.write(row)

    try:
        record(sim)
        if frames is not None:
            frames.submit(lat.positions, _frame_fields(sim, target), f"t={sim.time!r}")
        n_steps = int(math.ceil(cfg.run.t_end / sim.dt - 1e-9))
        while sim.step_count < n_steps:
            sim.step()
            peak_acc = max(peak_acc, float(np.linalg.norm(sim.projectile_accel)))
            k = sim.step_count
            if k % cfg.run.log_interval == 0 or k == n_steps:
                record(sim)
                if progress is not None:
                    progress(sim)
            if frames is not None and k % frame_every == 0:
                frames.submit(lat.positions, _frame_fields(sim, target), f"t={sim.time!r}")
            if out_dir and cfg.run.checkpoint_interval and k % cfg.run.checkpoint_interval == 0:
                sim.save_checkpoint(os.path.join(out_dir, "checkpoint.bin"))
    finally:
        if log is not None:
            log.close()
        if frames is not None:
            frames.close()

    if sim.failure is not None:
        raw, rel = sim.failure.damage(sim.body.X, sim.body.volumes)
    else:
        raw = rel = np.zeros(lat.n_points)
    crater, scab = crater_metrics(lat.positions, raw, lat.dx, lat.extent_min, lat.extent_max,
                                  threshold=cfg.run.damage_threshold)
    series = np.array(rows, dtype=float)
    metrics = RunMetrics(
        residual_velocity=float(sim.projectile.velocity[2]),
        peak_acceleration=peak_acc,
        penetration_depth=float(series[:, 5].max()),
        crater_radius=crater.radius, crater_depth=crater.depth,
        scabbing_radius=scab.radius, scabbing_depth=scab.depth,
        broken_bonds=sim.failure.n_load_broken if sim.failure is not None else 0,
        eos_clamps=sim.body.eos_clamps, steps=sim.step_count, dt=sim.dt,
        wall_time=time.perf_counter() - t0,
    )
    if out_dir is not None:
        summary = {"kind": "impact", "name": cfg.perikon.name, "points": lat.n_points,
                   "projectile_points": sim.projectile.n_points, "bond_pairs": target.bonds.n_pairs,
                   "prebroken_bonds": int(np.count_nonzero(target.prebroken)),
                   "metrics": {k: v for k, v in metrics.__dict__.items() if k != "wall_time"}}
        write_summary(os.path.join(out_dir, "summary.json"), summary)
    return ImpactResult(metrics, series, raw, rel, frames.paths if frames else [])
