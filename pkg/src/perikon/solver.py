"""Explicit velocity-Verlet integration of the peridynamic equation of motion.

One step: half-kick, drift, re-pin constrained points, force recompute
(internal + contact + boundary traction), half-kick, then the bond-break
commit. Forces are evaluated from an immutable snapshot of positions, so the
step is bit-reproducible for any thread count.
"""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass

import numpy as np

from .constitutive import StateBasedBody
from .contact import ContactModel, RigidBody
from .errors import InstabilityError, PerikonError
from .failure import BondFailureState, ClassThresholds
from .output import OutputError

CHECKPOINT_MAGIC = b"PKCK"
CHECKPOINT_VERSION = 1
_HEADER = struct.Struct("<4sIQdQQB")


def stable_timestep(dx: float, wave_speed, safety: float = 0.5) -> float:
    """``safety * dx / c`` with ``c`` the fastest dilatational speed present.

    Args:
        dx: grid spacing.
        wave_speed: a speed or an array of per-point speeds.
        safety: Courant-type safety factor.
    """
    c = float(np.max(wave_speed))
    if c <= 0 or dx <= 0 or safety <= 0:
        raise ValueError("grid spacing, wave speed and safety factor must be positive")
    return safety * dx / c


def dilatational_speeds(body: StateBasedBody) -> np.ndarray:
    """Per-point dilatational speed, using the equation-of-state tangent where active."""
    el = body.elasticity
    bulk = el.bulk
    if body.eos is not None:
        k_eos = body.eos.max_tangent_bulk(body.water_weight)
        bulk = np.where(body.eos_mask, np.maximum(bulk, k_eos), bulk)
    return np.sqrt((bulk + 4.0 * el.shear / 3.0) / el.density)


@dataclass
class Pulse:
    """Surface pressure applied as a body force over a layer of given thickness."""

    pressure: float
    duration: float
    direction: np.ndarray
    thickness: float

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        self.direction = d / np.linalg.norm(d)
        if self.thickness <= 0:
            raise ValueError("pulse layer thickness must be positive")

    def density(self, t: float) -> float:
        """Body-force density magnitude ``pressure / thickness`` while the pulse is on."""
        return self.pressure / self.thickness if t < self.duration else 0.0


@dataclass
class EnergyAudit:
    kinetic: float
    strain: float
    contact: float
    projectile: float
    dissipated: float
    external_work: float

    @property
    def total(self) -> float:
        """Stored plus dissipated energy minus the work put in; constant for an exact integrator."""
        return (self.kinetic + self.strain + self.contact + self.projectile + self.dissipated
                - self.external_work)


class Simulation:
    """Mutable solver state plus the models that drive it.

    Args:
        body: constitutive model of the target.
        failure: bond state; ``None`` for a purely elastic run.
        thresholds: static critical stretches per bond class.
        dif_array: packed dynamic-increase constants (see ``DifParams.as_array``).
        pinned: boolean mask of points held at zero displacement.
        pulse, loaded: optional traction pulse and the mask of points it acts on.
        projectile, contact: optional rigid projectile and its contact model.
        dt: time step; defaults to :func:`stable_timestep` with ``safety``.
        energy_audit: tally the strain energy released by bond breaks.
        intact: fixed CSR intact flags for runs without a failure model
            (e.g. elastic runs with pre-broken pore bonds).
    """

    def __init__(self, body: StateBasedBody, failure: BondFailureState | None = None,
                 thresholds: ClassThresholds | None = None, dif_array=None, pinned=None,
                 pulse: Pulse | None = None, loaded=None, projectile: RigidBody | None = None,
                 contact: ContactModel | None = None, dt: float | None = None,
                 safety: float = 0.5, energy_audit: bool = False, dump_dir=None,
                 intact=None):
        n = body.n_points
        self.body = body
        self.failure = failure
        self.thresholds = thresholds
        self.dif_array = dif_array
        if failure is not None and (thresholds is None or dif_array is None):
            raise ValueError("a failure model needs thresholds and DIF constants")
        self.pinned = np.zeros(n, bool) if pinned is None else np.asarray(pinned, bool)
        self.pulse = pulse
        self.loaded = np.zeros(n, bool) if loaded is None else np.asarray(loaded, bool)
        self.projectile = projectile
        self.contact = contact
        if (projectile is None) != (contact is None):
            raise ValueError("projectile and contact model must be given together")
        self.dt = dt if dt is not None else stable_timestep(
            body.bonds.dx, dilatational_speeds(body), safety)
        self.energy_audit = energy_audit
        self.dump_dir = dump_dir
        self._fixed_intact = body.all_intact() if intact is None else np.asarray(intact, np.uint8)

        self.u = np.zeros((n, 3))
        self.v = np.zeros((n, 3))
        self.a = np.zeros((n, 3))
        self.time = 0.0
        self.step_count = 0
        self.dissipated = 0.0
        self.external_work = 0.0
        self.last_broken = 0
        self._force = np.empty((n, 3))
        self._rho = body.elasticity.density[:, None]
        self.projectile_accel = np.zeros(3)
        self._compute_accelerations()

    # ------------------------------------------------------------------ state

    @property
    def intact(self) -> np.ndarray:
        if self.failure is None:
            return self._fixed_intact
        return self.failure.intact

    def current_positions(self) -> np.ndarray:
        return self.body.X + self.u

    def _body_force(self, t: float) -> np.ndarray | None:
        if self.pulse is None:
            return None
        mag = self.pulse.density(t)
        if mag == 0.0:
            return None
        return mag * self.pulse.direction

    def _compute_accelerations(self):
        Y = self.current_positions()
        f = self.body.force_density(Y, self.intact, out=self._force)
        b = self._body_force(self.time)
        if b is not None:
            f[self.loaded] += b
        if self.projectile is not None:
            fc, reaction = self.contact.forces(Y, self.body.volumes, self.projectile)
            f += fc
            self.projectile.force = reaction
            self.projectile_accel = reaction / self.projectile.mass
        np.divide(f, self._rho, out=self.a)

    def _pulse_power(self, t: float) -> float:
        b = self._body_force(t)
        if b is None:
            return 0.0
        return float((self.v[self.loaded] @ b) @ self.body.volumes[self.loaded])

    # ------------------------------------------------------------------- step

    def step(self):
        dt = self.dt
        half = 0.5 * dt
        p = self.projectile
        self.v += half * self.a
        if p is not None:
            p.velocity = p.velocity + half * self.projectile_accel
        power_start = self._pulse_power(self.time)

        self.u += dt * self.v
        if p is not None:
            p.position = p.position + dt * p.velocity
        self.u[self.pinned] = 0.0
        self.v[self.pinned] = 0.0
        self.time = (self.step_count + 1) * dt
        self.step_count += 1

        power_end = self._pulse_power(self.time)
        self.external_work += half * (power_start + power_end)
        self._compute_accelerations()
        self.v += half * self.a
        self.v[self.pinned] = 0.0
        if p is not None:
            p.velocity = p.velocity + half * self.projectile_accel

        self.last_broken = 0
        if self.failure is not None:
            Y = self.current_positions()
            before = self.body.strain_energy(Y, self.intact) if self.energy_audit else 0.0
            self.last_broken = self.failure.commit(self.body.X, Y, self.v, self.thresholds,
                                                   self.dif_array)
            if self.energy_audit and self.last_broken:
                self.dissipated += before - self.body.strain_energy(Y, self.intact)
        self._check_finite()

    def run(self, t_end: float, callback=None, every: int = 1):
        """Step until ``t_end``; ``callback(sim)`` runs every ``every`` steps."""
        n_steps = int(math.ceil(t_end / self.dt - 1e-9))
        while self.step_count < n_steps:
            self.step()
            if callback is not None and self.step_count % every == 0:
                callback(self)

    def _check_finite(self):
        ok = np.isfinite(self.u).all() and np.isfinite(self.v).all()
        if self.projectile is not None:
            ok = ok and np.isfinite(self.projectile.velocity).all()
        if ok:
            return
        path = None
        if self.dump_dir is not None:
            os.makedirs(self.dump_dir, exist_ok=True)
            path = os.path.join(self.dump_dir, f"instability_step{self.step_count}.npz")
            bad = ~(np.isfinite(self.u).all(axis=1) & np.isfinite(self.v).all(axis=1))
            np.savez(path, X=self.body.X, u=self.u, v=self.v, a=self.a, nonfinite=bad,
                     time=self.time, step=self.step_count)
        msg = "non-finite state"
        if path:
            msg += f"; diagnostic dump written to {path}"
        raise InstabilityError(msg, step=self.step_count, time=self.time)

    # ----------------------------------------------------------------- energy

    def energy(self) -> EnergyAudit:
        vol = self.body.volumes
        rho = self.body.elasticity.density
        ke = 0.5 * float(np.einsum("i,i,ij,ij->", rho, vol, self.v, self.v))
        se = self.body.strain_energy(self.current_positions(), self.intact)
        contact = self.contact.energy if self.contact is not None else 0.0
        proj = self.projectile.kinetic_energy if self.projectile is not None else 0.0
        return EnergyAudit(ke, se, contact, proj, self.dissipated, self.external_work)

    def momentum(self) -> np.ndarray:
        m = (self.body.elasticity.density * self.body.volumes)[:, None]
        total = (m * self.v).sum(axis=0)
        if self.projectile is not None:
            total = total + self.projectile.momentum
        return total

    # ------------------------------------------------------------- checkpoint

    def save_checkpoint(self, path):
        """Binary restart file: versioned header, then per-point and per-bond state."""
        n = self.body.n_points
        broken = self.failure.broken if self.failure is not None else np.zeros(0, np.uint8)
        has_proj = self.projectile is not None
        try:
            with open(path, "wb") as fh:
                fh.write(_HEADER.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, self.step_count,
                                      self.time, n, len(broken), int(has_proj)))
                fh.write(struct.pack("<ddd", self.dt, self.dissipated, self.external_work))
                for arr in (self.u, self.v, self.a):
                    fh.write(np.ascontiguousarray(arr, "<f8").tobytes())
                fh.write(np.ascontiguousarray(broken, np.uint8).tobytes())
                if has_proj:
                    p = self.projectile
                    fh.write(np.concatenate([p.position, p.velocity, p.force,
                                             self.projectile_accel]).astype("<f8").tobytes())
        except OSError as exc:
            raise OutputError(f"cannot write checkpoint {path}: {exc}") from exc

    def load_checkpoint(self, path):
        with open(path, "rb") as fh:
            data = fh.read()
        magic, version, step, time, n, n_pairs, has_proj = _HEADER.unpack_from(data, 0)
        if magic != CHECKPOINT_MAGIC:
            raise PerikonError(f"{path} is not a checkpoint file")
        if version != CHECKPOINT_VERSION:
            raise PerikonError(f"unsupported checkpoint version {version}")
        if n != self.body.n_points:
            raise PerikonError(f"checkpoint has {n} points, simulation has {self.body.n_points}")
        off = _HEADER.size
        self.dt, self.dissipated, self.external_work = struct.unpack_from("<ddd", data, off)
        off += 24
        for name in ("u", "v", "a"):
            arr = np.frombuffer(data, "<f8", 3 * n, off).reshape(n, 3)
            setattr(self, name, arr.astype(np.float64))
            off += 24 * n
        broken = np.frombuffer(data, np.uint8, n_pairs, off)
        off += n_pairs
        if self.failure is not None:
            if n_pairs != len(self.failure.broken):
                raise PerikonError("checkpoint bond count does not match the simulation")
            self.failure.broken[:] = broken
            self.failure.sync()
        if has_proj:
            vals = np.frombuffer(data, "<f8", 12, off)
            p = self.projectile
            p.position, p.velocity, p.force = vals[0:3].copy(), vals[3:6].copy(), vals[6:9].copy()
            self.projectile_accel = vals[9:12].copy()
        self.step_count = step
        self.time = time
