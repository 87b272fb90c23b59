"""Short-range repulsive contact between a rigid projectile and target points.

Two points closer than the critical distance ``d_pi`` repel along their line
of centers with force density ``(c_sh / delta) * (d_pi - r)`` per unit volume
squared. Projectile and target points share no reference bond, so the
cross-body critical distance is ``1.35 * dx``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from numba import njit, prange

from .errors import ConfigError
from .lattice import bin_points

CROSS_DISTANCE_FACTOR = 1.35
BONDED_DISTANCE_FACTOR = 0.9


def critical_distance(ref_distance, dx):
    """Contact onset distance; pass ``ref_distance=None`` for unbonded pairs."""
    cross = CROSS_DISTANCE_FACTOR * abs(dx)
    if ref_distance is None:
        return cross
    return min(BONDED_DISTANCE_FACTOR * ref_distance, cross)


@dataclass(frozen=True)
class ContactParams:
    stiffness: float
    horizon: float
    distance: float

    def __post_init__(self):
        if self.stiffness <= 0 or self.horizon <= 0 or self.distance <= 0:
            raise ConfigError("contact stiffness, horizon and distance must be positive")

    @classmethod
    def from_bulk_modulus(cls, bulk: float, horizon: float, dx: float) -> "ContactParams":
        """``c_sh = 15 c`` with the 3D micromodulus ``c = 18 k / (pi delta^4)``."""
        c = 18.0 * bulk / (math.pi * horizon**4)
        return cls(stiffness=15.0 * c, horizon=horizon, distance=critical_distance(None, dx))

    @property
    def coefficient(self) -> float:
        return self.stiffness / self.horizon


def short_range_force(y_p, y_i, params: ContactParams, fallback_direction=(0.0, 0.0, 1.0)):
    """Contact force density exerted on point ``i`` by point ``p``.

    The force on ``p`` is the negative of the returned vector. Coincident
    points are pushed apart along ``fallback_direction`` with the
    zero-separation magnitude.
    """
    d = np.asarray(y_i, float) - np.asarray(y_p, float)
    r = float(np.linalg.norm(d))
    if r >= params.distance:
        return np.zeros(3)
    magnitude = params.coefficient * (params.distance - r)
    if r > 0.0:
        return magnitude * d / r
    u = np.asarray(fallback_direction, float)
    return magnitude * u / np.linalg.norm(u)


@dataclass
class RigidBody:
    """Translating rigid point set."""

    offsets: np.ndarray
    volumes: np.ndarray
    mass: float
    position: np.ndarray
    velocity: np.ndarray
    force: np.ndarray = None

    def __post_init__(self):
        if self.mass <= 0:
            raise ConfigError("rigid body mass must be positive")
        self.offsets = np.ascontiguousarray(self.offsets, np.float64)
        self.volumes = np.ascontiguousarray(self.volumes, np.float64)
        self.position = np.asarray(self.position, np.float64).copy()
        self.velocity = np.asarray(self.velocity, np.float64).copy()
        self.force = np.zeros(3) if self.force is None else np.asarray(self.force, np.float64).copy()

    @property
    def n_points(self) -> int:
        return len(self.offsets)

    def points(self) -> np.ndarray:
        return self.offsets + self.position

    @property
    def momentum(self) -> np.ndarray:
        return self.mass * self.velocity

    @property
    def kinetic_energy(self) -> float:
        return 0.5 * self.mass * float(self.velocity @ self.velocity)

    def tip(self, axis: int = 2) -> np.ndarray:
        """Leading point along +axis."""
        k = int(np.argmax(self.offsets[:, axis]))
        return self.position + self.offsets[k]

    def copy(self) -> "RigidBody":
        return replace(self, offsets=self.offsets, volumes=self.volumes)


def step_rigid_projectile(body: RigidBody, force, dt: float) -> RigidBody:
    """Advance the body one step under a constant net force (no rotation)."""
    out = body.copy()
    out.force = np.asarray(force, float).copy()
    out.velocity = body.velocity + dt * out.force / body.mass
    out.position = body.position + dt * out.velocity
    return out


def build_projectile(diameter: float, length: float, dx: float, mass: float,
                     nose: str = "hemispherical", crh: float = 3.0) -> RigidBody:
    """Discretize a nosed cylinder travelling along +z on a grid of spacing ``dx``.

    The point density is scaled so the total mass equals ``mass``. Offsets are
    relative to the centroid of the points.
    """
    radius = 0.5 * diameter
    if diameter <= 0 or length <= 0 or dx <= 0:
        raise ConfigError("projectile dimensions must be positive")
    if nose not in ("hemispherical", "ogival", "flat"):
        raise ConfigError(f"unknown nose shape {nose!r}")
    n_r = int(math.ceil(radius / dx)) + 1
    if radius >= dx / math.sqrt(2.0):
        lateral = (np.arange(-n_r, n_r) + 0.5) * dx
    else:
        lateral = np.arange(-n_r, n_r + 1) * dx
    axial = (np.arange(int(round(length / dx))) + 0.5) * dx
    gx, gy, gz = np.meshgrid(lateral, lateral, axial, indexing="ij")
    r = np.hypot(gx, gy).ravel()
    z = gz.ravel()
    if nose == "hemispherical":
        nose_length = min(radius, length)
        base = length - nose_length
        allowed = np.where(z <= base, radius,
                           np.sqrt(np.clip(radius**2 - (z - base) ** 2, 0.0, None)))
    elif nose == "ogival":
        s = crh * diameter
        nose_length = min(math.sqrt(s**2 - (s - radius) ** 2), length)
        base = length - nose_length
        allowed = np.where(z <= base, radius,
                           np.sqrt(np.clip(s**2 - (z - base) ** 2, 0.0, None)) - (s - radius))
    else:
        allowed = np.full_like(z, radius)
    keep = r <= allowed + 1e-12 * dx
    pts = np.column_stack([gx.ravel()[keep], gy.ravel()[keep], z[keep]])
    if len(pts) == 0:
        pts = np.column_stack([np.zeros(len(axial)), np.zeros(len(axial)), axial])
    centroid = pts.mean(axis=0)
    volumes = np.full(len(pts), dx**3)
    return RigidBody(offsets=pts - centroid, volumes=volumes, mass=mass,
                     position=centroid, velocity=np.zeros(3))


@njit(parallel=True, cache=True)
def _contact_kernel(Y, P, Vp, lo, h, dims, cell_start, order, box_lo, box_hi, d, coef,
                    fallback, out, energy):
    n = Y.shape[0]
    for i in prange(n):
        out[i, 0] = 0.0
        out[i, 1] = 0.0
        out[i, 2] = 0.0
        energy[i] = 0.0
        if (Y[i, 0] < box_lo[0] or Y[i, 0] > box_hi[0] or Y[i, 1] < box_lo[1]
                or Y[i, 1] > box_hi[1] or Y[i, 2] < box_lo[2] or Y[i, 2] > box_hi[2]):
            continue
        cx = min(max(int((Y[i, 0] - lo[0]) / h), 0), dims[0] - 1)
        cy = min(max(int((Y[i, 1] - lo[1]) / h), 0), dims[1] - 1)
        cz = min(max(int((Y[i, 2] - lo[2]) / h), 0), dims[2] - 1)
        f0 = 0.0
        f1 = 0.0
        f2 = 0.0
        en = 0.0
        for ax in range(max(cx - 1, 0), min(cx + 2, dims[0])):
            for ay in range(max(cy - 1, 0), min(cy + 2, dims[1])):
                for az in range(max(cz - 1, 0), min(cz + 2, dims[2])):
                    c = (ax * dims[1] + ay) * dims[2] + az
                    for k in range(cell_start[c], cell_start[c + 1]):
                        p = order[k]
                        r0 = Y[i, 0] - P[p, 0]
                        r1 = Y[i, 1] - P[p, 1]
                        r2 = Y[i, 2] - P[p, 2]
                        r = math.sqrt(r0 * r0 + r1 * r1 + r2 * r2)
                        if r >= d:
                            continue
                        mag = coef * (d - r) * Vp[p]
                        en += 0.5 * mag * (d - r)
                        if r > 0.0:
                            f0 += mag * r0 / r
                            f1 += mag * r1 / r
                            f2 += mag * r2 / r
                        else:
                            f0 += mag * fallback[0]
                            f1 += mag * fallback[1]
                            f2 += mag * fallback[2]
        out[i, 0] = f0
        out[i, 1] = f1
        out[i, 2] = f2
        energy[i] = en


class ContactModel:
    """Evaluates projectile-target contact for the current configuration."""

    def __init__(self, params: ContactParams):
        self.params = params
        self._fallback = np.array([0.0, 0.0, 1.0])
        self.energy = 0.0

    def forces(self, Y: np.ndarray, target_volumes: np.ndarray, body: RigidBody):
        """Contact force density on every target point and the net force on the body.

        The contact potential energy of the last evaluation is kept in
        ``self.energy``.
        """
        d = self.params.distance
        P = np.ascontiguousarray(body.points())
        lo = P.min(axis=0) - d
        hi = P.max(axis=0) + d
        dims = np.maximum(((hi - lo) / d).astype(np.int64) + 1, 1)
        _, order, cell_start = bin_points(P, lo, d, dims)
        speed = float(np.linalg.norm(body.velocity))
        if speed > 0:
            self._fallback = body.velocity / speed
        out = np.empty_like(Y)
        energy = np.empty(len(Y))
        _contact_kernel(Y, P, body.volumes, lo, d, dims, cell_start, order, lo, hi, d,
                        self.params.coefficient, self._fallback, out, energy)
        self.energy = float(energy @ target_volumes)
        reaction = -(out * target_volumes[:, None]).sum(axis=0)
        return out, reaction
