"""Uniform point lattices and horizon neighbor lists built from cell lists."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import ConfigError, ModelError

# Boundary tag bits.
PINNED = np.uint8(1)
LOADED = np.uint8(2)
ENTRY_FACE = np.uint8(4)
EXIT_FACE = np.uint8(8)

# Relative slack so that lattice neighbors sitting exactly on the horizon are kept.
HORIZON_TOL = 1e-9
MIN_M_RATIO = 3.0


@dataclass
class Lattice:
    """Material points filling a target geometry on a uniform grid.

    ``extent_min``/``extent_max`` bound the geometry itself (faces), not the
    point centers.
    """

    positions: np.ndarray
    volumes: np.ndarray
    dx: float
    horizon: float
    extent_min: np.ndarray
    extent_max: np.ndarray
    shape: str = "box"
    tags: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.tags is None:
            self.tags = np.zeros(len(self.positions), dtype=np.uint8)

    @property
    def n_points(self) -> int:
        return len(self.positions)

    @property
    def m_ratio(self) -> float:
        return self.horizon / self.dx

    @property
    def axis_center(self) -> np.ndarray:
        """Center of the geometry in the x-y plane."""
        return 0.5 * (self.extent_min[:2] + self.extent_max[:2])


def _axis_coords(length: float, dx: float, placement: str) -> np.ndarray:
    if placement == "cell":
        n = max(int(round(length / dx)), 1)
        return (np.arange(n) + 0.5) * dx
    if placement == "node":
        n = int(round(length / dx)) + 1
        return np.arange(n) * dx
    raise ConfigError(f"unknown point placement {placement!r} (expected 'cell' or 'node')")


def build_lattice(
    shape: str,
    size,
    dx: float,
    horizon: float,
    placement: str = "cell",
    origin=(0.0, 0.0, 0.0),
) -> Lattice:
    """Fill a box or a z-axis cylinder with points at spacing ``dx``.

    Args:
        shape: ``"box"`` (``size`` = (Lx, Ly, Lz)) or ``"cylinder"``
            (``size`` = (radius, thickness)).
        size: geometry dimensions in meters.
        dx: grid spacing.
        horizon: peridynamic horizon; must be at least ``3 * dx``.
        placement: ``"cell"`` puts points at cell centers, ``"node"`` on grid
            nodes including the faces.
        origin: lower corner of the geometry bounding box.

    Returns:
        Lattice with uniform volumes ``dx**3``.
    """
    if dx <= 0 or horizon <= 0:
        raise ConfigError("grid spacing and horizon must be positive")
    if horizon / dx < MIN_M_RATIO - 1e-9:
        raise ConfigError(
            f"horizon {horizon:g} m is below {MIN_M_RATIO:g} grid spacings ({dx:g} m)"
        )
    origin = np.asarray(origin, dtype=float)
    if shape == "box":
        lx, ly, lz = (float(s) for s in size)
        if min(lx, ly, lz) <= 0:
            raise ConfigError("box dimensions must be positive")
        xs, ys, zs = (_axis_coords(length, dx, placement) for length in (lx, ly, lz))
        grid = np.stack(np.meshgrid(xs, ys, zs, indexing="ij"), axis=-1).reshape(-1, 3)
        extent = np.array([lx, ly, lz])
    elif shape == "cylinder":
        radius, thickness = (float(s) for s in size)
        if radius <= 0 or thickness <= 0:
            raise ConfigError("cylinder radius and thickness must be positive")
        xs = _axis_coords(2 * radius, dx, placement)
        zs = _axis_coords(thickness, dx, placement)
        grid = np.stack(np.meshgrid(xs, xs, zs, indexing="ij"), axis=-1).reshape(-1, 3)
        r2 = (grid[:, 0] - radius) ** 2 + (grid[:, 1] - radius) ** 2
        grid = grid[r2 <= radius**2 * (1 + 1e-12)]
        extent = np.array([2 * radius, 2 * radius, thickness])
    else:
        raise ConfigError(f"unknown target shape {shape!r}")
    positions = np.ascontiguousarray(grid + origin)
    volumes = np.full(len(positions), dx**3)
    return Lattice(
        positions=positions,
        volumes=volumes,
        dx=float(dx),
        horizon=float(horizon),
        extent_min=origin.copy(),
        extent_max=origin + extent,
        shape=shape,
    )


@dataclass
class Bonds:
    """Horizon neighbor structure.

    Every bond is stored once as a pair ``(pair_i[p], pair_j[p])`` with
    ``pair_i < pair_j`` and twice in the per-point CSR lists
    (``offsets``/``neighbors``), each CSR entry pointing back to its pair via
    ``pair``. Pair order is lexicographic in (i, j), so pair indices are a
    canonical key for per-bond random streams.
    """

    offsets: np.ndarray
    neighbors: np.ndarray
    pair: np.ndarray
    pair_i: np.ndarray
    pair_j: np.ndarray
    dx: float
    horizon: float

    @property
    def n_points(self) -> int:
        return len(self.offsets) - 1

    @property
    def n_pairs(self) -> int:
        return len(self.pair_i)

    def counts(self) -> np.ndarray:
        return np.diff(self.offsets)

    def owners(self) -> np.ndarray:
        """Owning point of every CSR entry."""
        return np.repeat(np.arange(self.n_points, dtype=np.int32), self.counts())

    def neighbors_of(self, i: int) -> np.ndarray:
        return self.neighbors[self.offsets[i] : self.offsets[i + 1]]


@njit(cache=True)
def volume_factor(xi, dx, horizon):
    """Partial-volume weight of a neighbor at reference distance ``xi``."""
    if xi > horizon - 0.5 * dx:
        return (horizon + 0.5 * dx - xi) / dx
    return 1.0


@njit(cache=True)
def bin_points(X, lo, h, dims):
    """Sort points into a uniform cell grid.

    Returns ``(cell_of_point, order, cell_start)`` where the points of cell
    ``c`` are ``order[cell_start[c]:cell_start[c + 1]]`` in ascending index
    order.
    """
    n = X.shape[0]
    ncell = dims[0] * dims[1] * dims[2]
    cell = np.empty(n, dtype=np.int64)
    for i in range(n):
        cx = min(max(int((X[i, 0] - lo[0]) / h), 0), dims[0] - 1)
        cy = min(max(int((X[i, 1] - lo[1]) / h), 0), dims[1] - 1)
        cz = min(max(int((X[i, 2] - lo[2]) / h), 0), dims[2] - 1)
        cell[i] = (cx * dims[1] + cy) * dims[2] + cz
    counts = np.zeros(ncell + 1, dtype=np.int64)
    for i in range(n):
        counts[cell[i] + 1] += 1
    cell_start = np.cumsum(counts)
    fill = cell_start[:-1].copy()
    order = np.empty(n, dtype=np.int64)
    for i in range(n):
        c = cell[i]
        order[fill[c]] = i
        fill[c] += 1
    return cell, order, cell_start


@njit(cache=True)
def _pairs_pass(X, cutoff, lo, dims, cell, order, cell_start, out_i, out_j, fill):
    n = X.shape[0]
    c2 = cutoff * cutoff
    count = 0
    for i in range(n):
        c = cell[i]
        cz = c % dims[2]
        cy = (c // dims[2]) % dims[1]
        cx = c // (dims[1] * dims[2])
        for ax in range(max(cx - 1, 0), min(cx + 2, dims[0])):
            for ay in range(max(cy - 1, 0), min(cy + 2, dims[1])):
                for az in range(max(cz - 1, 0), min(cz + 2, dims[2])):
                    nc = (ax * dims[1] + ay) * dims[2] + az
                    for k in range(cell_start[nc], cell_start[nc + 1]):
                        j = order[k]
                        if j <= i:
                            continue
                        d0 = X[j, 0] - X[i, 0]
                        d1 = X[j, 1] - X[i, 1]
                        d2 = X[j, 2] - X[i, 2]
                        dd = d0 * d0 + d1 * d1 + d2 * d2
                        if 0.0 < dd <= c2:
                            if fill:
                                out_i[count] = i
                                out_j[count] = j
                            count += 1
    return count


def cell_list_pairs(positions: np.ndarray, cutoff: float):
    """All point pairs ``i < j`` with ``0 < |x_j - x_i| <= cutoff``, lexicographically sorted."""
    X = np.ascontiguousarray(positions, dtype=np.float64)
    n = len(X)
    if n < 2:
        return np.empty(0, np.int32), np.empty(0, np.int32)
    lo = X.min(axis=0)
    hi = X.max(axis=0)
    dims = np.maximum(((hi - lo) / cutoff).astype(np.int64) + 1, 1)
    cell, order, cell_start = bin_points(X, lo, cutoff, dims)
    dummy = np.empty(0, dtype=np.int32)
    count = _pairs_pass(X, cutoff, lo, dims, cell, order, cell_start, dummy, dummy, False)
    pi = np.empty(count, dtype=np.int32)
    pj = np.empty(count, dtype=np.int32)
    _pairs_pass(X, cutoff, lo, dims, cell, order, cell_start, pi, pj, True)
    key = np.lexsort((pj, pi))
    return pi[key], pj[key]


def build_neighbor_lists(positions: np.ndarray, horizon: float, dx: float) -> Bonds:
    """Build symmetric horizon neighbor lists for an arbitrary point set.

    A pair is bonded when ``0 < |x_j - x_i| <= horizon`` (with a relative
    slack of ``HORIZON_TOL`` for points sitting exactly on the horizon).
    """
    n = len(positions)
    pi, pj = cell_list_pairs(positions, horizon * (1.0 + HORIZON_TOL))
    n_pairs = len(pi)
    src = np.concatenate([pi, pj])
    dst = np.concatenate([pj, pi])
    pid = np.concatenate([np.arange(n_pairs, dtype=np.int32)] * 2)
    order = np.lexsort((dst, src))
    counts = np.bincount(src, minlength=n)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return Bonds(
        offsets=offsets,
        neighbors=np.ascontiguousarray(dst[order]),
        pair=np.ascontiguousarray(pid[order]),
        pair_i=pi,
        pair_j=pj,
        dx=float(dx),
        horizon=float(horizon),
    )


def pair_lengths(positions: np.ndarray, bonds: Bonds) -> np.ndarray:
    return np.linalg.norm(positions[bonds.pair_j] - positions[bonds.pair_i], axis=1)


def require_neighbors(bonds: Bonds) -> None:
    empty = np.flatnonzero(bonds.counts() == 0)
    if len(empty):
        raise ModelError(f"{len(empty)} point(s) have an empty horizon (first: {empty[0]})")
