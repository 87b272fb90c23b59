from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from perikon.errors import ConfigError
from perikon.lattice import build_lattice, build_neighbor_lists, cell_list_pairs, volume_factor


def brute_force_pairs(X, cutoff):
    d = np.linalg.norm(X[:, None, :] - X[None, :, :], axis=-1)
    i, j = np.nonzero(np.triu((d > 0) & (d <= cutoff), k=1))
    return i, j


def test_unit_cube_half_spacing_has_eight_points():
    lat = build_lattice("box", (1.0, 1.0, 1.0), 0.5, 1.5)
    assert lat.n_points == 8
    np.testing.assert_allclose(lat.volumes, 0.125)


def test_node_placement_counts_include_faces():
    lat = build_lattice("box", (1.0, 1.0, 0.05), 0.01, 0.04, placement="node")
    assert lat.n_points == 101 * 101 * 6


def test_cell_placement_impact_target_count():
    lat = build_lattice("box", (0.812, 0.812, 0.3), 0.007, 0.028)
    assert lat.n_points == 116 * 116 * 43


def test_horizon_below_three_spacings_rejected():
    with pytest.raises(ConfigError):
        build_lattice("box", (1.0, 1.0, 1.0), 0.1, 0.29)


def test_cylinder_points_inside_radius():
    lat = build_lattice("cylinder", (0.1, 0.05), 0.01, 0.03)
    r = np.hypot(lat.positions[:, 0] - 0.1, lat.positions[:, 1] - 0.1)
    assert r.max() <= 0.1
    # Point count scales with the volume.
    assert abs(lat.n_points * 1e-6 / (np.pi * 0.01 * 0.05) - 1) < 0.05


def test_neighbor_lists_match_brute_force_on_lattice():
    lat = build_lattice("box", (0.16, 0.12, 0.1), 0.01, 0.04)
    assert lat.n_points <= 5000
    bonds = build_neighbor_lists(lat.positions, lat.horizon, lat.dx)
    i, j = brute_force_pairs(lat.positions, lat.horizon * (1 + 1e-9))
    np.testing.assert_array_equal(bonds.pair_i, i)
    np.testing.assert_array_equal(bonds.pair_j, j)


@given(st.integers(0, 2**31 - 1), st.integers(2, 300), st.floats(0.05, 0.4))
def test_cell_list_pairs_match_brute_force_random(seed, n, cutoff):
    X = np.random.default_rng(seed).random((n, 3))
    i, j = cell_list_pairs(X, cutoff)
    bi, bj = brute_force_pairs(X, cutoff)
    np.testing.assert_array_equal(i, bi)
    np.testing.assert_array_equal(j, bj)


def test_neighbor_lists_are_symmetric(cube):
    _, bonds = cube
    owners = bonds.owners()
    fwd = set(zip(owners.tolist(), bonds.neighbors.tolist()))
    assert all((j, i) in fwd for i, j in fwd)
    # Both CSR records of a pair point at the same pair id.
    np.testing.assert_array_equal(np.bincount(bonds.pair), 2)


def test_points_beyond_horizon_are_not_neighbors():
    h = 0.03
    X = np.array([[0.0, 0.0, 0.0], [h * (1 + 1e-6), 0.0, 0.0], [0.0, h, 0.0]])
    bonds = build_neighbor_lists(X, h, 0.01)
    assert set(bonds.neighbors_of(0).tolist()) == {2}


def test_interior_neighbor_count_m4():
    lat = build_lattice("box", (0.2, 0.2, 0.2), 0.02, 0.08)
    bonds = build_neighbor_lists(lat.positions, lat.horizon, lat.dx)
    k = np.argmin(np.linalg.norm(lat.positions - 0.1 + 0.01, axis=1))
    # Integer offsets (a, b, c) with 0 < a^2 + b^2 + c^2 <= 16.
    r = np.arange(-4, 5)
    a, b, c = np.meshgrid(r, r, r, indexing="ij")
    s = a**2 + b**2 + c**2
    assert bonds.counts()[k] == np.count_nonzero((s > 0) & (s <= 16))


def test_volume_factor_values():
    dx, h = 0.01, 0.04
    assert volume_factor(0.02, dx, h) == 1.0
    assert volume_factor(h, dx, h) == pytest.approx(0.5)
    assert volume_factor(h - 0.25 * dx, dx, h) == pytest.approx(0.75)


def test_weighted_volume_converges_to_continuum():
    # Partial volumes converge slowly: within 3% at delta = 32 dx.
    dx = 1.0
    h = 32.0
    r = np.arange(-33, 34)
    a, b, c = np.meshgrid(r, r, r, indexing="ij")
    xi = np.sqrt(a**2 + b**2 + c**2).ravel()
    xi = xi[(xi > 0) & (xi <= h * (1 + 1e-9))]
    beta = np.where(xi > h - 0.5 * dx, (h + 0.5 * dx - xi) / dx, 1.0)
    m = np.sum(xi**2 * beta * dx**3)
    assert abs(m / (4 * np.pi * h**5 / 5) - 1) < 0.03
