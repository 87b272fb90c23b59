from __future__ import annotations

import math

import numpy as np
import pytest
from conftest import uniform_elasticity
from hypothesis import given
from hypothesis import strategies as st

from perikon.constitutive import StateBasedBody
from perikon.contact import (ContactModel, ContactParams, RigidBody, build_projectile,
                             critical_distance, short_range_force, step_rigid_projectile)
from perikon.errors import ConfigError
from perikon.lattice import build_lattice, build_neighbor_lists
from perikon.solver import Simulation

PARAMS = ContactParams.from_bulk_modulus(17.8e9, 0.03, 0.01)
vec = st.lists(st.floats(-0.02, 0.02), min_size=3, max_size=3).map(np.array)


def test_critical_distances():
    assert critical_distance(None, 0.01) == pytest.approx(0.0135, rel=1e-14)
    assert critical_distance(0.01, 0.01) == pytest.approx(0.009, rel=1e-14)
    assert critical_distance(0.02, 0.01) == pytest.approx(0.0135, rel=1e-14)


def test_contact_stiffness():
    c = 18 * 17.8e9 / (math.pi * 0.03**4)
    assert PARAMS.stiffness == pytest.approx(15 * c, rel=1e-14)
    assert PARAMS.coefficient == pytest.approx(15 * c / 0.03, rel=1e-14)
    with pytest.raises(ConfigError):
        ContactParams(0.0, 0.03, 0.01)


def test_force_at_half_distance():
    d = PARAMS.distance
    f = short_range_force([0, 0, 0], [0.5 * d, 0, 0], PARAMS)
    np.testing.assert_allclose(f, [PARAMS.coefficient * 0.5 * d, 0, 0], rtol=1e-14)


def test_coincident_points_use_fallback():
    f = short_range_force([0, 0, 0], [0, 0, 0], PARAMS, fallback_direction=(0, 0, 2))
    np.testing.assert_allclose(f, [0, 0, PARAMS.coefficient * PARAMS.distance], rtol=1e-14)


@given(vec, vec)
def test_contact_never_attracts(a, b):
    f = short_range_force(a, b, PARAMS)
    r = np.linalg.norm(b - a)
    if r >= PARAMS.distance:
        assert not f.any()
    else:
        assert f @ (b - a) >= 0.0


def small_projectile(velocity=(0.0, 0.0, 100.0)):
    body = build_projectile(0.02, 0.03, 0.01, 0.05, nose="flat")
    body.velocity = np.array(velocity, float)
    return body


@given(st.integers(0, 2**31 - 1))
def test_kernel_matches_pairwise_sum(seed):
    rng = np.random.default_rng(seed)
    body = small_projectile()
    P = body.points()
    Y = P[rng.integers(len(P), size=40)] + rng.uniform(-0.015, 0.015, (40, 3))
    vol = rng.uniform(0.5e-6, 1.5e-6, 40)
    model = ContactModel(PARAMS)
    f, reaction = model.forces(Y, vol, body)
    expect = np.array([sum(short_range_force(p, y, PARAMS) * vp for p, vp in zip(P, body.volumes))
                       for y in Y])
    np.testing.assert_allclose(f, expect, rtol=1e-12, atol=1e-9 * np.abs(expect).max() + 1e-300)
    np.testing.assert_allclose(reaction, -(expect * vol[:, None]).sum(axis=0),
                               rtol=1e-10, atol=1e-9 * np.abs(reaction).max() + 1e-300)


def test_contact_energy_is_pair_potential():
    body = small_projectile()
    p0 = body.points()[0]
    d = PARAMS.distance
    Y = np.array([p0 + [0.0, 0.0, 0.7 * d]])
    model = ContactModel(PARAMS)
    f, _ = model.forces(Y, np.array([2e-6]), body)
    # Only one projectile point within range: it sits directly below.
    close = np.linalg.norm(body.points() - Y[0], axis=1) < d
    r = np.linalg.norm(body.points()[close] - Y[0], axis=1)
    expect = sum(0.5 * PARAMS.coefficient * (d - ri) ** 2 * 1e-6 * 2e-6 for ri in r)
    assert model.energy == pytest.approx(expect, rel=1e-12)


def test_step_rigid_projectile():
    body = RigidBody(np.zeros((1, 3)), np.ones(1), 2.0, np.zeros(3), np.array([0.0, 0.0, 10.0]))
    out = step_rigid_projectile(body, [0.0, 0.0, -4.0], 0.5)
    np.testing.assert_allclose(out.velocity, [0, 0, 9.0])
    np.testing.assert_allclose(out.position, [0, 0, 4.5])
    np.testing.assert_allclose(body.velocity, [0, 0, 10.0])


@pytest.mark.parametrize("nose", ["hemispherical", "ogival", "flat"])
def test_projectile_shape(nose):
    body = build_projectile(0.04, 0.25, 0.005, 2.44, nose=nose)
    assert body.mass == 2.44
    np.testing.assert_allclose(body.offsets.mean(axis=0), 0.0, atol=1e-12)
    assert np.hypot(body.offsets[:, 0], body.offsets[:, 1]).max() <= 0.02 + 1e-12
    extent = body.offsets[:, 2].max() - body.offsets[:, 2].min()
    # A sharp nose loses its last layer or two, which are thinner than the grid.
    assert 0.25 - 3 * 0.005 - 1e-12 <= extent <= 0.25 - 0.005 + 1e-12
    tip = body.tip()
    assert tip[2] == body.points()[:, 2].max()


def test_projectile_nose_order():
    n = {k: build_projectile(0.04, 0.25, 0.005, 2.44, nose=k).n_points
         for k in ("hemispherical", "ogival", "flat")}
    assert n["ogival"] < n["hemispherical"] < n["flat"]


def test_projectile_validation():
    with pytest.raises(ConfigError):
        build_projectile(0.04, 0.25, 0.005, 2.44, nose="conical")
    with pytest.raises(ConfigError):
        build_projectile(-0.04, 0.25, 0.005, 2.44)
    with pytest.raises(ConfigError):
        RigidBody(np.zeros((1, 3)), np.ones(1), 0.0, np.zeros(3), np.zeros(3))


def test_free_impact_conserves_momentum():
    lat = build_lattice("box", (0.08, 0.08, 0.05), 0.01, 0.03)
    bonds = build_neighbor_lists(lat.positions, lat.horizon, lat.dx)
    body = StateBasedBody(lat.positions, lat.volumes, bonds, uniform_elasticity(lat.n_points))
    proj = small_projectile((0.0, 0.0, 200.0))
    proj.position = np.array([0.04, 0.04, lat.positions[:, 2].min() - 0.02])
    sim = Simulation(body, projectile=proj, contact=ContactModel(PARAMS), safety=0.3)
    p0 = sim.momentum()
    sim.run(200 * sim.dt)
    assert np.linalg.norm(sim.u) > 0
    assert proj.velocity[2] < 200.0
    assert np.linalg.norm(sim.momentum() - p0) <= 1e-8 * np.linalg.norm(p0)
