from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from perikon.lattice import build_lattice
from perikon.metrics import crater_metrics, damaged_components

LAT = build_lattice("box", (0.4, 0.4, 0.2), 0.01, 0.03)
X = LAT.positions
CENTER = np.array([0.2, 0.2])


def hemisphere(radius, face_z, sign=1.0):
    r = np.linalg.norm(np.column_stack([X[:, :2] - CENTER, X[:, 2] - face_z]), axis=1)
    return np.where(r <= radius, 1.0, 0.0)


def metrics(d):
    return crater_metrics(X, d, LAT.dx, LAT.extent_min, LAT.extent_max)


def test_pristine_field_gives_zeros():
    crater, scab = metrics(np.zeros(LAT.n_points))
    assert crater.radius == crater.depth == scab.radius == scab.depth == 0.0


@pytest.mark.parametrize("radius", [0.05, 0.08, 0.12])
def test_hemispherical_crater_within_one_spacing(radius):
    crater, scab = metrics(hemisphere(radius, LAT.extent_min[2]))
    assert crater.radius == pytest.approx(radius, abs=LAT.dx)
    assert crater.depth == pytest.approx(radius, abs=LAT.dx)
    assert scab.n_points == 0


def test_scab_on_exit_face():
    crater, scab = metrics(hemisphere(0.06, LAT.extent_max[2]))
    assert crater.n_points == 0
    assert scab.radius == pytest.approx(0.06, abs=LAT.dx)


def test_isolated_interior_damage_ignored():
    d = np.zeros(LAT.n_points)
    d[np.linalg.norm(X - [0.2, 0.2, 0.1], axis=1) < 0.03] = 1.0
    crater, scab = metrics(d)
    assert crater.n_points == scab.n_points == 0


def test_threshold_applies():
    d = 0.3 * hemisphere(0.08, LAT.extent_min[2])
    assert metrics(d)[0].n_points == 0


@given(st.integers(0, 2**31 - 1))
def test_invariant_under_relabeling(seed):
    rng = np.random.default_rng(seed)
    d = hemisphere(0.07, LAT.extent_min[2]) * rng.random(LAT.n_points)
    perm = rng.permutation(LAT.n_points)
    a = crater_metrics(X, d, LAT.dx, LAT.extent_min, LAT.extent_max)
    b = crater_metrics(X[perm], d[perm], LAT.dx, LAT.extent_min, LAT.extent_max)
    assert a == b


def test_components_split_and_join():
    pts = np.array([[0, 0, 0], [0.01, 0.01, 0.01], [0.05, 0, 0]], float)
    idx, labels = damaged_components(pts, np.ones(3, bool), 0.01)
    assert labels[0] == labels[1] != labels[2]
