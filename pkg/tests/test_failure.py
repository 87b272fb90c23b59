from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from perikon.failure import (BondFailureState, ClassThresholds, DifParams, StrengthParams, damage,
                             dif_dry, dif_wet, saturation_amplification, static_critical_stretches,
                             update_bond_state, wet_static_strength)
from perikon.mesostructure import EffectiveClass

DIF = DifParams()
rates = st.floats(1e-7, 1e4)
sats = st.floats(0.0, 1.0)


def tension_oracle(rate):
    r = max(rate, 1e-6)
    if r <= 30.0:
        return (r / 1e-6) ** 0.0307
    beta = (30.0 / 1e-6) ** (0.0307 - 1.0 / 3.0)
    return beta * (r / 1e-6) ** (1.0 / 3.0)


def test_dry_tension_dif_anchor_values():
    assert dif_dry(1e-6, DIF, "tension") == pytest.approx(1.0, abs=1e-14)
    assert dif_dry(30.0, DIF, "tension") == pytest.approx(math.exp(0.0307 * math.log(3e7)), rel=1e-12)
    assert dif_dry(100.0, DIF, "tension") == pytest.approx(tension_oracle(100.0), rel=1e-12)


def test_dry_tension_dif_continuous_at_transition():
    lo = dif_dry(30.0 * (1 - 1e-12), DIF, "tension")
    hi = dif_dry(30.0 * (1 + 1e-12), DIF, "tension")
    assert hi == pytest.approx(lo, rel=1e-9)


def test_dry_compression_dif():
    assert dif_dry(100.0, DIF, "compression") == pytest.approx(1 + 0.007 * math.log(100.0), rel=1e-14)
    assert dif_dry(0.5, DIF, "compression") == 1.0
    assert dif_dry(0.0, DIF, "compression") == 1.0


def test_dif_sense_validated():
    with pytest.raises(ValueError):
        dif_dry(1.0, DIF, "shear")


def test_tension_amplification_anchor():
    g_t, _ = saturation_amplification(10.0, 1.0)
    assert g_t == pytest.approx(2.0 - 1.15 ** -6, rel=1e-14)


def test_amplification_inactive_at_low_rate():
    assert saturation_amplification(1e-6, 1.0) == (1.0, 1.0)


@given(rates, st.floats(0.01, 0.5))
def test_dry_concrete_has_no_amplification(rate, ratio):
    g_t, g_c = saturation_amplification(rate, 0.0, strength_ratio=ratio)
    assert g_t == pytest.approx(1.0, abs=1e-14)
    assert g_c == pytest.approx(1.0, abs=1e-14)


@given(st.floats(1e-4, 1e4), sats, st.floats(0.01, 0.5))
def test_compression_amplification_formula(rate, w, ratio):
    g_t, g_c = saturation_amplification(rate, w, strength_ratio=ratio)
    d = tension_oracle(rate)
    assert g_c == pytest.approx((d * g_t * ratio + 1) / (d * ratio + 1), rel=1e-12)
    t, c = dif_wet(rate, w, strength_ratio=ratio)
    assert t == pytest.approx(d * g_t, rel=1e-12)
    assert c == pytest.approx(dif_dry(rate, DIF, "compression") * g_c, rel=1e-12)


@given(st.floats(1e-4, 1e4), sats, sats)
def test_wet_dif_nondecreasing_in_saturation(rate, w1, w2):
    lo, hi = sorted((w1, w2))
    t1, c1 = dif_wet(rate, lo)
    t2, c2 = dif_wet(rate, hi)
    assert t2 >= t1 * (1 - 1e-14)
    assert c2 >= c1 * (1 - 1e-14)


def test_wet_static_strength_linear():
    assert wet_static_strength(40e6, 4e6, 0.5) == pytest.approx((36e6, 3.6e6))
    with pytest.raises(ValueError):
        wet_static_strength(40e6, 4e6, 1.5)


def test_static_stretches_oracle():
    k, delta, E, g0, fc = 17e9, 0.03, 30e9, 100.0, 39.5e6
    s_t, s_c = static_critical_stretches(k, delta, E, g0, fc)
    assert s_t == pytest.approx(math.sqrt(5 * 100.0 / (9 * 17e9 * 0.03)), rel=1e-14)
    assert s_c == pytest.approx(39.5e6 / 30e9, rel=1e-14)


def test_parameter_validation():
    with pytest.raises(ValueError):
        StrengthParams(compressive=1e6, tensile=2e6)
    with pytest.raises(ValueError):
        DifParams(zeta=0.0)
    with pytest.raises(ValueError):
        ClassThresholds(np.ones(3), np.ones(4))


def thresholds(s_t=1e-3, s_c=2e-3):
    n = len(EffectiveClass)
    return ClassThresholds(np.full(n, s_t), np.full(n, s_c))


def test_update_bond_state_at_static_threshold():
    th = thresholds()
    assert update_bond_state(0.999e-3, 0.0, 0, th, DIF, 0.0) == 1
    assert update_bond_state(1.001e-3, 0.0, 0, th, DIF, 0.0) == 0
    assert update_bond_state(-1.999e-3, 0.0, 0, th, DIF, 0.0) == 1
    assert update_bond_state(-2.001e-3, 0.0, 0, th, DIF, 0.0) == 0


def test_rate_raises_tensile_threshold():
    th = thresholds()
    s = 1.2e-3
    assert update_bond_state(s, 0.0, 0, th, DIF, 0.0) == 0
    assert update_bond_state(s, 100.0, 0, th, DIF, 0.0) == 1


def _state(cube, prebroken=None):
    lat, bonds = cube
    cls = np.zeros(bonds.n_pairs, np.int8)
    return BondFailureState(bonds, cls, prebroken)


def test_breaks_are_irreversible(cube):
    lat, bonds = cube
    st_ = _state(cube)
    X = lat.positions
    V = np.zeros_like(X)
    th = thresholds()
    p = DIF.as_array(0.0, 0.1)
    n = st_.commit(X, X * 1.01, V, th, p)
    assert n == bonds.n_pairs
    assert st_.commit(X, X, V, th, p) == 0
    assert st_.n_broken == bonds.n_pairs
    assert not st_.intact.any()


def test_damage_extremes(cube):
    lat, bonds = cube
    st_ = _state(cube)
    np.testing.assert_array_equal(damage(st_, lat.positions, lat.volumes), 0.0)
    st_.broken[:] = 1
    st_.sync()
    np.testing.assert_allclose(damage(st_, lat.positions, lat.volumes), 1.0)


def test_relative_damage_excludes_prebroken(cube):
    lat, bonds = cube
    rng = np.random.default_rng(3)
    pre = rng.random(bonds.n_pairs) < 0.3
    st_ = _state(cube, pre)
    raw, rel = st_.damage(lat.positions, lat.volumes)
    assert np.all(raw > 0)
    np.testing.assert_array_equal(rel, 0.0)
    assert st_.n_load_broken == 0


def test_single_broken_bond_damage_oracle(cube):
    lat, bonds = cube
    st_ = _state(cube)
    k = 0
    i, j = bonds.pair_i[k], bonds.pair_j[k]
    st_.broken[k] = 1
    st_.sync()
    raw = damage(st_, lat.positions, lat.volumes)
    from perikon.lattice import volume_factor
    for p in (i, j):
        nb = bonds.neighbors_of(p)
        q = j if p == i else i
        w = lambda n: lat.volumes[n] * volume_factor(  # noqa: E731
            np.linalg.norm(lat.positions[n] - lat.positions[p]), bonds.dx, bonds.horizon)
        total = sum(w(n) for n in nb)
        assert raw[p] == pytest.approx(w(q) / total, rel=1e-12)
    others = np.setdiff1d(np.arange(lat.n_points), [i, j])
    np.testing.assert_array_equal(raw[others], 0.0)


@given(st.integers(0, 2**31 - 1))
def test_endpoint_records_agree(seed):
    from perikon.lattice import build_lattice, build_neighbor_lists

    lat = build_lattice("box", (0.06, 0.05, 0.04), 0.01, 0.03)
    bonds = build_neighbor_lists(lat.positions, lat.horizon, lat.dx)
    st_ = BondFailureState(bonds, np.zeros(bonds.n_pairs, np.int8))
    rng = np.random.default_rng(seed)
    V = rng.standard_normal(lat.positions.shape)
    Y = lat.positions + 2e-5 * rng.standard_normal(lat.positions.shape)
    st_.commit(lat.positions, Y, V, thresholds(), DIF.as_array(1.0, 0.1))
    a, b = st_.endpoint_flags()
    np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(a, 1 - st_.broken)
