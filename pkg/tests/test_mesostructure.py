from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from perikon.errors import ConfigError
from perikon.mesostructure import (BondType, EffectiveClass, MesoModel, Phase, apply_pore_prebreak,
                                   assign_phases, bond_classes, class_fractions, classify_bond,
                                   effective_class, pre_damage_index)


def test_fractions_must_sum_to_one():
    with pytest.raises(ConfigError):
        MesoModel((0.4, 0.57, 0.0))
    MesoModel((0.4, 0.57, 0.03))


def test_porosity_above_critical_rejected():
    with pytest.raises(ConfigError):
        MesoModel(porosity=0.2, critical_porosity=0.1)
    with pytest.raises(ConfigError):
        pre_damage_index(0.2, 0.1)


def test_degenerate_fractions_give_single_phase():
    phases = assign_phases(1000, MesoModel((1.0, 0.0, 0.0)))
    assert np.all(phases == Phase.AGGREGATE)


def test_phase_frequencies_match_fractions():
    phases = assign_phases(10**6, MesoModel((0.4, 0.55, 0.05), seed=3))
    freq = np.bincount(phases, minlength=3) / len(phases)
    np.testing.assert_allclose(freq, [0.4, 0.55, 0.05], atol=0.005)


def test_same_seed_same_labels_and_different_seed_differs():
    meso = MesoModel(seed=11)
    a = assign_phases(5000, meso)
    b = assign_phases(5000, meso)
    c = assign_phases(5000, MesoModel(seed=12))
    np.testing.assert_array_equal(a, b)
    assert np.any(a != c)


def test_labels_are_a_prefix_stable_stream():
    # Labels depend only on the point index, not on how many points follow.
    meso = MesoModel(seed=5)
    np.testing.assert_array_equal(assign_phases(100, meso), assign_phases(1000, meso)[:100])


def test_classify_bond_is_symmetric_for_all_pairs():
    for a, b in itertools.product(Phase, repeat=2):
        assert classify_bond(a, b) == classify_bond(b, a)


@pytest.mark.parametrize(
    "a, b, btype, eff",
    [
        (Phase.AGGREGATE, Phase.AGGREGATE, BondType.AA, EffectiveClass.AGGREGATE),
        (Phase.AGGREGATE, Phase.MORTAR, BondType.AC, EffectiveClass.HOMOGENIZED),
        (Phase.MORTAR, Phase.ITZ, BondType.CI, EffectiveClass.INTERFACE),
        (Phase.AGGREGATE, Phase.ITZ, BondType.AI, EffectiveClass.INTERFACE),
        (Phase.ITZ, Phase.ITZ, BondType.II, EffectiveClass.INTERFACE),
        (Phase.MORTAR, Phase.MORTAR, BondType.CC, EffectiveClass.MORTAR),
    ],
)
def test_bond_types(a, b, btype, eff):
    t = classify_bond(a, b)
    assert t == btype
    assert effective_class(t) == eff


@pytest.mark.parametrize("phi, phic, d", [(0.1, 1.0, 0.1), (0.0, 1.0, 0.0), (0.5, 0.5, 1.0)])
def test_pre_damage_index(phi, phic, d):
    assert pre_damage_index(phi, phic) == pytest.approx(d)


def test_prebreak_extremes():
    i = np.arange(1000)
    j = i + 1
    assert not apply_pore_prebreak(i, j, 0.0, 1).any()
    assert apply_pore_prebreak(i, j, 1.0, 1).all()


def test_prebreak_fraction_at_tenth():
    n = 10**6
    i = np.arange(n)
    broken = apply_pore_prebreak(i, i + 1, 0.1, 7)
    assert abs(broken.mean() - 0.19) < 0.005


@given(st.floats(0.0, 1.0), st.integers(0, 2**32 - 1))
def test_prebreak_deterministic(d, seed):
    i = np.arange(200)
    a = apply_pore_prebreak(i, i + 1, d, seed)
    b = apply_pore_prebreak(i, i + 1, d, seed)
    np.testing.assert_array_equal(a, b)


def test_class_fractions_product_of_phase_fractions():
    rng = np.random.default_rng(0)
    phases = assign_phases(200_000, MesoModel((0.4, 0.55, 0.05), seed=2))
    pi = rng.integers(0, len(phases), 10**6)
    pj = rng.integers(0, len(phases), 10**6)
    _, eff = bond_classes(phases, pi, pj)
    f = class_fractions(eff)
    assert f["aggregate"] == pytest.approx(0.16, abs=0.005)
    assert f["interface"] == pytest.approx(0.0975, abs=0.005)
    assert f["mortar"] + f["homogenized"] == pytest.approx(0.7425, abs=0.005)
