from __future__ import annotations

import warnings

import numpy as np
import pytest
from hypothesis import settings

warnings.filterwarnings("ignore", message=".*TBB.*")

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(scope="session")
def cube():
    """Small cubic lattice with its bonds (delta = 3 dx)."""
    from perikon.lattice import build_lattice, build_neighbor_lists

    lat = build_lattice("box", (0.12, 0.12, 0.12), 0.01, 0.03)
    bonds = build_neighbor_lists(lat.positions, lat.horizon, lat.dx)
    return lat, bonds


def uniform_elasticity(n, youngs=32e9, nu=0.2, rho=2400.0, influence="unit"):
    from perikon.constitutive import PointElasticity
    from perikon.homogenization import bulk_shear_from_young

    k, g = bulk_shear_from_young(youngs, nu)
    return PointElasticity(np.full(n, k), np.full(n, g), np.full(n, rho), influence)


_ACCEPTANCE_LINES: list = []


@pytest.fixture
def report():
    """Record one pass/fail line per acceptance criterion."""

    def _report(criterion: int, title: str, ok: bool, detail: str = ""):
        line = f"criterion {criterion} [{'PASS' if ok else 'FAIL'}] {title}"
        if detail:
            line += f": {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
