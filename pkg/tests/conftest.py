"""Shared helpers: sampled geometry for presets and random tetrads."""

from __future__ import annotations

import numpy as np
import pytest

from telegrav.gravfield import FieldTheory
from telegrav.scenario import preset, sample_points
from telegrav.tetrad import GeometrySet

PRESET_NAMES = ("minkowski", "rindler", "schwarzschild", "schwarzschild_isotropic", "flrw")
RANDOM_SEEDS = tuple(range(100, 120))


def sampled(scenario, n=40, seed=7, order=2):
    pts = sample_points(scenario, n, seed)
    c = scenario.cotetrad().sample(pts, order)
    geo = GeometrySet(c)
    return pts, c, geo, FieldTheory(geo)


def max_abs(forms, n):
    out = 0.0
    for f in forms:
        out = max(out, f.max_abs(npoints=n))
    return out


@pytest.fixture(scope="session")
def schwarzschild_geo():
    return sampled(preset("schwarzschild"), n=30, order=3)


@pytest.fixture(scope="session")
def flrw_geo():
    return sampled(preset("flrw"), n=30, order=3)


@pytest.fixture(scope="session")
def rindler_geo():
    return sampled(preset("rindler"), n=30, order=2)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
