import math

import numpy as np
import pytest

from telegrav.oracle import (
    ChristoffelData,
    DegenerateMetricError,
    christoffel_pipeline,
    compare_arrays,
    cross_check,
    metric_from_tetrad,
)
from telegrav.scenario import preset, sample_points
from telegrav.tetrad import GeometrySet


def pipeline(name):
    s = preset(name)
    return s, christoffel_pipeline(s.tetrad, s.coords, s.params)


def test_minkowski_christoffels_vanish():
    s, cd = pipeline("minkowski")
    assert all(x.is_zero for a in cd.gamma for b in a for x in b)


def test_schwarzschild_christoffel_example():
    s, cd = pipeline("schwarzschild")
    pts = np.array([[0.0, r, 1.0, 0.0] for r in (3.0, 4.0, 12.0)])
    got = cd.sample([cd.gamma[1][0][0]], pts)[:, 0]
    r = pts[:, 1]
    assert np.allclose(got, (1 / r**2) * (1 - 2 / r), rtol=1e-14)


def test_flrw_christoffel_example():
    s, cd = pipeline("flrw")
    pts = np.array([[t, 0.0, 0.0, 0.0] for t in (0.5, 1.0, 2.0)])
    got = cd.sample([cd.gamma[1][0][1]], pts)[:, 0]
    assert np.allclose(got, 2.0 / (3.0 * pts[:, 0]), rtol=1e-14)


@pytest.mark.parametrize("name", ["schwarzschild", "flrw", "random"])
def test_symmetries_and_bianchi(name):
    s = preset(name, 5)
    cd = christoffel_pipeline(s.tetrad, s.coords, s.params)
    pts = sample_points(s, 10, 3)
    gam = cd.sample(cd.gamma, pts)
    assert np.max(np.abs(gam - np.swapaxes(gam, 2, 3))) == 0.0
    ric = cd.sample(cd.ricci, pts)
    assert np.max(np.abs(ric - np.swapaxes(ric, 1, 2))) < 1e-9
    assert np.max(np.abs(cd.sample(cd.bianchi, pts))) < 1e-6


def test_schwarzschild_vacuum():
    s, cd = pipeline("schwarzschild")
    pts = sample_points(s, 20, 1)
    assert np.max(np.abs(cd.sample(cd.einstein, pts))) < 1e-9


def test_flrw_energy_density():
    s, cd = pipeline("flrw")
    pts = np.array([[1.0, 0.2, -0.1, 0.4]])
    assert cd.sample([cd.einstein[0][0]], pts)[0, 0] == pytest.approx(4.0 / 3.0, rel=1e-8)
    t = np.array([0.7, 1.3, 1.9])
    pts = np.column_stack([t, np.zeros((3, 3))])
    assert np.allclose(cd.sample([cd.einstein[0][0]], pts)[:, 0], 3 * (2 / (3 * t)) ** 2, rtol=1e-8)


@pytest.mark.parametrize("name", ["minkowski", "schwarzschild", "random"])
def test_cross_check_frame_riemann(name):
    s = preset(name, 8)
    cd = christoffel_pipeline(s.tetrad, s.coords, s.params)
    pts = sample_points(s, 25, 2)
    c = s.cotetrad().sample(pts, 2)
    geo = GeometrySet(c)
    n = len(pts)

    def stack(nested):
        arr = np.asarray(nested, dtype=object)
        flat = [np.broadcast_to(np.asarray(getattr(x, "value", x), dtype=float), (n,)) for x in arr.ravel()]
        return np.stack(flat, -1).reshape((n,) + arr.shape)

    report = cross_check(stack(geo.curvature.components), stack(c.frame), stack(c.inverse_frame), cd, pts, 1e-8)
    assert report.passed, report


def test_degenerate_metric():
    table = [["1", 0, 0, 0], [0, "x", 0, 0], [0, 0, "1", 0], [0, 0, 0, "1"]]
    cd = ChristoffelData(metric_from_tetrad(table, ("t", "x", "y", "z")), ("t", "x", "y", "z"))
    with pytest.raises(DegenerateMetricError):
        cd.check_nondegenerate(np.array([[0.0, 0.0, 0.0, 0.0]]))


def test_compare_arrays_mixed_scale():
    big = compare_arrays("a", [100.0 + 1e-7], [100.0], 1e-8)
    assert big.max_rel == pytest.approx(1e-9, rel=1e-4) and big.passed
    tiny = compare_arrays("b", [3e-16], [1e-16], 1e-8)
    assert tiny.passed and tiny.max_rel == pytest.approx(2e-16)
    bad = compare_arrays("c", [math.nan], [0.0], 1.0)
    assert not bad.passed
    assert set(big.as_dict()) == {"name", "n_points", "max_abs", "max_rel", "tol", "pass"}
