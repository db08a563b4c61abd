import math

import numpy as np
import pytest

from telegrav.expr import parse_expression
from telegrav.forms import exterior_derivative
from telegrav.oracle import christoffel_pipeline
from telegrav.scenario import preset, random_tetrad, sample_points
from telegrav.tetrad import (
    ETA,
    Cotetrad,
    FrameError,
    GeometrySet,
    build_metric,
    cartan_torsion,
    check_metric,
    lorentz_transform,
)

from conftest import PRESET_NAMES, RANDOM_SEEDS, max_abs, sampled

SCHW = ("t", "r", "theta", "phi")
CART = ("t", "x", "y", "z")


def vals(x, n):
    return np.broadcast_to(np.asarray(getattr(x, "value", x), dtype=float), (n,))


def metric_values(c: Cotetrad, n):
    m = build_metric(c)
    return np.stack([np.stack([vals(x, n) for x in r], -1) for r in m.g], -2)


def test_minkowski_metric():
    s = preset("minkowski")
    pts = sample_points(s, 5, 0)
    g = metric_values(s.cotetrad().sample(pts, 0), 5)
    assert np.array_equal(g, np.broadcast_to(np.diag(ETA), (5, 4, 4)))


def test_schwarzschild_metric():
    s = preset("schwarzschild")
    pts = sample_points(s, 6, 0)
    g = metric_values(s.cotetrad().sample(pts, 0), 6)
    r, th = pts[:, 1], pts[:, 2]
    f = 1 - 2 / r
    ref = np.zeros((6, 4, 4))
    ref[:, 0, 0], ref[:, 1, 1], ref[:, 2, 2], ref[:, 3, 3] = f, -1 / f, -(r**2), -(r**2) * np.sin(th) ** 2
    assert np.allclose(g, ref, rtol=1e-14, atol=0)


def test_flrw_metric():
    s = preset("flrw")
    pts = sample_points(s, 6, 0)
    g = metric_values(s.cotetrad().sample(pts, 0), 6)
    a2 = pts[:, 0] ** (4 / 3)
    assert np.allclose(g[:, 0, 0], 1.0) and np.allclose(g[:, 1, 1], -a2, rtol=1e-14) and np.allclose(g[:, 3, 3], -a2, rtol=1e-14)


def test_metric_signature_check():
    s = preset("schwarzschild")
    pts = sample_points(s, 6, 0)
    c = s.cotetrad().sample(pts, 0)
    assert check_metric(build_metric(c), npoints=6)["inverse_residual"] < 1e-12


def test_structure_coefficients_minkowski_and_rindler(rindler_geo):
    pts, c, geo, _ = rindler_geo
    n = len(pts)
    C = geo.structure
    ref = 1.0 / (1.0 + pts[:, 1])
    assert np.allclose(vals(C[0][0][1], n), ref, rtol=1e-14)
    assert np.allclose(vals(C[0][1][0], n), -ref, rtol=1e-14)
    others = [(a, k, l) for a in range(4) for k in range(4) for l in range(4) if (a, k, l) not in ((0, 0, 1), (0, 1, 0))]
    assert all(np.all(vals(C[a][k][l], n) == 0) for a, k, l in others)
    _, _, mgeo, _ = sampled(preset("minkowski"), n=5)
    assert all(np.all(vals(x, 5) == 0) for A in mgeo.structure for row in A for x in row)


def test_structure_coefficients_flrw(flrw_geo):
    pts, c, geo, _ = flrw_geo
    n = len(pts)
    hubble = (2.0 / 3.0) / pts[:, 0]
    for i in (1, 2, 3):
        # dg^i = H g^0 ^ g^i  =>  C[i][0][i] = -H
        assert np.allclose(vals(geo.structure[i][0][i], n), -hubble, rtol=1e-13)


def test_connection_flrw(flrw_geo):
    pts, c, geo, _ = flrw_geo
    n = len(pts)
    hubble = (2.0 / 3.0) / pts[:, 0]
    for i in (1, 2, 3):
        got = vals(geo.omega[i][0][(i,)], n)
        assert np.allclose(got, hubble * pts[:, 0] ** (2 / 3), rtol=1e-13)
        assert set(geo.omega[i][0].comps) == {(i,)}


def test_connection_schwarzschild_sphere_part(schwarzschild_geo):
    pts, c, geo, _ = schwarzschild_geo
    n = len(pts)
    got = vals(geo.omega[2][3][(3,)], n)
    assert np.allclose(got, -np.cos(pts[:, 2]), rtol=1e-13, atol=1e-15)


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_cartan_torsion_vanishes_on_presets(name):
    pts, c, geo, _ = sampled(preset(name), n=30)
    assert max_abs(geo.torsion, len(pts)) < 1e-9


@pytest.mark.parametrize("seed", RANDOM_SEEDS)
def test_cartan_torsion_vanishes_on_random_tetrads(seed):
    pts, c, geo, _ = sampled(preset("random", seed), n=30)
    assert max_abs(geo.torsion, len(pts)) < 1e-9


def test_zero_connection_leaves_teleparallel_torsion(schwarzschild_geo):
    pts, c, geo, _ = schwarzschild_geo
    zero = [[geo.omega[a][b] * 0.0 for b in range(4)] for a in range(4)]
    th = cartan_torsion(c, zero)
    assert max_abs([th[a] - geo.dg[a] for a in range(4)], len(pts)) == 0.0


def test_rindler_is_flat_with_torsion(rindler_geo):
    pts, c, geo, _ = rindler_geo
    n = len(pts)
    assert max_abs([geo.curvature.forms[a][b] for a in range(4) for b in range(4)], n) < 1e-10
    # F^0 = a dx ^ dt
    assert np.allclose(vals(geo.dg[0][(0, 1)], n), -1.0)
    assert geo.dg[0].max_abs(npoints=n) > 0.1


def test_schwarzschild_teleparallel_torsion(schwarzschild_geo):
    pts, c, geo, _ = schwarzschild_geo
    r = pts[:, 1]
    ref = (1 / r**2) / np.sqrt(1 - 2 / r)
    # F^0 = ref dr ^ dt
    assert np.allclose(vals(geo.dg[0][(1, 0)], len(r)), ref, rtol=1e-13)


def test_schwarzschild_riemann_component_against_oracle():
    s = preset("schwarzschild")
    pts = np.array([[0.0, 4.0, math.pi / 3, 0.5]])
    geo = GeometrySet(s.cotetrad().sample(pts, 2))
    C = geo.curvature.components
    cd = christoffel_pipeline(s.tetrad, s.coords, s.params)
    coord = cd.sample(cd.riemann, pts)[0]
    e = np.diag([np.sqrt(0.5), 1 / np.sqrt(0.5), 4.0, 4.0 * np.sin(math.pi / 3)])
    einv = np.linalg.inv(e)
    # R^0_{101} in the frame
    ref = e[0, 0] * coord[0, 1, 0, 1] * einv[1, 1] * einv[0, 0] * einv[1, 1]
    assert vals(C[0][1][0][1], 1)[0] == pytest.approx(ref, rel=1e-8)
    # radial tidal component 2M/r^3
    assert ref == pytest.approx(2.0 / 4.0**3, rel=1e-12)


def test_ricci_vacuum_and_minkowski(schwarzschild_geo):
    pts, c, geo, _ = schwarzschild_geo
    n = len(pts)
    assert max(np.max(np.abs(vals(x, n))) for r in geo.ricci.ricci for x in r) < 1e-9
    _, _, mgeo, _ = sampled(preset("minkowski"), n=5)
    assert np.all(vals(mgeo.ricci.scalar, 5) == 0)


def test_identity_lorentz_transform(schwarzschild_geo):
    pts, c, geo, _ = schwarzschild_geo
    eye = [[1.0 if a == b else 0.0 for b in range(4)] for a in range(4)]
    c2 = lorentz_transform(c, eye)
    assert max_abs([c2.forms[a] - c.forms[a] for a in range(4)], len(pts)) == 0.0


def test_constant_boost_on_minkowski():
    s = preset("minkowski")
    pts = sample_points(s, 5, 0)
    c = s.cotetrad().sample(pts, 1)
    v = 0.5
    gam = 1 / math.sqrt(1 - v**2)
    lam = [[gam, -gam * v, 0, 0], [-gam * v, gam, 0, 0], [0, 0, 1.0, 0], [0, 0, 0, 1.0]]
    c2 = lorentz_transform(c, lam)
    assert np.allclose(metric_values(c2, 5), metric_values(c, 5), atol=1e-14)
    assert max_abs([exterior_derivative(g) for g in c2.forms], 5) == 0.0


def test_point_dependent_rotation_creates_torsion():
    table = [["1", 0, 0, 0], [0, "cos(x)", "sin(x)", 0], [0, "-sin(x)", "cos(x)", 0], [0, 0, 0, "1"]]
    c = Cotetrad.from_expressions(table, CART)
    pts = np.array([[0.0, 0.3, 0.1, 0.2], [0.1, -0.5, 0.4, 0.0]])
    cs = c.sample(pts, 1)
    assert np.allclose(metric_values(cs, 2), np.diag(ETA), atol=1e-15)
    assert max_abs([exterior_derivative(g) for g in cs.forms], 2) > 0.1


def test_non_lorentz_matrix_is_rejected(schwarzschild_geo):
    pts, c, geo, _ = schwarzschild_geo
    lam = [[2.0, 0, 0, 0], [0, 1.0, 0, 0], [0, 0, 1.0, 0], [0, 0, 0, 1.0]]
    with pytest.raises(FrameError):
        lorentz_transform(c, lam)


def test_bad_frame_shape():
    with pytest.raises(FrameError):
        Cotetrad([[1.0, 0.0]], CART)


def test_random_tetrad_is_seeded():
    assert random_tetrad(5) == random_tetrad(5)
    assert random_tetrad(5) != random_tetrad(6)
    parse_expression(random_tetrad(5)[0][0], CART)
