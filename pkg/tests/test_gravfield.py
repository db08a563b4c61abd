import numpy as np
import pytest

from telegrav.forms import KForm, exterior_derivative, hodge_star
from telegrav.gravfield import (
    FieldTheory,
    conservation_residual,
    covariant_dalembertian,
    em_components_matrix,
    field_equation_residual,
    ricci_operator_residual,
)
from telegrav.scenario import preset
from telegrav.tetrad import ETA, GeometrySet, lorentz_transform

from conftest import PRESET_NAMES, RANDOM_SEEDS, max_abs, sampled


def vals(x, n):
    return np.broadcast_to(np.asarray(getattr(x, "value", x), dtype=float), (n,))


@pytest.fixture(scope="module")
def minkowski():
    return sampled(preset("minkowski"), n=10, order=3)


def test_minkowski_everything_vanishes(minkowski):
    pts, c, geo, ft = minkowski
    n = len(pts)
    L = ft.lagrangians
    assert max_abs([L.L_g, L.L_EH, L.exact_term], n) == 0.0
    for group in (ft.S, ft.star_t, ft.star_h, ft.T, ft.frak_t, ft.bold_t_variational, ft.bold_t_nice):
        assert max_abs(group, n) == 0.0


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_field_equation_on_presets(name):
    pts, c, geo, ft = sampled(preset(name), n=40)
    assert max_abs(ft.field_residual, len(pts)) < 1e-7


@pytest.mark.parametrize("seed", RANDOM_SEEDS)
def test_identities_on_random_tetrads(seed):
    pts, c, geo, ft = sampled(preset("random", seed), n=20)
    n = len(pts)
    assert max_abs(field_equation_residual(geo), n) < 1e-7
    assert ft.lagrangians.splitting_residual.max_abs(npoints=n) < 1e-7
    assert max_abs([ft.bold_t_variational[d] - ft.bold_t_nice[d] for d in range(4)], n) < 1e-7
    assert max_abs(ricci_operator_residual(geo, ft), n) < 1e-8


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_splitting_and_nice_formula_on_presets(name):
    pts, c, geo, ft = sampled(preset(name), n=40)
    n = len(pts)
    assert ft.lagrangians.splitting_residual.max_abs(npoints=n) < 1e-7
    assert max_abs([ft.bold_t_variational[d] - ft.bold_t_nice[d] for d in range(4)], n) < 1e-7
    assert max_abs(ricci_operator_residual(geo, ft), n) < 1e-8


def test_splitting_single_point_schwarzschild():
    s = preset("schwarzschild")
    pts = np.array([[0.0, 4.0, np.pi / 3, 1.0]])
    ft = FieldTheory(GeometrySet(s.cotetrad().sample(pts, 2)))
    assert ft.lagrangians.splitting_residual.max_abs(npoints=1) < 1e-8


@pytest.mark.parametrize("fixture", ["schwarzschild_geo", "flrw_geo"])
@pytest.mark.parametrize("route", ["nice", "variational"])
def test_conservation(fixture, route, request):
    pts, c, geo, ft = request.getfixturevalue(fixture)
    assert max_abs(conservation_residual(geo, ft, route), len(pts)) < 1e-6


def test_source_plus_gravity_is_a_codifferential():
    """calT^d + bold t^d = -delta d g^d, so its codifferential vanishes by nilpotency."""
    pts, c, geo, ft = sampled(preset("random", 3), n=10)
    from telegrav.forms import codifferential

    for d in range(4):
        rhs = codifferential(exterior_derivative(ft.g[d]), geo.metric)
        assert (ft.calT[d] + ft.bold_t_nice[d] + rhs).max_abs(npoints=len(pts)) < 1e-12
        assert rhs.max_abs(npoints=len(pts)) > 0.1


def test_schwarzschild_vacuum(schwarzschild_geo):
    pts, c, geo, ft = schwarzschild_geo
    assert max_abs(ft.T, len(pts)) < 1e-9


def test_flrw_source_at_unit_time():
    s = preset("flrw")
    pts = np.array([[1.0, 0.1, -0.2, 0.3], [1.0, 0.5, 0.0, -0.4]])
    ft = FieldTheory(GeometrySet(s.cotetrad().sample(pts, 2)))
    # T^0 _| g^0 with g^0 = dt: the time component of T^0
    val = vals(ft.T[0].comps[(0,)], 2)
    assert np.allclose(val, 4.0 / 3.0, rtol=1e-12)


def test_rindler_frame_energy(rindler_geo):
    pts, c, geo, ft = rindler_geo
    n = len(pts)
    assert np.max(np.abs(vals(geo.ricci.scalar, n))) < 1e-12
    assert max_abs([ft.frak_t[d] - ft.covariant_dal_g[d] for d in range(4)], n) < 1e-12
    assert max_abs(ft.S, n) > 1e-3
    assert max_abs(ft.bold_t_variational, n) > 1e-3
    assert max_abs(ft.field_residual, n) < 1e-7
    assert max_abs(ft.T, n) < 1e-10


def test_each_t_term_is_needed():
    """Dropping any nonzero term of *t_d breaks the field equation."""
    pts, c, geo, ft = sampled(preset("random", 3), n=10)
    n = len(pts)
    for d in range(4):
        terms = ft.star_t_terms(d)
        base = exterior_derivative(ft.star_S[d]) + hodge_star(ft.T[d] * ETA[d], ft.m)
        for i, term in enumerate(terms):
            if term.max_abs(npoints=n) < 1e-6:
                continue
            partial = base
            for j, other in enumerate(terms):
                if j != i:
                    partial = partial + other
            assert partial.max_abs(npoints=n) > 1e-6


def test_global_lorentz_covariance():
    pts, c, geo, ft = sampled(preset("random", 11), n=15)
    ch, sh = np.cosh(0.4), np.sinh(0.4)
    lam = [[ch, 0, sh, 0], [0, 1.0, 0, 0], [sh, 0, ch, 0], [0, 0, 0, 1.0]]
    primed = FieldTheory(GeometrySet(lorentz_transform(c, lam)))
    for d in range(4):
        expect = KForm.zero(1, c.coords)
        for k in range(4):
            if lam[d][k]:
                expect = expect + ft.bold_t_variational[k] * lam[d][k]
        assert (primed.bold_t_variational[d] - expect).max_abs(npoints=len(pts)) < 1e-8


def test_covariant_dalembertian_matches_hodge_split(schwarzschild_geo):
    pts, c, geo, ft = schwarzschild_geo
    for d in range(4):
        assert (covariant_dalembertian(geo, d) - ft.covariant_dal_g[d]).max_abs(npoints=len(pts)) < 1e-8


def test_em_matrix_minkowski_and_lorenz_gauge(minkowski):
    pts, c, geo, ft = minkowski
    t_da, diag = em_components_matrix(ft.bold_t_variational, geo, ft.covariant_dal_g)
    assert np.all(t_da == 0) and diag["asymmetry_norm"] == 0.0
    assert max_abs(ft.delta_g, len(pts)) == 0.0
    assert max_abs([ft.bold_t_nice[d] - ft.frak_t[d] for d in range(4)], len(pts)) == 0.0


def test_em_matrix_schwarzschild_is_not_symmetric(schwarzschild_geo):
    pts, c, geo, ft = schwarzschild_geo
    t_da, diag = em_components_matrix(ft.bold_t_variational, geo, ft.covariant_dal_g)
    assert t_da.shape == (len(pts), 4, 4)
    assert diag["asymmetry_norm"] > 0
    assert np.isfinite(diag["lhs_minus_rhs"])
