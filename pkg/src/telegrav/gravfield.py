"""Field theory of the potentials ``g^a``.

Lagrangian densities, superpotentials ``S_d``, the gravitational
energy-momentum forms (variational route and curvature route), the
Einstein-side matter forms, and the residuals of every identity relating
them. All functions take a :class:`~telegrav.tetrad.GeometrySet` so the
metric, connection and curvature are computed once per cotetrad.

Sign dictionary. ``R^d`` are the Ricci 1-forms of
:func:`telegrav.tetrad.ricci_and_scalar` (the Ricci operator applied to
``g^d``) and ``R`` their trace. ``calT^d = R^d - 1/2 R g^d`` is the source in
the curvature frame, and ``T^d = -calT^d`` is the Einstein tensor in the
usual sign (``T^0 _| g^0 = +G_00``). With these

    d*S_d + *t_d + *T_d = 0                      (any cotetrad)
    bold t^d = h^d - t^d = 1/2 R g^d + dotdot g^d + d delta g^d
    delta(calT^d + bold t^d) = 0

where ``t_d`` is the variational 3-form of :meth:`FieldTheory.star_t_terms`
and ``h_d`` the exact 3-form of :attr:`FieldTheory.star_h`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import scalars as S
from .forms import (
    KForm,
    codifferential,
    exterior_derivative,
    hodge_dalembertian,
    hodge_star,
    inverse_hodge_star,
    left_contract,
    wedge,
)
from .tetrad import ETA, GeometrySet, frame_components

__all__ = [
    "LagrangianSample",
    "EnergyMomentumSet",
    "FieldTheory",
    "lagrangian_forms",
    "superpotential",
    "gravitational_em_forms",
    "einstein_matter_forms",
    "field_equation_residual",
    "nice_formula_em",
    "em_components_matrix",
    "conservation_residual",
    "ricci_operator_residual",
    "covariant_dalembertian",
]


@dataclass
class LagrangianSample:
    L_g: KForm
    L_EH: KForm
    exact_term: KForm

    @property
    def splitting_residual(self) -> KForm:
        return self.L_g - self.L_EH - self.exact_term


@dataclass
class EnergyMomentumSet:
    S: list  # superpotential 2-forms S_d
    star_S: list  # 2-forms *S_d
    star_t: list  # 3-forms *t_d
    h: list  # 3-forms *h_d (exact)
    bold_t: list  # 1-forms bold t^d (index up)
    frak_t: list = field(default_factory=list)
    T: list = field(default_factory=list)


class FieldTheory:
    """Every form-valued object of the theory for one sampled cotetrad."""

    def __init__(self, geo: GeometrySet):
        self.geo = geo
        self.c = geo.cotetrad
        self.m = geo.metric

    # -- building blocks ---------------------------------------------------------
    def star(self, a: KForm) -> KForm:
        return hodge_star(a, self.m)

    def istar(self, a: KForm) -> KForm:
        return inverse_hodge_star(a, self.m)

    def ctr(self, a: KForm, b: KForm) -> KForm:
        return left_contract(a, b, self.m)

    @property
    def g(self) -> list[KForm]:
        return self.c.forms

    @cached_property
    def g_low(self) -> list[KForm]:
        return [self.c.lower(a) for a in range(4)]

    @property
    def dg(self) -> list[KForm]:
        return self.geo.dg

    @cached_property
    def dg_low(self) -> list[KForm]:
        return [self.dg[a] * ETA[a] for a in range(4)]

    @cached_property
    def star_dg_low(self) -> list[KForm]:
        return [self.star(x) for x in self.dg_low]

    @cached_property
    def star_g(self) -> list[KForm]:
        return [self.star(x) for x in self.g]

    @cached_property
    def div_g_low(self) -> list[KForm]:
        """0-forms ``*d*g_a``."""
        return [self.star(exterior_derivative(self.star(x))) for x in self.g_low]

    @cached_property
    def delta_g(self) -> list[KForm]:
        return [codifferential(x, self.m) for x in self.g]

    @cached_property
    def omega3(self) -> KForm:
        """The Chern-Simons-like 3-form ``dg^a ^ g_a``."""
        acc = KForm.zero(3, self.c.coords)
        for a in range(4):
            acc = acc + wedge(self.dg[a], self.g_low[a])
        return acc

    @cached_property
    def star_omega3(self) -> KForm:
        return self.star(self.omega3)

    @cached_property
    def K(self) -> list[list[KForm]]:
        """``K[d][a] = g_d _| *g^a`` (2-forms)."""
        return [[self.ctr(self.g_low[d], self.star_g[a]) for a in range(4)] for d in range(4)]

    # -- Lagrangians -----------------------------------------------------------------
    @cached_property
    def lagrangians(self) -> LagrangianSample:
        coords = self.c.coords
        L = KForm.zero(4, coords)
        for a in range(4):
            L = L - wedge(self.dg[a], self.star_dg_low[a]) * 0.5
            dl = self.delta_g[a] * ETA[a]
            L = L + wedge(self.delta_g[a], self.star(dl)) * 0.5
        L = L + wedge(self.omega3, self.star_omega3) * 0.25
        R = self.geo.curvature.forms
        LEH = KForm.zero(4, coords)
        for cc in range(4):
            for dd in range(4):
                if cc == dd:
                    continue
                R_low = R[cc][dd] * ETA[cc]
                LEH = LEH + wedge(R_low, self.star(wedge(self.g[cc], self.g[dd]))) * 0.5
        ex = KForm.zero(3, coords)
        for a in range(4):
            ex = ex + wedge(self.g[a], self.star_dg_low[a])
        return LagrangianSample(L, LEH, exterior_derivative(ex))

    # -- superpotential and energy-momentum ---------------------------------------
    @cached_property
    def star_S(self) -> list[KForm]:
        out = []
        for d in range(4):
            s = -self.star(self.dg_low[d])
            for a in range(4):
                s = s - self.K[d][a] * self.div_g_low[a].comps.get((), 0.0)
            s = s + wedge(self.g_low[d], self.star_omega3) * 0.5
            out.append(s)
        return out

    @cached_property
    def S(self) -> list[KForm]:
        return [self.istar(x) for x in self.star_S]

    def star_t_terms(self, d: int) -> list[KForm]:
        """The separate terms of ``*t_d = dL_g/dg^d`` (derivative at fixed ``dg``).

        In order: the Maxwell-like stress of ``dg^a``, the two pieces from the
        divergence term (``d(g_d _| *g^a) ^ *d*g_a`` and the volume variation
        ``-1/2 (*d*g^b)(*d*g_b) *g_d``), and the three pieces of the
        ``dg^a ^ g_a`` term.
        """
        gd = self.g_low[d]
        coords = self.c.coords
        t1 = KForm.zero(3, coords)
        t3 = KForm.zero(3, coords)
        lam2 = 0.0
        for a in range(4):
            t1 = t1 + (wedge(self.ctr(gd, self.dg[a]), self.star_dg_low[a]) - wedge(self.dg[a], self.ctr(gd, self.star_dg_low[a]))) * 0.5
            lam = self.div_g_low[a].comps.get((), 0.0)
            t3 = t3 + exterior_derivative(self.K[d][a]) * lam
            lam2 = S.add(lam2, S.mul(ETA[a], S.mul(lam, lam)))
        t4 = self.star_g[d] * ETA[d] * S.mul(-0.5, lam2)
        t5 = wedge(self.dg_low[d], self.star_omega3) * 0.5
        t6 = -wedge(self.omega3, self.ctr(gd, self.star_omega3)) * 0.25
        t7 = -wedge(self.ctr(gd, self.omega3), self.star_omega3) * 0.25
        return [t1, t3, t4, t5, t6, t7]

    @cached_property
    def star_t(self) -> list[KForm]:
        out = []
        for d in range(4):
            acc = KForm.zero(3, self.c.coords)
            for term in self.star_t_terms(d):
                acc = acc + term
            out.append(acc)
        return out

    @cached_property
    def h_potential(self) -> list[KForm]:
        """2-forms whose exterior derivatives are the ``*h_d``."""
        out = []
        for d in range(4):
            p = wedge(self.g_low[d], self.star_omega3) * -0.5
            for a in range(4):
                p = p + self.K[d][a] * self.div_g_low[a].comps.get((), 0.0)
            out.append(p)
        return out

    @cached_property
    def star_h(self) -> list[KForm]:
        return [exterior_derivative(p) for p in self.h_potential]

    @cached_property
    def t_up(self) -> list[KForm]:
        return [self.istar(x) * ETA[d] for d, x in enumerate(self.star_t)]

    @cached_property
    def h_up(self) -> list[KForm]:
        return [self.istar(x) * ETA[d] for d, x in enumerate(self.star_h)]

    @cached_property
    def bold_t_variational(self) -> list[KForm]:
        """``bold t^d = h^d - t^d`` with indices raised by eta."""
        return [self.h_up[d] - self.t_up[d] for d in range(4)]

    # -- Einstein side ------------------------------------------------------------------
    @cached_property
    def calT(self) -> list[KForm]:
        ric = self.geo.ricci
        return [ric.forms[d] - self.g[d] * S.mul(0.5, ric.scalar) for d in range(4)]

    @cached_property
    def T(self) -> list[KForm]:
        return [-x for x in self.calT]

    @cached_property
    def field_residual(self) -> list[KForm]:
        out = []
        for d in range(4):
            T_low = self.T[d] * ETA[d]
            out.append(exterior_derivative(self.star_S[d]) + self.star_t[d] + self.star(T_low))
        return out

    # -- curvature route ------------------------------------------------------------------
    @cached_property
    def hodge_dal_g(self) -> list[KForm]:
        return [hodge_dalembertian(x, self.m) for x in self.g]

    @cached_property
    def d_delta_g(self) -> list[KForm]:
        return [exterior_derivative(x) for x in self.delta_g]

    @cached_property
    def covariant_dal_g(self) -> list[KForm]:
        """``dotdot g^d = hodge d'Alembertian - Ricci operator`` with the Ricci operator taken as ``R^d``."""
        return [self.hodge_dal_g[d] - self.geo.ricci.forms[d] for d in range(4)]

    @cached_property
    def frak_t(self) -> list[KForm]:
        R = self.geo.ricci.scalar
        return [self.g[d] * S.mul(0.5, R) + self.covariant_dal_g[d] for d in range(4)]

    @cached_property
    def bold_t_nice(self) -> list[KForm]:
        return [self.frak_t[d] + self.d_delta_g[d] for d in range(4)]

    def energy_momentum(self) -> EnergyMomentumSet:
        return EnergyMomentumSet(
            S=self.S,
            star_S=self.star_S,
            star_t=self.star_t,
            h=self.star_h,
            bold_t=self.bold_t_variational,
            frak_t=self.frak_t,
            T=self.T,
        )


def covariant_dalembertian(geo: GeometrySet, d: int) -> KForm:
    """Covariant d'Alembertian ``eta^{bc}(D_b D_c - D_{D_b e_c}) g^d`` from the connection.

    Independent of the Hodge operators; used to check the Ricci-operator identity.
    """
    c = geo.cotetrad
    E = c.inverse_frame
    # W[k][b][a] = omega^k_a(e_b)
    W = [[frame_components(geo.omega[k][a], c) for a in range(4)] for k in range(4)]
    w = [[[W[k][a][b] for a in range(4)] for b in range(4)] for k in range(4)]
    # first covariant derivative of g^d: A[b][a] = -omega^d_a(e_b)
    A = [[S.mul(-1.0, w[d][b][a]) for a in range(4)] for b in range(4)]

    def e_derivative(f, cc):
        return S.total(S.mul(E[cc][mu], S.partial(f, mu, c.coords)) for mu in range(4))

    comps = []
    for a in range(4):
        acc = 0.0
        for cc in range(4):
            b = cc
            val = e_derivative(A[b][a], cc)
            for k in range(4):
                val = S.sub(val, S.mul(w[k][cc][b], A[k][a]))
                val = S.sub(val, S.mul(w[k][cc][a], A[b][k]))
            acc = S.add(acc, S.mul(ETA[cc], val))
        comps.append(acc)
    out = KForm.zero(1, c.coords)
    for a in range(4):
        if not S.is_zero(comps[a]):
            out = out + c.forms[a] * comps[a]
    return out


# -- module-level operations -------------------------------------------------------------


def lagrangian_forms(geo: GeometrySet) -> LagrangianSample:
    return FieldTheory(geo).lagrangians


def superpotential(geo: GeometrySet) -> list[KForm]:
    return FieldTheory(geo).S


def gravitational_em_forms(geo: GeometrySet):
    ft = FieldTheory(geo)
    return ft.star_t, ft.star_h, ft.bold_t_variational


def einstein_matter_forms(geo: GeometrySet) -> list[KForm]:
    return FieldTheory(geo).T


def field_equation_residual(geo: GeometrySet) -> list[KForm]:
    return FieldTheory(geo).field_residual


def nice_formula_em(geo: GeometrySet):
    ft = FieldTheory(geo)
    return ft.frak_t, ft.bold_t_nice


def ricci_operator_residual(geo: GeometrySet, ft: FieldTheory | None = None) -> list[KForm]:
    """``(hodge d'Alembertian - covariant d'Alembertian) g^d - R^d``."""
    ft = ft or FieldTheory(geo)
    return [ft.hodge_dal_g[d] - covariant_dalembertian(geo, d) - geo.ricci.forms[d] for d in range(4)]


def em_components_matrix(bold_t: list[KForm], geo: GeometrySet, covariant_dal: list[KForm] | None = None):
    """``t_da = eta_ac eta_dl (t^c _| g^l)`` sampled, plus the antisymmetry diagnostic.

    Returns ``(t_da, diagnostic)`` where ``t_da`` has shape (points, 4, 4) and
    the diagnostic compares ``t^{da} - t^{ad}`` with ``2 (dot-dot g^d) _| g^a``
    without asserting anything.
    """
    c = geo.cotetrad
    m = geo.metric
    npts = c.npoints
    up = np.zeros((npts or 1, 4, 4))  # up[c][l] = t^c _| g^l
    for cc in range(4):
        for l in range(4):
            v = left_contract(bold_t[cc], c.forms[l], m).comps.get((), 0.0)
            up[:, cc, l] = S.values(v, npoints=npts)
    eta = np.diag(ETA)
    t_da = np.einsum("ac,dl,xcl->xda", eta, eta, up)
    diag = {"asymmetry_norm": float(np.max(np.abs(up - np.swapaxes(up, 1, 2))))}
    if covariant_dal is not None:
        rhs = np.zeros_like(up)
        for dd in range(4):
            for a in range(4):
                v = left_contract(covariant_dal[dd], c.forms[a], m).comps.get((), 0.0)
                rhs[:, dd, a] = 2.0 * S.values(v, npoints=npts)
        diag["lhs_minus_rhs"] = float(np.max(np.abs((up - np.swapaxes(up, 1, 2)) - rhs)))
    return t_da, diag


def conservation_residual(geo: GeometrySet, ft: FieldTheory | None = None, route: str = "nice") -> list[KForm]:
    """``delta(calT^d + bold t^d)`` for each d (0-forms); equals ``-delta delta dg^d``."""
    ft = ft or FieldTheory(geo)
    bt = ft.bold_t_nice if route == "nice" else ft.bold_t_variational
    return [codifferential(ft.calT[d] + bt[d], geo.metric) for d in range(4)]
