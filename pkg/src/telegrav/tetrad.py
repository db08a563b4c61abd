"""Cotetrads and the geometry they induce.

From four 1-forms ``g^a = e^a_mu dx^mu`` this module builds the metric
``g = eta_ab g^a (x) g^b``, the structure coefficients of the frame, the
Levi-Civita connection 1-forms (closed formula in terms of ``d g^a``), the
torsion and curvature 2-forms of Cartan's structure equations, Ricci data,
and the teleparallel torsion ``F^a = d g^a``.

Index dictionary (checked against the coordinate oracle):

* ``curvature.components[a][b][c][d]`` is the coefficient in
  ``R^a_b = 1/2 C[a][b][c][d] g^c ^ g^d``, i.e. the standard ``R^a_{bcd}``.
* ``ricci[a][c] = sum_b C[b][a][c][b]``, the contraction ``R_a^b_{cb}`` used
  for the Ricci 1-forms. With this placement it is minus the usual
  ``R^b_{abc}`` Ricci tensor; see :data:`RICCI_SIGN_VS_STANDARD`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from . import scalars as S
from .expr import ScalarField, parse_expression
from .forms import (
    KForm,
    MetricData,
    exterior_derivative,
    left_contract,
    one_form,
    wedge,
)
from .jets import jets_from_fields

__all__ = [
    "ETA",
    "RICCI_SIGN_VS_STANDARD",
    "Cotetrad",
    "GeometrySet",
    "FrameError",
    "build_metric",
    "check_metric",
    "structure_coefficients",
    "levi_civita_connection",
    "cartan_torsion",
    "curvature_2forms",
    "ricci_and_scalar",
    "teleparallel_torsion",
    "lorentz_transform",
    "frame_components",
]

ETA = (1.0, -1.0, -1.0, -1.0)
# ricci[a][c] from ricci_and_scalar equals this times the textbook R^b_{abc}
RICCI_SIGN_VS_STANDARD = -1


class FrameError(ValueError):
    pass


class Cotetrad:
    """Four 1-forms ``g^a`` given by a frame matrix ``e[a][mu]``.

    Components may be floats, symbolic fields or jets. :meth:`sample` turns a
    symbolic cotetrad into jets at a set of points.
    """

    def __init__(self, frame: Sequence[Sequence], coords: Sequence[str], params: Mapping[str, float] | None = None):
        if len(frame) != 4 or any(len(r) != len(coords) for r in frame):
            raise FrameError("frame must be a 4 x 4 table")
        self.frame = [list(r) for r in frame]
        self.coords = tuple(coords)
        self.params = dict(params or {})
        self.points: np.ndarray | None = None

    @classmethod
    def from_expressions(cls, table, coords: Sequence[str], params: Mapping[str, float] | None = None) -> "Cotetrad":
        """``table[a][mu]`` holds expression strings (or numbers / fields)."""
        params = dict(params or {})
        frame = []
        for row in table:
            out = []
            for x in row:
                if isinstance(x, str):
                    x = parse_expression(x, coords, list(params))
                if isinstance(x, ScalarField) and x.is_const:
                    x = x.value
                out.append(x)
            frame.append(out)
        return cls(frame, coords, params)

    def sample(self, points: np.ndarray, order: int) -> "Cotetrad":
        """Jet version of a symbolic cotetrad at ``points`` (shape (n, 4))."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        syms = [(a, mu) for a in range(4) for mu in range(4) if isinstance(self.frame[a][mu], ScalarField)]
        jets = jets_from_fields([self.frame[a][mu] for a, mu in syms], self.coords, points, self.params, order)
        frame = [[x if not isinstance(x, ScalarField) else None for x in r] for r in self.frame]
        for (a, mu), j in zip(syms, jets):
            frame[a][mu] = j
        out = Cotetrad(frame, self.coords, self.params)
        out.points = points
        return out

    @property
    def npoints(self) -> int | None:
        return None if self.points is None else self.points.shape[0]

    @cached_property
    def forms(self) -> list[KForm]:
        return [one_form(r, self.coords) for r in self.frame]

    def lower(self, a: int) -> KForm:
        return self.forms[a] * ETA[a]

    @cached_property
    def inverse_frame(self) -> list[list]:
        """``E[a][mu]``: components of the dual vectors ``e_a = E[a][mu] d/dx^mu``."""
        inv, _ = S.inverse(self.frame)
        return [[inv[mu][a] for mu in range(4)] for a in range(4)]

    @cached_property
    def frame_det(self):
        return S.det(self.frame)


def check_frame(c: Cotetrad, env=None, tol: float = 1e-10) -> None:
    det = S.values(c.frame_det, env, c.npoints)
    if np.any(np.abs(det) <= tol):
        raise FrameError("degenerate frame at a sample point")


def build_metric(c: Cotetrad) -> MetricData:
    g = [[S.total(S.mul(ETA[a], S.mul(c.frame[a][m], c.frame[a][n])) for a in range(4)) for n in range(4)] for m in range(4)]
    E = c.inverse_frame
    ginv = [[S.total(S.mul(ETA[a], S.mul(E[a][m], E[a][n])) for a in range(4)) for n in range(4)] for m in range(4)]
    return MetricData(g, ginv, S.absval(c.frame_det), c.coords)


def check_metric(m: MetricData, env=None, npoints=None, tol: float = 1e-12) -> dict:
    """Signature and inverse checks at sample points; raises on failure."""
    g = S.matrix_values(m.g, env, npoints)
    gi = S.matrix_values(m.ginv, env, npoints)
    g, gi = np.broadcast_arrays(g, gi)
    if np.any(np.abs(np.linalg.det(g)) < tol):
        raise FrameError("near-degenerate metric at a sample point")
    eig = np.linalg.eigvalsh(g)
    if not (np.all(np.sum(eig > 0, axis=-1) == 1) and np.all(np.sum(eig < 0, axis=-1) == 3)):
        raise FrameError("metric signature is not (+,-,-,-) at every sample point")
    prod = np.einsum("...ij,...jk->...ik", g, gi)
    err = float(np.max(np.abs(prod - np.eye(4))))
    if err > 1e-10:
        raise FrameError(f"g . ginv differs from identity by {err:.3g}")
    return {"inverse_residual": err}


def frame_components(F: KForm, c: Cotetrad) -> list:
    """Components of a 1- or 2-form on the dual frame, ``F(e_k, ...)``."""
    E = c.inverse_frame
    if F.grade == 1:
        return [S.total(S.mul(E[k][mu], x) for (mu,), x in F.comps.items()) for k in range(4)]
    if F.grade == 2:
        out = [[0.0] * 4 for _ in range(4)]
        for k in range(4):
            for l in range(k + 1, 4):
                acc = 0.0
                for (mu, nu), x in F.comps.items():
                    w = S.sub(S.mul(E[k][mu], E[l][nu]), S.mul(E[k][nu], E[l][mu]))
                    acc = S.add(acc, S.mul(w, x))
                out[k][l] = acc
                out[l][k] = S.mul(-1.0, acc)
        return out
    raise ValueError("frame components only for grades 1 and 2")


def structure_coefficients(c: Cotetrad) -> list:
    """``C[a][k][l]`` with ``d g^a = -1/2 C[a][k][l] g^k ^ g^l``."""
    out = []
    for a in range(4):
        F = frame_components(exterior_derivative(c.forms[a]), c)
        out.append([[S.mul(-1.0, F[k][l]) for l in range(4)] for k in range(4)])
    return out


def teleparallel_torsion(c: Cotetrad) -> list[KForm]:
    return [exterior_derivative(g) for g in c.forms]


def levi_civita_connection(c: Cotetrad, m: MetricData | None = None) -> list[list[KForm]]:
    """Connection 1-forms ``omega[a][b] = omega^a_b`` from the closed formula

    ``omega^cd = 1/2 [ g^d _| dg^c - g^c _| dg^d + g^c _| (g^d _| dg_a) g^a ]``.
    """
    m = m or build_metric(c)
    g = c.forms
    dg = [exterior_derivative(x) for x in g]
    dg_low = [dg[a] * ETA[a] for a in range(4)]
    upper = [[None] * 4 for _ in range(4)]
    for cc in range(4):
        for dd in range(cc + 1, 4):
            w = left_contract(g[dd], dg[cc], m) - left_contract(g[cc], dg[dd], m)
            for a in range(4):
                inner = left_contract(g[cc], left_contract(g[dd], dg_low[a], m), m)
                coeff = inner.comps.get((), 0.0)
                if not S.is_zero(coeff):
                    w = w + g[a] * coeff
            w = w * 0.5
            upper[cc][dd] = w
            upper[dd][cc] = -w
    zero = KForm.zero(1, c.coords)
    return [[(upper[a][b] if a != b else zero) * ETA[b] for b in range(4)] for a in range(4)]


def cartan_torsion(c: Cotetrad, omega: list[list[KForm]]) -> list[KForm]:
    out = []
    for a in range(4):
        th = exterior_derivative(c.forms[a])
        for b in range(4):
            th = th + wedge(omega[a][b], c.forms[b])
        out.append(th)
    return out


@dataclass
class Curvature2Forms:
    forms: list  # forms[a][b] = R^a_b
    components: list  # components[a][b][c][d]


def curvature_2forms(omega: list[list[KForm]], c: Cotetrad | None = None) -> Curvature2Forms:
    R = []
    for a in range(4):
        row = []
        for b in range(4):
            F = exterior_derivative(omega[a][b])
            for k in range(4):
                F = F + wedge(omega[a][k], omega[k][b])
            row.append(F)
        R.append(row)
    comps = None
    if c is not None:
        comps = [[frame_components(R[a][b], c) for b in range(4)] for a in range(4)]
    return Curvature2Forms(R, comps)


@dataclass
class RicciData:
    ricci: list  # ricci[a][c]
    forms: list  # Ricci 1-forms R^d = R^d_a g^a
    scalar: object


def ricci_and_scalar(R: Curvature2Forms, c: Cotetrad) -> RicciData:
    C = R.components
    ric = [[S.total(C[b][a][cc][b] for b in range(4)) for cc in range(4)] for a in range(4)]
    scalar = S.total(S.mul(ETA[a], ric[a][a]) for a in range(4))
    forms = []
    for dd in range(4):
        f = KForm.zero(1, c.coords)
        for a in range(4):
            coeff = S.mul(ETA[dd], ric[dd][a])
            if not S.is_zero(coeff):
                f = f + c.forms[a] * coeff
        forms.append(f)
    return RicciData(ric, forms, scalar)


def lorentz_transform(c: Cotetrad, lam: Sequence[Sequence], tol: float = 1e-10, env=None) -> Cotetrad:
    """``g'^a = lam[a][b] g^b`` after checking ``lam^T eta lam = eta`` at the points."""
    npts = c.npoints
    for i in range(4):
        for j in range(4):
            v = S.total(S.mul(ETA[a], S.mul(lam[a][i], lam[a][j])) for a in range(4))
            target = ETA[i] if i == j else 0.0
            err = np.max(np.abs(S.values(v, env, npts) - target)) if not S.is_zero(v) else abs(target)
            if err > tol:
                raise FrameError(f"transformation is not Lorentz (entry {i},{j} off by {err:.3g})")
    frame = [[S.total(S.mul(lam[a][b], c.frame[b][mu]) for b in range(4)) for mu in range(4)] for a in range(4)]
    out = Cotetrad(frame, c.coords, c.params)
    out.points = c.points
    return out


class GeometrySet:
    """Lazily computed geometry of one cotetrad, shared by every check."""

    def __init__(self, c: Cotetrad):
        self.cotetrad = c

    @cached_property
    def metric(self) -> MetricData:
        return build_metric(self.cotetrad)

    @cached_property
    def dg(self) -> list[KForm]:
        return teleparallel_torsion(self.cotetrad)

    @cached_property
    def structure(self) -> list:
        return structure_coefficients(self.cotetrad)

    @cached_property
    def omega(self) -> list[list[KForm]]:
        return levi_civita_connection(self.cotetrad, self.metric)

    @cached_property
    def torsion(self) -> list[KForm]:
        return cartan_torsion(self.cotetrad, self.omega)

    @cached_property
    def curvature(self) -> Curvature2Forms:
        return curvature_2forms(self.omega, self.cotetrad)

    @cached_property
    def ricci(self) -> RicciData:
        return ricci_and_scalar(self.curvature, self.cotetrad)
