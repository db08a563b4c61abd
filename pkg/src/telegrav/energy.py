"""Surface-integral energies on coordinate 2-spheres.

Quasi-local energy-momentum ``P^a = -oint *S^a``, the boundary term of the
Hamiltonian ``B' = -N g_i ^ *_m d g^i`` (the tangential parts, underlined in
the usual notation), ADM component formulas, a textbook ADM surface integral
used as an oracle, and the radial extrapolation to spatial infinity.

Spheres are parametrised by ``(theta, phi)`` with Gauss-Legendre nodes in
``cos(theta)`` and a uniform trapezoid rule in ``phi``. A 2-form is pulled
back along the embedding and integrated with the orientation induced by the
outward normal. Every radius of a series is sampled in one batch so the
geometry is built once.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import scalars as S
from .forms import KForm, basis_form, exterior_derivative, hodge_star, left_contract, scalar_form, wedge
from .gravfield import FieldTheory
from .tetrad import ETA, Cotetrad, GeometrySet, build_metric

__all__ = [
    "SphereSpec",
    "FoliationSpec",
    "SphereBatch",
    "ExtrapolationResult",
    "EnergyError",
    "foliation_split",
    "underline",
    "underline_d",
    "spatial_star",
    "quasi_local_energy",
    "quasi_local_E",
    "boundary_term",
    "adm_component_integrals",
    "textbook_adm_energy",
    "extrapolate_to_infinity",
    "energy_series",
    "quadrature_convergence",
    "stokes_shell_check",
    "ADM_NORMALIZATION",
    "QUASI_LOCAL_NORMALIZATION",
]

log = logging.getLogger(__name__)

# E' (and E, P^0) of isotropic Schwarzschild tend to -8 pi M, -8 pi M and
# +8 pi M; these constants turn the raw integrals into masses.
ADM_NORMALIZATION = -1.0 / (8.0 * math.pi)
QUASI_LOCAL_NORMALIZATION = 1.0 / (8.0 * math.pi)


class EnergyError(RuntimeError):
    pass


@dataclass(frozen=True)
class SphereSpec:
    """A coordinate 2-sphere at fixed time."""

    radius: float
    n_theta: int = 32
    n_phi: int = 64
    center: tuple = (0.0, 0.0, 0.0)
    time: float = 0.0

    def __post_init__(self):
        if self.n_theta < 8 or self.n_phi < 8:
            raise ValueError("sphere quadrature orders must be at least 8")
        if not self.radius > 0:
            raise ValueError("sphere radius must be positive")

    def doubled(self) -> "SphereSpec":
        return SphereSpec(self.radius, 2 * self.n_theta, 2 * self.n_phi, self.center, self.time)


@dataclass
class FoliationSpec:
    """Foliation by ``t = const`` with normal ``n = N^2 dt``.

    ``lapse`` may be a symbolic field or ``None``, in which case the lapse is
    taken from the metric as ``N = (g^{tt})^(-1/2)`` so that ``n _| dt = 1``.
    """

    lapse: object = None
    time_index: int = 0


def _quadrature(spec: SphereSpec):
    u, w = np.polynomial.legendre.leggauss(spec.n_theta)
    theta = np.arccos(u)
    phi = np.arange(spec.n_phi) * (2.0 * math.pi / spec.n_phi)
    TH, PH = np.meshgrid(theta, phi, indexing="ij")
    # d(theta) = du / sin(theta); the 1/sin is applied by the caller after pull-back
    W = np.repeat(w, spec.n_phi) * (2.0 * math.pi / spec.n_phi)
    return TH.ravel(), PH.ravel(), W


def _embedding(chart: str, spec: SphereSpec, r, TH, PH):
    """Coordinates of the points and tangent vectors d/dr, d/dtheta, d/dphi (shape (n, 4))."""
    n = TH.size
    r = np.broadcast_to(np.asarray(r, dtype=float), (n,))
    t = np.full(n, spec.time)
    z = np.zeros(n)
    one = np.ones(n)
    if chart == "spherical":
        pts = np.column_stack([t, r, TH, PH])
        return pts, np.column_stack([z, one, z, z]), np.column_stack([z, z, one, z]), np.column_stack([z, z, z, one])
    if chart != "cartesian":
        raise ValueError(f"unknown chart kind {chart!r}")
    st, ct, sp, cp = np.sin(TH), np.cos(TH), np.sin(PH), np.cos(PH)
    cx, cy, cz = spec.center
    pts = np.column_stack([t, cx + r * st * cp, cy + r * st * sp, cz + r * ct])
    d_r = np.column_stack([z, st * cp, st * sp, ct])
    d_th = np.column_stack([z, r * ct * cp, r * ct * sp, -r * st])
    d_ph = np.column_stack([z, -r * st * sp, r * st * cp, z])
    return pts, d_r, d_th, d_ph


def pullback(form: KForm, tangents: Sequence[np.ndarray], npoints: int) -> np.ndarray:
    """``form(v_1, ..., v_k)`` at every point for tangent vectors of shape (n, 4)."""
    k = form.grade
    if len(tangents) != k:
        raise ValueError("need one tangent vector per form degree")
    out = np.zeros(npoints)
    for idx, comp in form.comps.items():
        vals = np.broadcast_to(S.values(comp, npoints=npoints), (npoints,))
        minor = np.stack([np.stack([tangents[j][:, i] for j in range(k)], -1) for i in idx], -2)
        out = out + vals * np.linalg.det(minor)
    return out


@dataclass
class SphereBatch:
    """Quadrature points of several concentric spheres, sampled together."""

    chart: str
    specs: list
    points: np.ndarray
    weights: np.ndarray
    d_theta: np.ndarray
    d_phi: np.ndarray
    d_r: np.ndarray
    slices: list

    @classmethod
    def build(cls, chart: str, specs: Sequence[SphereSpec]) -> "SphereBatch":
        pts, wts, dth, dph, dr, slices = [], [], [], [], [], []
        start = 0
        for spec in specs:
            TH, PH, W = _quadrature(spec)
            p, d_r, d_th, d_ph = _embedding(chart, spec, spec.radius, TH, PH)
            pts.append(p)
            wts.append(W / np.sin(TH))
            dth.append(d_th)
            dph.append(d_ph)
            dr.append(d_r)
            slices.append(slice(start, start + len(W)))
            start += len(W)
        return cls(chart, list(specs), np.vstack(pts), np.concatenate(wts), np.vstack(dth), np.vstack(dph), np.vstack(dr), slices)

    @property
    def npoints(self) -> int:
        return self.points.shape[0]

    def integrate(self, form: KForm) -> np.ndarray:
        """Integral of a 2-form over each sphere of the batch."""
        f = pullback(form, [self.d_theta, self.d_phi], self.npoints) * self.weights
        return np.array([math.fsum(f[s]) for s in self.slices])


def _geometry(c: Cotetrad, batch: SphereBatch, order: int = 1) -> FieldTheory:
    sampled = c.sample(batch.points, order)
    return FieldTheory(GeometrySet(sampled))


# -- foliation ----------------------------------------------------------------------------------


def lapse_and_normal(ft: FieldTheory, fol: FoliationSpec | None = None):
    """Return ``(N, n)`` with ``n = N^2 dt`` as a 1-form."""
    fol = fol or FoliationSpec()
    m = ft.m
    coords = ft.c.coords
    ti = fol.time_index
    if fol.lapse is None:
        N = S.recip(S.sqrt(m.ginv[ti][ti]))
    else:
        N = fol.lapse
        if not isinstance(N, (int, float)) and not hasattr(N, "coef"):
            from .jets import jet_from_field

            N = jet_from_field(N, coords, ft.c.points, ft.c.params, 1)
    n = basis_form((ti,), coords) * S.mul(N, N)
    return N, n


def check_frobenius(n: KForm, npoints: int | None, tol: float = 1e-10) -> float:
    err = wedge(n, exterior_derivative(n)).max_abs(npoints=npoints)
    if err > tol:
        raise EnergyError(f"normal is not hypersurface orthogonal (n ^ dn = {err:.3g})")
    return err


def foliation_split(A: KForm, n: KForm, m, time_index: int = 0):
    """``A = tangent + orthogonal`` with tangent ``n _| (dt ^ A)`` and orthogonal ``dt ^ (n _| A)``."""
    dt = basis_form((time_index,), A.coords)
    tangent = left_contract(n, wedge(dt, A), m)
    if A.grade == 0:
        return tangent, KForm.zero(0, A.coords)
    orth = wedge(dt, left_contract(n, A, m))
    return tangent, orth


def underline(A: KForm, n: KForm, m, time_index: int = 0) -> KForm:
    return left_contract(n, wedge(basis_form((time_index,), A.coords), A), m)


def underline_d(A: KForm, n: KForm, m, time_index: int = 0) -> KForm:
    return left_contract(n, wedge(basis_form((time_index,), A.coords), exterior_derivative(A)), m)


def spatial_star(A: KForm, n: KForm, N, m) -> KForm:
    """Hodge dual of the slice: ``*_m A = *((n/N) ^ A)``."""
    return hodge_star(wedge(n * S.recip(N), A), m)


# -- energies -----------------------------------------------------------------------------------


def quasi_local_energy(c: Cotetrad, spheres: Sequence[SphereSpec], chart: str, ft: FieldTheory | None = None, batch=None) -> np.ndarray:
    """``P^a = -oint *S^a`` on each sphere; shape (len(spheres), 4)."""
    batch = batch or SphereBatch.build(chart, spheres)
    ft = ft or _geometry(c, batch)
    return np.stack([-batch.integrate(ft.star_S[a] * ETA[a]) for a in range(4)], -1)


def quasi_local_E(c: Cotetrad, spheres: Sequence[SphereSpec], chart: str, ft=None, batch=None) -> np.ndarray:
    """``E = oint *S_0`` (Hamiltonian boundary value for ``Z = e_0``)."""
    batch = batch or SphereBatch.build(chart, spheres)
    ft = ft or _geometry(c, batch)
    return batch.integrate(ft.star_S[0])


def boundary_term_form(ft: FieldTheory, fol: FoliationSpec | None = None) -> KForm:
    """``B' = -N g_i ^ *_m d g^i`` (tangential parts, spatial frame indices)."""
    fol = fol or FoliationSpec()
    N, n = lapse_and_normal(ft, fol)
    m = ft.m
    ti = fol.time_index
    acc = KForm.zero(2, ft.c.coords)
    for i in (1, 2, 3):
        gi = underline(ft.g[i], n, m, ti)
        gi_low = gi * ETA[i]
        dgi = underline_d(gi, n, m, ti)
        acc = acc + wedge(gi_low, spatial_star(dgi, n, N, m))
    return acc * S.mul(-1.0, N)


def boundary_term(c: Cotetrad, spheres: Sequence[SphereSpec], chart: str, fol: FoliationSpec | None = None, ft=None, batch=None) -> np.ndarray:
    """``E' = oint B'`` on each sphere."""
    batch = batch or SphereBatch.build(chart, spheres)
    ft = ft or _geometry(c, batch)
    return batch.integrate(boundary_term_form(ft, fol))


def adm_component_integrals(c: Cotetrad, spheres: Sequence[SphereSpec], fol: FoliationSpec | None = None, ft=None, batch=None) -> dict:
    """Component ADM formulas with ``h_ij = -g_ij`` on an asymptotically Cartesian chart.

    ``standard``: ``oint (d_i h_ik - d_k h_ii) *_m dx^k``.
    ``printed``: ``oint (d_i h_ik - d_k h_ik) *_m dx^k`` summed over i, the
    formula as it is usually misprinted; it vanishes for conformally flat ``h``.
    """
    batch = batch or SphereBatch.build("cartesian", spheres)
    ft = ft or _geometry(c, batch)
    fol = fol or FoliationSpec()
    N, n = lapse_and_normal(ft, fol)
    m = ft.m
    coords = ft.c.coords
    space = [mu for mu in range(4) if mu != fol.time_index]

    def dh(i, k, l):
        return S.mul(-1.0, S.partial(m.g[i][k], l, coords))

    std = KForm.zero(2, coords)
    printed = KForm.zero(2, coords)
    for k in space:
        sk = spatial_star(basis_form((k,), coords), n, N, m)
        a = S.total(S.sub(dh(i, k, i), dh(i, i, k)) for i in space)
        b = S.total(S.sub(dh(i, k, i), dh(i, k, k)) for i in space)
        if not S.is_zero(a):
            std = std + sk * a
        if not S.is_zero(b):
            printed = printed + sk * b
    return {"standard": batch.integrate(std), "printed": batch.integrate(printed)}


def textbook_adm_energy(c: Cotetrad, spheres: Sequence[SphereSpec], time_index: int = 0) -> np.ndarray:
    """``(1/16 pi) oint (d_j h_ij - d_i h_jj) x^i/r r^2 dOmega`` in Cartesian coordinates.

    Built from the coordinate metric only (flat normal and area element).
    """
    batch = SphereBatch.build("cartesian", spheres)
    sampled = c.sample(batch.points, 1)
    g = build_metric(sampled).g
    coords = c.coords
    space = [mu for mu in range(4) if mu != time_index]
    npts = batch.npoints
    integrand = np.zeros(npts)
    for i in space:
        acc = 0.0
        for j in space:
            acc = S.add(acc, S.sub(S.partial(g[i][j], j, coords), S.partial(g[j][j], i, coords)))
        vals = -np.broadcast_to(S.values(acc, npoints=npts), (npts,))
        integrand = integrand + vals * batch.d_r[:, i]
    out = []
    for spec, s in zip(batch.specs, batch.slices):
        TH, _, W = _quadrature(spec)
        out.append(math.fsum(integrand[s] * W * spec.radius**2) / (16.0 * math.pi))
    return np.array(out)


# -- series and extrapolation -------------------------------------------------------------------


@dataclass
class ExtrapolationResult:
    value: float
    coefficients: tuple
    residual: float
    condition: float
    radii: tuple = field(default_factory=tuple)
    samples: tuple = field(default_factory=tuple)

    def as_dict(self) -> dict:
        return {
            "extrapolated": float(self.value),
            "fit_residual": float(self.residual),
            "condition": float(self.condition),
            "series": [[float(r), float(v)] for r, v in zip(self.radii, self.samples)],
        }


def extrapolate_to_infinity(radii: Sequence[float], values: Sequence[float], max_condition: float = 1e12) -> ExtrapolationResult:
    """Least-squares fit ``E(r) = E_inf + c1/r + c2/r^2``."""
    r = np.asarray(radii, dtype=float)
    v = np.asarray(values, dtype=float)
    if r.size < 4:
        raise ValueError("extrapolation needs at least 4 radii")
    if np.any(np.diff(r) <= 0):
        raise ValueError("radii must be strictly increasing")
    A = np.column_stack([np.ones_like(r), 1.0 / r, 1.0 / r**2])
    # scale columns so the condition number reflects the model, not the units
    scale = np.max(np.abs(A), axis=0)
    As = A / scale
    cond = float(np.linalg.cond(As))
    if not np.isfinite(cond) or cond > max_condition:
        raise EnergyError(f"ill-conditioned extrapolation (condition number {cond:.3g})")
    coef, *_ = np.linalg.lstsq(As, v, rcond=None)
    coef = coef / scale
    res = float(np.linalg.norm(A @ coef - v))
    return ExtrapolationResult(float(coef[0]), tuple(float(x) for x in coef[1:]), res, cond, tuple(r), tuple(v))


def energy_series(c: Cotetrad, radii: Sequence[float], chart: str, n_theta: int = 32, n_phi: int = 64, time: float = 0.0, fol=None, adm: bool = False) -> dict:
    """Every surface integral on each radius, from one batched sample."""
    specs = [SphereSpec(r, n_theta, n_phi, time=time) for r in radii]
    batch = SphereBatch.build(chart, specs)
    ft = _geometry(c, batch)
    out = {
        "radii": np.asarray(radii, dtype=float),
        "P": quasi_local_energy(c, specs, chart, ft, batch),
        "E": quasi_local_E(c, specs, chart, ft, batch),
        "E_prime": boundary_term(c, specs, chart, fol, ft, batch),
    }
    if adm:
        out.update({f"adm_{k}": v for k, v in adm_component_integrals(c, specs, fol, ft, batch).items()})
    return out


def quadrature_convergence(c: Cotetrad, spec: SphereSpec, chart: str) -> float:
    """Largest change of ``P^a`` and ``E'`` when both orders are doubled, relative to ``max(|value|, 1)``."""
    vals = []
    for s in (spec, spec.doubled()):
        batch = SphereBatch.build(chart, [s])
        ft = _geometry(c, batch)
        vals.append(np.concatenate([quasi_local_energy(c, [s], chart, ft, batch)[0], boundary_term(c, [s], chart, None, ft, batch)]))
    a, b = vals
    scale = max(float(np.max(np.abs(b))), 1.0)
    return float(np.max(np.abs(a - b)) / scale)


def stokes_shell_check(c: Cotetrad, r1: float, r2: float, chart: str, index: int = 0, n_r: int = 8, n_theta: int = 16, n_phi: int = 32, time: float = 0.0):
    """Compare ``oint_{r2} *S^a - oint_{r1} *S^a`` with the shell integral of ``d*S^a``.

    Returns ``(surface_difference, volume_integral)``.
    """
    specs = [SphereSpec(r1, n_theta, n_phi, time=time), SphereSpec(r2, n_theta, n_phi, time=time)]
    surf = -quasi_local_energy(c, specs, chart)[:, index]
    x, w = np.polynomial.legendre.leggauss(n_r)
    radii = 0.5 * (r2 - r1) * x + 0.5 * (r2 + r1)
    spec = SphereSpec(r1, n_theta, n_phi, time=time)
    TH, PH, W = _quadrature(spec)
    pts, dr, dth, dph, wts = [], [], [], [], []
    for r, wr in zip(radii, w):
        p, a, b, cc = _embedding(chart, spec, r, TH, PH)
        pts.append(p)
        dr.append(a)
        dth.append(b)
        dph.append(cc)
        wts.append(W / np.sin(TH) * wr * 0.5 * (r2 - r1))
    pts = np.vstack(pts)
    sampled = c.sample(pts, 2)
    ft = FieldTheory(GeometrySet(sampled))
    dS = exterior_derivative(ft.star_S[index] * ETA[index])
    f = pullback(dS, [np.vstack(dr), np.vstack(dth), np.vstack(dph)], pts.shape[0])
    vol = math.fsum(f * np.concatenate(wts))
    return float(surf[1] - surf[0]), float(vol)
