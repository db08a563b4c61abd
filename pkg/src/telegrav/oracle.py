"""Coordinate-tensor curvature, independent of the exterior-calculus code.

Christoffel symbols, Riemann, Ricci, scalar curvature and the Einstein tensor
are built as symbolic fields from a metric table using the textbook
coordinate formulas, then sampled. Only :mod:`telegrav.expr` is shared with
the forms pipeline, so the two cannot confirm a common bug.

Conventions are the usual ones: ``R^r_{smn} = d_m G^r_{ns} - d_n G^r_{ms} +
G^r_{ml} G^l_{ns} - G^r_{nl} G^l_{ms}``, ``R_{sn} = R^r_{srn}``,
``G_{mn} = R_{mn} - 1/2 g_{mn} R``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .expr import ScalarField, const, evaluate_many, parse_expression

__all__ = [
    "ChristoffelData",
    "CheckReport",
    "metric_from_tetrad",
    "christoffel_pipeline",
    "cross_check",
    "compare_arrays",
]

ETA = (1.0, -1.0, -1.0, -1.0)


class DegenerateMetricError(ValueError):
    pass


@dataclass
class CheckReport:
    """Outcome of one numerical check."""

    name: str
    n_points: int
    max_abs: float
    max_rel: float
    tol: float
    passed: bool
    metric: str = "rel"
    detail: str = ""

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "n_points": int(self.n_points),
            "max_abs": float(self.max_abs),
            "max_rel": float(self.max_rel),
            "tol": float(self.tol),
            "pass": bool(self.passed),
        }


def compare_arrays(name: str, got, ref, tol: float, metric: str = "rel", scale: float | None = None) -> CheckReport:
    """Compare two sampled arrays whose first axis runs over points.

    ``max_rel`` divides by ``max(scale, 1)`` with ``scale`` defaulting to the
    largest reference entry, so it is relative for large quantities and
    absolute for small ones (flat space compares rounding noise with rounding
    noise). ``metric`` says which of the two numbers is gated.
    """
    got = np.asarray(got, dtype=float)
    ref = np.asarray(ref, dtype=float)
    diff = np.abs(got - ref)
    max_abs = float(np.max(diff)) if diff.size else 0.0
    if scale is None:
        scale = float(np.max(np.abs(ref))) if ref.size else 0.0
    max_rel = max_abs / max(scale, 1.0) if max_abs else 0.0
    value = max_rel if metric == "rel" else max_abs
    n = got.shape[0] if got.ndim else 1
    return CheckReport(name, n, max_abs, max_rel, tol, bool(np.isfinite(value) and value < tol), metric)


def _as_field(x) -> ScalarField:
    return x if isinstance(x, ScalarField) else const(float(x))


def metric_from_tetrad(table: Sequence[Sequence], coords: Sequence[str], params: Sequence[str] = ()) -> list[list[ScalarField]]:
    """``g_mn = eta_ab e^a_m e^b_n`` as symbolic fields; strings are parsed."""
    e = [[parse_expression(x, coords, params) if isinstance(x, str) else _as_field(x) for x in row] for row in table]
    g = []
    for m in range(4):
        row = []
        for n in range(4):
            acc = const(0.0)
            for a in range(4):
                acc = acc + ETA[a] * e[a][m] * e[a][n]
            row.append(acc)
        g.append(row)
    return g


def _det(m):
    n = len(m)
    if n == 1:
        return m[0][0]
    acc = const(0.0)
    for j in range(n):
        if m[0][j].is_zero:
            continue
        minor = [r[:j] + r[j + 1 :] for r in m[1:]]
        term = m[0][j] * _det(minor)
        acc = acc + term if j % 2 == 0 else acc - term
    return acc


def _inverse(m):
    n = len(m)
    det = _det(m)
    inv = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [r[:j] + r[j + 1 :] for k, r in enumerate(m) if k != i]
            cof = _det(minor)
            inv[j][i] = (cof if (i + j) % 2 == 0 else -cof) / det
    return inv, det


class ChristoffelData:
    """Symbolic Levi-Civita data of a coordinate metric."""

    def __init__(self, g: Sequence[Sequence[ScalarField]], coords: Sequence[str], params: Mapping[str, float] | None = None):
        self.coords = tuple(coords)
        self.params = dict(params or {})
        self.g = [[_as_field(x) for x in r] for r in g]
        self.ginv, self.det = _inverse(self.g)

    @cached_property
    def dg(self):
        """``dg[l][m][n] = d_l g_mn``."""
        return [[[self.g[m][n].diff(x) for n in range(4)] for m in range(4)] for x in self.coords]

    @cached_property
    def gamma(self):
        """``gamma[l][m][n] = Gamma^l_{mn}``."""
        dg = self.dg
        out = [[[None] * 4 for _ in range(4)] for _ in range(4)]
        for l in range(4):
            for m in range(4):
                for n in range(m, 4):
                    acc = const(0.0)
                    for r in range(4):
                        if self.ginv[l][r].is_zero:
                            continue
                        acc = acc + self.ginv[l][r] * (dg[m][r][n] + dg[n][r][m] - dg[r][m][n])
                    out[l][m][n] = out[l][n][m] = 0.5 * acc
        return out

    @cached_property
    def riemann(self):
        """``riemann[r][s][m][n] = R^r_{smn}``."""
        G = self.gamma
        x = self.coords
        R = [[[[const(0.0)] * 4 for _ in range(4)] for _ in range(4)] for _ in range(4)]
        for r, s in itertools.product(range(4), repeat=2):
            for m in range(4):
                for n in range(m + 1, 4):
                    acc = G[r][n][s].diff(x[m]) - G[r][m][s].diff(x[n])
                    for l in range(4):
                        acc = acc + G[r][m][l] * G[l][n][s] - G[r][n][l] * G[l][m][s]
                    R[r][s][m][n] = acc
                    R[r][s][n][m] = -acc
        return R

    @cached_property
    def ricci(self):
        R = self.riemann
        out = [[None] * 4 for _ in range(4)]
        for s in range(4):
            for n in range(4):
                acc = const(0.0)
                for r in range(4):
                    acc = acc + R[r][s][r][n]
                out[s][n] = acc
        return out

    @cached_property
    def scalar(self) -> ScalarField:
        acc = const(0.0)
        for m in range(4):
            for n in range(4):
                if not self.ginv[m][n].is_zero:
                    acc = acc + self.ginv[m][n] * self.ricci[m][n]
        return acc

    @cached_property
    def einstein(self):
        return [[self.ricci[m][n] - 0.5 * self.g[m][n] * self.scalar for n in range(4)] for m in range(4)]

    @cached_property
    def bianchi(self):
        """``nabla_m G^m_n`` (needs third metric derivatives)."""
        Gmix = [[sum((self.ginv[m][a] * self.einstein[a][n] for a in range(4)), const(0.0)) for n in range(4)] for m in range(4)]
        gam = self.gamma
        out = []
        for n in range(4):
            acc = const(0.0)
            for m in range(4):
                acc = acc + Gmix[m][n].diff(self.coords[m])
                for l in range(4):
                    acc = acc + gam[m][m][l] * Gmix[l][n] - gam[l][m][n] * Gmix[m][l]
            out.append(acc)
        return out

    # -- sampling -----------------------------------------------------------------------
    def env(self, points: np.ndarray) -> dict:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        env = {c: points[:, i] for i, c in enumerate(self.coords)}
        env.update(self.params)
        return env

    def sample(self, nested, points: np.ndarray) -> np.ndarray:
        """Evaluate a nested list of fields; result has the points axis first."""
        arr = np.asarray(nested, dtype=object)
        flat = list(arr.ravel())
        vals = evaluate_many(flat, self.env(points))
        n = np.atleast_2d(points).shape[0]
        out = np.stack([np.broadcast_to(np.asarray(v, dtype=float), (n,)) for v in vals], axis=-1)
        return out.reshape((n,) + arr.shape)

    def check_nondegenerate(self, points: np.ndarray, tol: float = 1e-12) -> None:
        d = self.sample([self.det], points)
        if np.any(np.abs(d) <= tol):
            raise DegenerateMetricError("metric determinant vanishes at a sample point")


def christoffel_pipeline(
    table: Sequence[Sequence], coords: Sequence[str], params: Mapping[str, float] | None = None
) -> ChristoffelData:
    """Oracle data from a tetrad table ``e[a][mu]`` (expression strings or fields)."""
    params = dict(params or {})
    return ChristoffelData(metric_from_tetrad(table, coords, list(params)), coords, params)


def cross_check(
    frame_riemann: np.ndarray,
    frame: np.ndarray,
    inverse_frame: np.ndarray,
    cd: ChristoffelData,
    points: np.ndarray,
    tol: float = 1e-8,
) -> CheckReport:
    """Compare tetrad Riemann components against the coordinate oracle.

    ``frame_riemann[p, a, b, c, d] = R^a_{bcd}`` in the cobasis ``g^a``;
    ``frame[p, a, mu] = e^a_mu`` and ``inverse_frame[p, a, mu] = E_a^mu``.
    """
    coord = cd.sample(cd.riemann, points)  # (p, r, s, m, n)
    in_frame = np.einsum("par,prsmn,pbs,pcm,pdn->pabcd", frame, coord, inverse_frame, inverse_frame, inverse_frame)
    return compare_arrays("oracle_riemann", frame_riemann, in_frame, tol)
