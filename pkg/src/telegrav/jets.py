"""Truncated multivariate Taylor jets sampled at many points.

A :class:`Jet` of order ``k`` stores, for every sample point, the Taylor
coefficients ``c_alpha = (d^alpha f)(p) / alpha!`` for all multi-indices with
``|alpha| <= k`` in the chart's coordinates. Ring operations and elementary
functions act on the truncated series exactly, and ``diff`` returns the jet
of the partial derivative with order ``k - 1``. No step sizes are involved, so
identities that hold for smooth fields hold for jets to rounding error.

Jets are seeded from exact symbolic derivatives of :class:`~telegrav.expr.ScalarField`
trees by :func:`jet_from_field`.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .expr import ScalarField, derivative, evaluate_many, _topo, _is_int

__all__ = ["Jet", "jet_from_field", "jets_from_fields", "jet_from_tree", "monomials"]


@lru_cache(maxsize=None)
def monomials(nvars: int, order: int) -> tuple[tuple[int, ...], ...]:
    """Exponent tuples with total degree <= order, sorted by degree."""
    out = []
    for deg in range(order + 1):
        for combo in itertools.combinations_with_replacement(range(nvars), deg):
            alpha = [0] * nvars
            for v in combo:
                alpha[v] += 1
            out.append(tuple(alpha))
    # combinations_with_replacement already yields a fixed order per degree
    return tuple(out)


class _Tables:
    def __init__(self, nvars: int, order: int):
        self.nvars = nvars
        self.order = order
        mons = monomials(nvars, order)
        self.mons = mons
        self.index = {m: i for i, m in enumerate(mons)}
        self.n = len(mons)
        ii, jj, kk = [], [], []
        for i, a in enumerate(mons):
            for j, b in enumerate(mons):
                c = tuple(x + y for x, y in zip(a, b))
                if sum(c) <= order:
                    ii.append(i)
                    jj.append(j)
                    kk.append(self.index[c])
        self.ii = np.array(ii)
        self.jj = np.array(jj)
        scatter = np.zeros((self.n, len(kk)))
        scatter[kk, np.arange(len(kk))] = 1.0
        self.scatter = scatter
        # derivative maps into the order-1 table
        self.dsrc: list[np.ndarray] = []
        self.dfac: list[np.ndarray] = []
        if order > 0:
            lower = monomials(nvars, order - 1)
            for v in range(nvars):
                src, fac = [], []
                for b in lower:
                    a = list(b)
                    a[v] += 1
                    src.append(self.index[tuple(a)])
                    fac.append(a[v])
                self.dsrc.append(np.array(src))
                self.dfac.append(np.array(fac, dtype=float)[:, None])


@lru_cache(maxsize=None)
def _tables(nvars: int, order: int) -> _Tables:
    return _Tables(nvars, order)


class Jet:
    """Taylor jet of a scalar field, vectorised over sample points.

    ``coef`` has shape ``(n_monomials, n_points)``.
    """

    __slots__ = ("coef", "order", "nvars")
    __array_ufunc__ = None

    def __init__(self, coef: np.ndarray, order: int, nvars: int = 4):
        self.coef = coef
        self.order = order
        self.nvars = nvars

    # -- helpers --------------------------------------------------------------
    @property
    def value(self) -> np.ndarray:
        return self.coef[0]

    @property
    def npoints(self) -> int:
        return self.coef.shape[1]

    @classmethod
    def constant(cls, value, order: int, npoints: int, nvars: int = 4) -> "Jet":
        t = _tables(nvars, order)
        coef = np.zeros((t.n, npoints))
        coef[0] = value
        return cls(coef, order, nvars)

    @classmethod
    def variable(cls, v: int, center, order: int, nvars: int = 4) -> "Jet":
        center = np.asarray(center, dtype=float)
        t = _tables(nvars, order)
        coef = np.zeros((t.n, center.shape[0]))
        coef[0] = center
        if order >= 1:
            e = [0] * nvars
            e[v] = 1
            coef[t.index[tuple(e)]] = 1.0
        return cls(coef, order, nvars)

    def truncate(self, order: int) -> "Jet":
        if order >= self.order:
            return self
        n = _tables(self.nvars, order).n
        return Jet(self.coef[:n], order, self.nvars)

    def _align(self, other: "Jet") -> tuple[np.ndarray, np.ndarray, int]:
        k = min(self.order, other.order)
        n = _tables(self.nvars, k).n
        return self.coef[:n], other.coef[:n], k

    def derivatives(self) -> dict[tuple[int, ...], np.ndarray]:
        """Partial derivatives at the points, keyed by exponent tuple."""
        t = _tables(self.nvars, self.order)
        return {m: self.coef[i] * math.prod(math.factorial(x) for x in m) for i, m in enumerate(t.mons)}

    # -- arithmetic -----------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, Jet):
            a, b, k = self._align(other)
            return Jet(a + b, k, self.nvars)
        if np.ndim(other) == 0 and other == 0:
            return self
        c = self.coef.copy()
        c[0] = c[0] + other
        return Jet(c, self.order, self.nvars)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.coef, self.order, self.nvars)

    def __sub__(self, other):
        if isinstance(other, Jet):
            a, b, k = self._align(other)
            return Jet(a - b, k, self.nvars)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            a, b, k = self._align(other)
            t = _tables(self.nvars, k)
            if k == 0:
                return Jet(a * b, 0, self.nvars)
            return Jet(t.scatter @ (a[t.ii] * b[t.jj]), k, self.nvars)
        return Jet(self.coef * other, self.order, self.nvars)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return Jet(self.coef / other, self.order, self.nvars)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, Jet):
            return (self.log() * p).exp()
        p = float(p)
        if _is_int(p) and p >= 0:
            return self._int_power(int(p))
        if _is_int(p):
            return self._int_power(int(-p)).reciprocal()
        return self.compose(_power_series(p))

    def _int_power(self, n: int) -> "Jet":
        result = None
        base = self
        while n:
            if n & 1:
                result = base if result is None else result * base
            n >>= 1
            if n:
                base = base * base
        if result is None:
            return Jet.constant(1.0, self.order, self.npoints, self.nvars)
        return result

    # -- calculus -----------------------------------------------------------------
    def diff(self, v: int) -> "Jet":
        if self.order == 0:
            raise ValueError("jet order exhausted; seed the fields with a higher order")
        t = _tables(self.nvars, self.order)
        return Jet(self.coef[t.dsrc[v]] * t.dfac[v], self.order - 1, self.nvars)

    def compose(self, series) -> "Jet":
        """Apply a univariate function given ``series(x0, k) -> [f(x0), f'(x0)/1!, ...]``."""
        x0 = self.coef[0]
        cs = series(x0, self.order)
        h = Jet(self.coef.copy(), self.order, self.nvars)
        h.coef[0] = 0.0
        out = np.zeros_like(self.coef)
        out[0] = cs[0]
        hp = None
        for n in range(1, self.order + 1):
            hp = h if hp is None else hp * h
            out += cs[n] * hp.coef
        return Jet(out, self.order, self.nvars)

    def reciprocal(self) -> "Jet":
        if np.any(self.coef[0] == 0):
            raise ZeroDivisionError("reciprocal of a jet with zero value")
        return self.compose(_power_series(-1.0))

    def sqrt(self) -> "Jet":
        if np.any(self.coef[0] < 0):
            raise ValueError("square root of a negative jet")
        return self.compose(_power_series(0.5))

    def abs(self) -> "Jet":
        s = np.sign(self.coef[0])
        if np.any(s == 0):
            raise ValueError("abs of a jet through zero is not smooth")
        return Jet(self.coef * s, self.order, self.nvars)

    def exp(self):
        return self.compose(lambda x, k: [np.exp(x) / math.factorial(n) for n in range(k + 1)])

    def log(self):
        if np.any(self.coef[0] <= 0):
            raise ValueError("log of a non-positive jet")

        def series(x, k):
            return [np.log(x)] + [(-1.0) ** (n + 1) / (n * x**n) for n in range(1, k + 1)]

        return self.compose(series)

    def sin(self):
        return self.compose(lambda x, k: _trig(x, k, np.sin(x), np.cos(x), -1.0))

    def cos(self):
        return self.compose(lambda x, k: _trig(x, k, np.cos(x), -np.sin(x), -1.0))

    def sinh(self):
        return self.compose(lambda x, k: _trig(x, k, np.sinh(x), np.cosh(x), 1.0))

    def cosh(self):
        return self.compose(lambda x, k: _trig(x, k, np.cosh(x), np.sinh(x), 1.0))

    def tan(self):
        return self.sin() / self.cos()

    def tanh(self):
        return self.sinh() / self.cosh()

    def sign(self):
        return Jet.constant(np.sign(self.coef[0]), self.order, self.npoints, self.nvars)

    def __repr__(self) -> str:
        return f"Jet(order={self.order}, npoints={self.npoints}, value={self.value!r})"


def _trig(x, k, f0, f1, s):
    # f'' = s f, so derivatives cycle through (f0, f1, s f0, s f1, ...)
    out = []
    d = [f0, f1]
    for n in range(k + 1):
        val = d[n % 2] * (s ** (n // 2))
        out.append(val / math.factorial(n))
    return out


def _power_series(p: float):
    def series(x, k):
        out = []
        c = 1.0
        for n in range(k + 1):
            out.append(c * np.power(x, p - n) / math.factorial(n))
            c *= p - n
        return out

    return series


# -- seeding ------------------------------------------------------------------------


def jets_from_fields(
    fields: Sequence[ScalarField],
    coords: Sequence[str],
    points: np.ndarray,
    params: Mapping[str, float],
    order: int,
) -> list[Jet]:
    """Seed jets from exact symbolic derivatives of each field.

    ``points`` has shape ``(n_points, len(coords))``. All derivative trees are
    evaluated in one shared pass.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    nvars = len(coords)
    mons = monomials(nvars, order)
    trees = []
    for f in fields:
        for m in mons:
            multi = [coords[v] for v, c in enumerate(m) for _ in range(c)]
            trees.append(derivative(f, multi))
    env = {c: points[:, i] for i, c in enumerate(coords)}
    env.update(params)
    vals = evaluate_many(trees, env)
    inv_fact = np.array([1.0 / math.prod(math.factorial(x) for x in m) for m in mons])[:, None]
    out = []
    n = len(mons)
    for i in range(len(fields)):
        coef = np.array(vals[i * n : (i + 1) * n]) * inv_fact
        out.append(Jet(coef, order, nvars))
    return out


def jet_from_field(f, coords, points, params, order) -> Jet:
    return jets_from_fields([f], coords, points, params, order)[0]


def jet_from_tree(
    f: ScalarField,
    coords: Sequence[str],
    points: np.ndarray,
    params: Mapping[str, float],
    order: int,
) -> Jet:
    """Evaluate ``f`` directly in jet arithmetic (no symbolic derivatives).

    Independent of :func:`jet_from_field`; the two are cross-checked in tests.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    npts = points.shape[0]
    nvars = len(coords)
    vals: dict[int, object] = {}
    for n in _topo([f]):
        op = n.op
        if op == "const":
            r = Jet.constant(n.value, order, npts, nvars)
        elif op == "sym":
            if n.value in coords:
                r = Jet.variable(coords.index(n.value), points[:, coords.index(n.value)], order, nvars)
            else:
                r = Jet.constant(params[n.value], order, npts, nvars)
        else:
            a = [vals[id(x)] for x in n.args]
            if op == "add":
                r = a[0] + a[1]
            elif op == "sub":
                r = a[0] - a[1]
            elif op == "mul":
                r = a[0] * a[1]
            elif op == "div":
                r = a[0] / a[1]
            elif op == "neg":
                r = -a[0]
            elif op == "pow":
                e = n.args[1]
                r = a[0] ** (e.value if e.is_const else a[1])
            else:
                r = getattr(a[0], n.value)()
        vals[id(n)] = r
    return vals[id(f)]
