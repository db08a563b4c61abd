"""Arithmetic shared by every component type a form may carry.

Form components are floats (structural constants), symbolic
:class:`~telegrav.expr.ScalarField` trees, or sampled :class:`~telegrav.jets.Jet`
values. A float ``0.0`` is a structural zero and is dropped from sums and
products, which keeps diagonal frames cheap.
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping, Sequence

import numpy as np

from .expr import ScalarField, apply, evaluate_many
from .jets import Jet

Scalar = "float | ScalarField | Jet"


def is_zero(x) -> bool:
    if isinstance(x, ScalarField):
        return x.is_zero
    if isinstance(x, Jet):
        return False
    return x == 0


def add(a, b):
    if is_zero(a):
        return b
    if is_zero(b):
        return a
    return a + b


def sub(a, b):
    if is_zero(b):
        return a
    if is_zero(a):
        return -b
    return a - b


def mul(a, b):
    if is_zero(a) or is_zero(b):
        return 0.0
    if isinstance(a, (int, float)) and a == 1:
        return b
    if isinstance(b, (int, float)) and b == 1:
        return a
    return a * b


def total(items: Iterable) -> object:
    acc = 0.0
    for x in items:
        acc = add(acc, x)
    return acc


def recip(x):
    if isinstance(x, Jet):
        return x.reciprocal()
    if isinstance(x, ScalarField):
        return 1.0 / x
    return 1.0 / x


def sqrt(x):
    if isinstance(x, Jet):
        return x.sqrt()
    if isinstance(x, ScalarField):
        return apply("sqrt", x)
    return math.sqrt(x)


def absval(x):
    if isinstance(x, Jet):
        return x.abs()
    if isinstance(x, ScalarField):
        return apply("abs", x)
    return abs(x)


def partial(x, mu: int, coords: Sequence[str]):
    if isinstance(x, Jet):
        return x.diff(mu)
    if isinstance(x, ScalarField):
        return x.diff(coords[mu])
    return 0.0


def det(m: Sequence[Sequence]) -> object:
    """Determinant by cofactor expansion along the first row (sizes <= 4)."""
    n = len(m)
    if n == 0:
        return 1.0
    if n == 1:
        return m[0][0]
    if n == 2:
        return sub(mul(m[0][0], m[1][1]), mul(m[0][1], m[1][0]))
    acc = 0.0
    for j in range(n):
        if is_zero(m[0][j]):
            continue
        minor = [row[:j] + row[j + 1 :] for row in m[1:]]
        term = mul(m[0][j], det(minor))
        acc = add(acc, term) if j % 2 == 0 else sub(acc, term)
    return acc


def inverse(m: Sequence[Sequence]) -> tuple[list[list], object]:
    """Adjugate inverse; returns ``(inverse, determinant)``."""
    n = len(m)
    d = det(m)
    inv_d = recip(d)
    out = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1 :] for k, row in enumerate(m) if k != i]
            c = det(minor)
            if (i + j) % 2:
                c = -c if not is_zero(c) else c
            out[j][i] = mul(c, inv_d)
    return out, d


def values(x, env: Mapping[str, object] | None = None, npoints: int | None = None) -> np.ndarray:
    """Numeric point values of a component of any kind."""
    if isinstance(x, Jet):
        return x.coef[0]
    if isinstance(x, ScalarField):
        if env is None:
            raise ValueError("symbolic component needs an evaluation environment")
        return evaluate_many([x], env)[0]
    if npoints is None:
        return np.asarray(float(x))
    return np.full(npoints, float(x))


def matrix_values(mat: Sequence[Sequence], env=None, npoints: int | None = None) -> np.ndarray:
    """Stack a nested list of components into an array of shape (points, n, m)."""
    vals = [[np.atleast_1d(values(x, env, npoints)) for x in r] for r in mat]
    shape = np.broadcast_shapes(*(v.shape for r in vals for v in r))
    return np.stack([np.stack([np.broadcast_to(v, shape) for v in r], -1) for r in vals], -2)
