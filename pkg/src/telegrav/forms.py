"""Exterior algebra on a four-dimensional chart with a Lorentzian metric.

Forms store components on strictly increasing coordinate multi-indices.
Conventions used throughout the package:

* scalar product of k-forms: ``alpha . beta = sum_I alpha_I beta^I`` over sorted ``I``;
* volume form ``tau_g = orientation * sqrt|det g| dx^0 ^ ... ^ dx^3``;
* Hodge star fixed by ``alpha ^ *beta = (alpha . beta) tau_g``, which gives
  ``**alpha = -(-1)^(k(4-k)) alpha`` in signature (+,-,-,-);
* left contraction of a 1-form ``a`` into ``beta`` contracts ``a^sharp`` with the
  first slot of ``beta``; higher grades iterate, ``(a^b) _| C = b _| (a _| C)``;
* codifferential ``delta = (-1)^k *^-1 d *`` on k-forms (``CODIFF_SIGNS``), so that
  ``-(d delta + delta d)`` is the coordinate wave operator on Minkowski space.
"""

from __future__ import annotations

from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from . import scalars as S

__all__ = [
    "KForm",
    "MetricData",
    "CODIFF_SIGNS",
    "basis_form",
    "scalar_form",
    "one_form",
    "wedge",
    "exterior_derivative",
    "left_contract",
    "hodge_star",
    "inverse_hodge_star",
    "codifferential",
    "hodge_dalembertian",
    "scalar_product",
    "sort_sign",
]

# delta = CODIFF_SIGNS[k] * star^-1 d star on a k-form
CODIFF_SIGNS = {1: -1, 2: 1, 3: -1, 4: 1}


def sort_sign(idx: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sign of the permutation sorting ``idx`` (0 if an index repeats) and the sorted tuple."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return 0, ()
    sign = 1
    for i in range(len(idx)):
        for j in range(i + 1, len(idx)):
            if idx[i] > idx[j]:
                sign = -sign
    return sign, tuple(sorted(idx))


class KForm:
    """Differential form of fixed grade; missing components are zero."""

    __slots__ = ("grade", "comps", "coords")

    def __init__(self, grade: int, comps: Mapping[tuple, object], coords: Sequence[str]):
        self.grade = grade
        self.coords = tuple(coords)
        self.comps = {k: v for k, v in comps.items() if not S.is_zero(v)}
        for k in self.comps:
            if len(k) != grade or list(k) != sorted(set(k)):
                raise ValueError(f"component index {k} is not a sorted {grade}-index")

    @property
    def dim(self) -> int:
        return len(self.coords)

    @classmethod
    def zero(cls, grade: int, coords: Sequence[str]) -> "KForm":
        return cls(grade, {}, coords)

    def __getitem__(self, idx) -> object:
        sign, key = sort_sign(idx)
        if sign == 0:
            return 0.0
        v = self.comps.get(key, 0.0)
        return v if sign > 0 else (-v if not S.is_zero(v) else v)

    def _check(self, other: "KForm"):
        if not isinstance(other, KForm) or other.grade != self.grade:
            raise TypeError("forms must have the same grade")

    def __add__(self, other: "KForm") -> "KForm":
        self._check(other)
        out = dict(self.comps)
        for k, v in other.comps.items():
            out[k] = S.add(out.get(k, 0.0), v)
        return KForm(self.grade, out, self.coords)

    def __sub__(self, other: "KForm") -> "KForm":
        self._check(other)
        out = dict(self.comps)
        for k, v in other.comps.items():
            out[k] = S.sub(out.get(k, 0.0), v)
        return KForm(self.grade, out, self.coords)

    def __neg__(self) -> "KForm":
        return KForm(self.grade, {k: -v for k, v in self.comps.items()}, self.coords)

    def __mul__(self, f) -> "KForm":
        if isinstance(f, KForm):
            raise TypeError("use wedge() for the exterior product")
        return KForm(self.grade, {k: S.mul(f, v) for k, v in self.comps.items()}, self.coords)

    __rmul__ = __mul__

    def __xor__(self, other: "KForm") -> "KForm":
        return wedge(self, other)

    def is_structurally_zero(self) -> bool:
        return not self.comps

    def values(self, env=None, npoints=None) -> dict[tuple, np.ndarray]:
        """Component values at the sample points (all sorted indices present)."""
        out = {}
        for key in combinations(range(self.dim), self.grade):
            out[key] = S.values(self.comps.get(key, 0.0), env, npoints)
        return out

    def max_abs(self, env=None, npoints=None) -> float:
        vals = [np.max(np.abs(v)) for v in self.values(env, npoints).values()]
        return float(max(vals)) if vals else 0.0

    def __repr__(self) -> str:
        names = {k: "^".join("d" + self.coords[i] for i in k) or "1" for k in self.comps}
        body = ", ".join(f"{names[k]}: {v!s}" for k, v in self.comps.items())
        return f"KForm({self.grade}, {{{body}}})"


def basis_form(idx: Sequence[int], coords: Sequence[str]) -> KForm:
    sign, key = sort_sign(idx)
    return KForm(len(idx), {key: float(sign)} if sign else {}, coords)


def scalar_form(f, coords: Sequence[str]) -> KForm:
    return KForm(0, {(): f}, coords)


def one_form(components: Sequence, coords: Sequence[str]) -> KForm:
    return KForm(1, {(mu,): c for mu, c in enumerate(components)}, coords)


def wedge(a: KForm, b: KForm) -> KForm:
    """Exterior product; grades summing past the dimension give the zero form."""
    grade = a.grade + b.grade
    if grade > a.dim:
        return KForm.zero(min(grade, a.dim), a.coords)
    out: dict[tuple, object] = {}
    for I, x in a.comps.items():
        for J, y in b.comps.items():
            sign, key = sort_sign(I + J)
            if sign == 0:
                continue
            term = S.mul(x, y)
            out[key] = S.add(out.get(key, 0.0), term) if sign > 0 else S.sub(out.get(key, 0.0), term)
    return KForm(grade, out, a.coords)


def exterior_derivative(a: KForm) -> KForm:
    if a.grade >= a.dim:
        return KForm.zero(a.dim, a.coords)
    out: dict[tuple, object] = {}
    for I, x in a.comps.items():
        for mu in range(a.dim):
            if mu in I:
                continue
            dx = S.partial(x, mu, a.coords)
            if S.is_zero(dx):
                continue
            sign, key = sort_sign((mu,) + I)
            out[key] = S.add(out.get(key, 0.0), dx) if sign > 0 else S.sub(out.get(key, 0.0), dx)
    return KForm(a.grade + 1, out, a.coords)


d = exterior_derivative


class MetricData:
    """Metric components, inverse, volume density and the derived star maps.

    ``g`` and ``ginv`` are 4x4 nested lists of components (float, ScalarField
    or Jet). Build from a matrix with :meth:`from_matrix` or from a cotetrad
    via :func:`telegrav.tetrad.build_metric`.
    """

    def __init__(self, g, ginv, sqrt_abs_det, coords: Sequence[str], orientation: int = 1):
        self.g = [list(r) for r in g]
        self.ginv = [list(r) for r in ginv]
        self.sqrt_abs_det = sqrt_abs_det
        self.coords = tuple(coords)
        self.orientation = orientation
        self._compound: dict[int, dict] = {}
        self._star: dict[int, dict] = {}

    @classmethod
    def from_matrix(cls, g, coords: Sequence[str], orientation: int = 1) -> "MetricData":
        ginv, detg = S.inverse(g)
        return cls(g, ginv, S.sqrt(S.absval(detg)), coords, orientation)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def compound(self, k: int) -> dict:
        """k-th compound of the inverse metric: minors ``C[I][K] = det(ginv[I, K])``."""
        if k not in self._compound:
            idxs = list(combinations(range(self.dim), k))
            self._compound[k] = {
                I: {K: S.det([[self.ginv[i][j] for j in K] for i in I]) for K in idxs} for I in idxs
            }
        return self._compound[k]

    def raise_form(self, a: KForm) -> dict[tuple, object]:
        """Contravariant components ``a^I`` on sorted indices."""
        C = self.compound(a.grade)
        return {I: S.total(S.mul(row[K], x) for K, x in a.comps.items()) for I, row in C.items()}

    def star_matrix(self, k: int) -> dict:
        if k not in self._star:
            n = self.dim
            C = self.compound(k)
            vol = S.mul(float(self.orientation), self.sqrt_abs_det)
            table = {}
            for J in combinations(range(n), n - k):
                I = tuple(i for i in range(n) if i not in J)
                eps, _ = sort_sign(I + J)
                table[J] = {K: S.mul(float(eps), S.mul(vol, c)) for K, c in C[I].items() if not S.is_zero(c)}
            self._star[k] = table
        return self._star[k]

    def sample(self, env: Mapping[str, object]) -> np.ndarray:
        """Numeric ``g`` of shape (..., 4, 4) at the points described by ``env``."""
        rows = [[S.values(x, env) for x in r] for r in self.g]
        shape = np.broadcast_shapes(*(np.shape(x) for r in rows for x in r))
        return np.stack([np.stack([np.broadcast_to(x, shape) for x in r], -1) for r in rows], -2)


def scalar_product(a: KForm, b: KForm, m: MetricData):
    if a.grade != b.grade:
        raise ValueError("scalar product needs forms of equal grade")
    up = m.raise_form(b)
    return S.total(S.mul(x, up[I]) for I, x in a.comps.items())


def hodge_star(a: KForm, m: MetricData) -> KForm:
    table = m.star_matrix(a.grade)
    out = {}
    for J, row in table.items():
        out[J] = S.total(S.mul(row[K], x) for K, x in a.comps.items() if K in row)
    return KForm(m.dim - a.grade, out, a.coords)


def star_star_sign(k: int, n: int = 4) -> int:
    """``**`` on k-forms for a metric with one positive and n-1 negative directions."""
    sgn_det = -1 if (n - 1) % 2 else 1
    return sgn_det * (-1) ** (k * (n - k))


def inverse_hodge_star(b: KForm, m: MetricData) -> KForm:
    k = m.dim - b.grade
    return hodge_star(b, m) * float(star_star_sign(k, m.dim))


def _contract_vector(vec: Sequence, b: KForm) -> KForm:
    """Insert a vector (contravariant components) into the first slot of ``b``."""
    if b.grade == 0:
        return KForm.zero(0, b.coords)
    out: dict[tuple, object] = {}
    for I, x in b.comps.items():
        for pos, mu in enumerate(I):
            if S.is_zero(vec[mu]):
                continue
            term = S.mul(vec[mu], x)
            key = I[:pos] + I[pos + 1 :]
            out[key] = S.add(out.get(key, 0.0), term) if pos % 2 == 0 else S.sub(out.get(key, 0.0), term)
    return KForm(b.grade - 1, out, b.coords)


def left_contract(a: KForm, b: KForm, m: MetricData) -> KForm:
    """Left contraction ``a _| b`` of a j-form into a k-form (j <= k)."""
    if a.grade > b.grade:
        raise ValueError(f"cannot contract a {a.grade}-form into a {b.grade}-form")
    if a.grade == 0:
        return b * a.comps.get((), 0.0)
    if a.grade == 1:
        up = [S.total(S.mul(m.ginv[mu][nu], a.comps.get((nu,), 0.0)) for nu in range(m.dim)) for mu in range(m.dim)]
        return _contract_vector(up, b)
    result = KForm.zero(b.grade - a.grade, b.coords)
    for I, x in a.comps.items():
        part = b
        for mu in I:
            part = left_contract(basis_form((mu,), b.coords), part, m)
        result = result + part * x
    return result


def codifferential(a: KForm, m: MetricData) -> KForm:
    if a.grade == 0:
        raise ValueError("the codifferential of a 0-form is not defined")
    return inverse_hodge_star(exterior_derivative(hodge_star(a, m)), m) * float(CODIFF_SIGNS[a.grade])


def hodge_dalembertian(a: KForm, m: MetricData) -> KForm:
    """``-(d delta + delta d)`` applied to ``a``."""
    out = KForm.zero(a.grade, a.coords)
    if a.grade > 0:
        out = out - exterior_derivative(codifferential(a, m))
    if a.grade < a.dim:
        out = out - codifferential(exterior_derivative(a), m)
    return out
