"""Scalar fields on a coordinate chart.

A :class:`ScalarField` is an immutable, hash-consed expression DAG. Identical
subtrees are the same Python object, so derivative caches and evaluation
caches are shared across every expression that mentions them.

Evaluation is vectorised: :func:`evaluate_many` walks the DAG once and
computes every node on numpy arrays holding all sample points at once.
"""

from __future__ import annotations

import math
import re
import weakref
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "ScalarField",
    "ExpressionError",
    "ExpressionSyntaxError",
    "UnknownIdentifierError",
    "ArityError",
    "EvaluationError",
    "DomainError",
    "const",
    "symbol",
    "apply",
    "parse_expression",
    "differentiate",
    "evaluate",
    "evaluate_many",
    "FUNCTIONS",
]

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "tanh", "abs")
# not reachable from the grammar; produced by d|x|/dx
_INTERNAL_FUNCTIONS = ("sign",)


class ExpressionError(ValueError):
    pass


class ExpressionSyntaxError(ExpressionError):
    def __init__(self, message: str, position: int, text: str = ""):
        super().__init__(f"{message} at position {position}")
        self.position = position
        self.text = text


class UnknownIdentifierError(ExpressionSyntaxError):
    pass


class ArityError(ExpressionSyntaxError):
    pass


class EvaluationError(ArithmeticError):
    def __init__(self, message: str, subexpression: str | None = None):
        super().__init__(message if subexpression is None else f"{message}: {subexpression}")
        self.subexpression = subexpression


class DomainError(EvaluationError):
    pass


_INTERN: "weakref.WeakValueDictionary[tuple, ScalarField]" = weakref.WeakValueDictionary()


class ScalarField:
    """Node of an expression DAG. Build with the module constructors or operators."""

    __slots__ = ("op", "args", "value", "_hash", "_derivs", "_symbols", "__weakref__")

    op: str
    args: tuple
    value: object

    def __new__(cls, op: str, args: tuple = (), value=None):
        key = (op, tuple(id(a) for a in args), value)
        node = _INTERN.get(key)
        if node is not None:
            return node
        node = object.__new__(cls)
        node.op = op
        node.args = args
        node.value = value
        node._hash = hash(key)
        node._derivs = {}
        node._symbols = None
        _INTERN[key] = node
        return node

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:  # structural identity thanks to interning
        return self is other

    def __reduce__(self):
        return (ScalarField, (self.op, self.args, self.value))

    # -- predicates ---------------------------------------------------------
    @property
    def is_const(self) -> bool:
        return self.op == "const"

    def is_value(self, v: float) -> bool:
        return self.op == "const" and self.value == v

    @property
    def is_zero(self) -> bool:
        return self.is_value(0.0)

    @property
    def symbols(self) -> frozenset:
        if self._symbols is None:
            if self.op == "sym":
                self._symbols = frozenset((self.value,))
            else:
                acc = frozenset()
                for a in self.args:
                    acc |= a.symbols
                self._symbols = acc
        return self._symbols

    # -- operators ----------------------------------------------------------
    def __add__(self, other):
        return _add(self, _wrap(other))

    def __radd__(self, other):
        return _add(_wrap(other), self)

    def __sub__(self, other):
        return _sub(self, _wrap(other))

    def __rsub__(self, other):
        return _sub(_wrap(other), self)

    def __mul__(self, other):
        return _mul(self, _wrap(other))

    def __rmul__(self, other):
        return _mul(_wrap(other), self)

    def __truediv__(self, other):
        return _div(self, _wrap(other))

    def __rtruediv__(self, other):
        return _div(_wrap(other), self)

    def __pow__(self, other):
        return _pow(self, _wrap(other))

    def __rpow__(self, other):
        return _pow(_wrap(other), self)

    def __neg__(self):
        return _neg(self)

    def __pos__(self):
        return self

    def diff(self, var: str) -> "ScalarField":
        return differentiate(self, var)

    def __str__(self) -> str:
        return _pretty(self)

    def __repr__(self) -> str:
        return f"ScalarField({_pretty(self)!r})"


def _wrap(x) -> ScalarField:
    if isinstance(x, ScalarField):
        return x
    if isinstance(x, (int, float, np.floating, np.integer)):
        return const(float(x))
    return NotImplemented  # type: ignore[return-value]


def const(v: float) -> ScalarField:
    v = float(v)
    if v == 0.0:
        v = 0.0  # fold -0.0
    return ScalarField("const", (), v)


def symbol(name: str) -> ScalarField:
    return ScalarField("sym", (), name)


_ZERO = const(0.0)
_ONE = const(1.0)


def _is_int(v: float) -> bool:
    return float(v).is_integer()


# -- simplifying constructors -------------------------------------------------


def _add(a: ScalarField, b: ScalarField) -> ScalarField:
    if a.is_const and b.is_const:
        return const(a.value + b.value)
    if a.is_zero:
        return b
    if b.is_zero:
        return a
    if b.op == "neg":
        return _sub(a, b.args[0])
    return ScalarField("add", (a, b))


def _sub(a: ScalarField, b: ScalarField) -> ScalarField:
    if a.is_const and b.is_const:
        return const(a.value - b.value)
    if b.is_zero:
        return a
    if a.is_zero:
        return _neg(b)
    if a is b:
        return _ZERO
    if b.op == "neg":
        return _add(a, b.args[0])
    return ScalarField("sub", (a, b))


def _neg(a: ScalarField) -> ScalarField:
    if a.is_const:
        return const(-a.value)
    if a.op == "neg":
        return a.args[0]
    return ScalarField("neg", (a,))


def _split_power(x: ScalarField) -> tuple[ScalarField, float] | None:
    if x.op == "pow" and x.args[1].is_const:
        return x.args[0], x.args[1].value
    if x.op not in ("const",):
        return x, 1.0
    return None


def _mul(a: ScalarField, b: ScalarField) -> ScalarField:
    if a.is_const and b.is_const:
        return const(a.value * b.value)
    if a.is_zero or b.is_zero:
        return _ZERO
    if a.is_value(1.0):
        return b
    if b.is_value(1.0):
        return a
    if a.is_value(-1.0):
        return _neg(b)
    if b.is_value(-1.0):
        return _neg(a)
    if b.is_const:
        a, b = b, a
    if a.is_const and b.op == "mul" and b.args[0].is_const:
        return _mul(const(a.value * b.args[0].value), b.args[1])
    if a.op == "neg":
        return _neg(_mul(a.args[0], b))
    if b.op == "neg":
        return _neg(_mul(a, b.args[0]))
    # x * x^n merge
    pa, pb = _split_power(a), _split_power(b)
    if pa is not None and pb is not None and pa[0] is pb[0]:
        return _pow(pa[0], const(pa[1] + pb[1]))
    return ScalarField("mul", (a, b))


def _div(a: ScalarField, b: ScalarField) -> ScalarField:
    if b.is_value(1.0):
        return a
    if a.is_zero and not b.is_zero:
        return _ZERO
    if a.is_const and b.is_const and b.value != 0.0:
        return const(a.value / b.value)
    if b.is_const and b.value != 0.0:
        return _mul(const(1.0 / b.value), a)
    if a is b:
        return _ONE
    if a.op == "neg":
        return _neg(_div(a.args[0], b))
    return ScalarField("div", (a, b))


def _pow(a: ScalarField, b: ScalarField) -> ScalarField:
    if b.is_zero:
        return _ONE
    if b.is_value(1.0):
        return a
    if a.is_const and b.is_const:
        base, e = a.value, b.value
        if base > 0 or (_is_int(e) and (base != 0 or e > 0)):
            return const(base ** e)
    if a.op == "pow" and a.args[1].is_const and b.is_const and _is_int(a.args[1].value) and _is_int(b.value):
        return _pow(a.args[0], const(a.args[1].value * b.value))
    return ScalarField("pow", (a, b))


def apply(name: str, a) -> ScalarField:
    """Apply a named elementary function, folding constants when the value is defined."""
    a = _wrap(a)
    if name not in FUNCTIONS and name not in _INTERNAL_FUNCTIONS:
        raise ExpressionError(f"unknown function {name!r}")
    if a.is_const:
        v = a.value
        ok = not ((name == "sqrt" and v < 0) or (name == "log" and v <= 0))
        if ok:
            return const(_SCALAR_FUNCS[name](v))
    if name == "abs" and a.op == "neg":
        a = a.args[0]
    return ScalarField("fn", (a,), name)


_SCALAR_FUNCS = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
    "sinh": math.sinh,
    "cosh": math.cosh,
    "tanh": math.tanh,
    "abs": abs,
    "sign": lambda v: float(np.sign(v)),
}


# -- differentiation -----------------------------------------------------------


def differentiate(f: ScalarField, var: str) -> ScalarField:
    """Exact partial derivative of ``f`` with respect to the symbol ``var``.

    Results are memoised on each node, so repeated and mixed higher-order
    derivatives reuse shared subtrees.
    """
    if var not in f.symbols:
        return _ZERO
    stack = [f]
    while stack:
        node = stack[-1]
        if var in node._derivs:
            stack.pop()
            continue
        pending = [a for a in node.args if var not in a._derivs and var in a.symbols]
        if pending:
            stack.extend(pending)
            continue
        stack.pop()
        node._derivs[var] = _diff_node(node, var)
    return f._derivs[var]


def _d(node: ScalarField, var: str) -> ScalarField:
    if var not in node.symbols:
        return _ZERO
    return node._derivs[var]


def _diff_node(n: ScalarField, var: str) -> ScalarField:
    op = n.op
    if op == "const":
        return _ZERO
    if op == "sym":
        return _ONE if n.value == var else _ZERO
    if op == "add":
        return _d(n.args[0], var) + _d(n.args[1], var)
    if op == "sub":
        return _d(n.args[0], var) - _d(n.args[1], var)
    if op == "neg":
        return -_d(n.args[0], var)
    if op == "mul":
        a, b = n.args
        return _d(a, var) * b + a * _d(b, var)
    if op == "div":
        a, b = n.args
        return (_d(a, var) - n * _d(b, var)) / b
    if op == "pow":
        a, b = n.args
        if b.is_const:
            return b * _pow(a, const(b.value - 1.0)) * _d(a, var)
        return n * (_d(b, var) * apply("log", a) + b * _d(a, var) / a)
    if op == "fn":
        a = n.args[0]
        da = _d(a, var)
        name = n.value
        if name == "sin":
            return apply("cos", a) * da
        if name == "cos":
            return -(apply("sin", a) * da)
        if name == "tan":
            return da / apply("cos", a) ** 2
        if name == "exp":
            return n * da
        if name == "log":
            return da / a
        if name == "sqrt":
            return da / (2.0 * n)
        if name == "sinh":
            return apply("cosh", a) * da
        if name == "cosh":
            return apply("sinh", a) * da
        if name == "tanh":
            return (1.0 - n * n) * da
        if name == "abs":
            return apply("sign", a) * da
        if name == "sign":
            return _ZERO
    raise ExpressionError(f"cannot differentiate node {op}")


def derivative(f: ScalarField, multi: Sequence[str]) -> ScalarField:
    """Mixed derivative taken in a canonical (sorted) order so equal multi-indices share trees."""
    for var in sorted(multi):
        f = differentiate(f, var)
    return f


# -- evaluation ----------------------------------------------------------------


def _topo(roots: Iterable[ScalarField]) -> list[ScalarField]:
    order: list[ScalarField] = []
    seen: set[int] = set()
    for root in roots:
        if id(root) in seen:
            continue
        stack = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for a in node.args:
                if id(a) not in seen:
                    stack.append((a, False))
    return order


def _fail(node: ScalarField, msg: str):
    raise DomainError(msg, _pretty(node))


def evaluate_many(
    fields: Sequence[ScalarField],
    env: Mapping[str, object],
    check: bool = True,
) -> list[np.ndarray]:
    """Evaluate several fields on the same points, sharing common subexpressions.

    ``env`` maps every free symbol to a float or an array of point values.
    Domain violations raise :class:`DomainError` naming the offending
    subexpression; non-finite results are never returned silently.
    """
    order = _topo(fields)
    shape = np.broadcast_shapes(*(np.shape(v) for v in env.values())) if env else ()
    vals: dict[int, np.ndarray] = {}
    with np.errstate(all="ignore"):
        for n in order:
            op = n.op
            if op == "const":
                r = np.full(shape, n.value)
            elif op == "sym":
                try:
                    r = np.broadcast_to(np.asarray(env[n.value], dtype=float), shape)
                except KeyError:
                    raise EvaluationError(f"unbound symbol {n.value!r}") from None
            else:
                args = [vals[id(a)] for a in n.args]
                if op == "add":
                    r = args[0] + args[1]
                elif op == "sub":
                    r = args[0] - args[1]
                elif op == "mul":
                    r = args[0] * args[1]
                elif op == "neg":
                    r = -args[0]
                elif op == "div":
                    if check and np.any(args[1] == 0):
                        _fail(n, "division by zero")
                    r = args[0] / args[1]
                elif op == "pow":
                    base, e = args
                    ec = n.args[1]
                    if ec.is_const and _is_int(ec.value):
                        if check and ec.value < 0 and np.any(base == 0):
                            _fail(n, "zero to a negative power")
                        r = np.power(base, ec.value)
                    else:
                        if check and np.any(base <= 0):
                            _fail(n, "non-positive base with non-integer exponent")
                        r = np.power(base, e) if ec.is_const else np.exp(e * np.log(base))
                else:
                    name = n.value
                    a = args[0]
                    if check and name == "sqrt" and np.any(a < 0):
                        _fail(n, "square root of a negative number")
                    if check and name == "log" and np.any(a <= 0):
                        _fail(n, "logarithm of a non-positive number")
                    r = _NP_FUNCS[name](a)
                if check and not np.all(np.isfinite(r)):
                    _fail(n, "non-finite value")
            vals[id(n)] = r
    return [np.array(vals[id(f)], dtype=float) for f in fields]


_NP_FUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "abs": np.abs,
    "sign": np.sign,
}


def evaluate(f: ScalarField, point: Mapping[str, float], params: Mapping[str, float] | None = None) -> float:
    """Evaluate at a single point; ``point`` maps coordinate names to values."""
    env = dict(point)
    if params:
        env.update(params)
    return float(evaluate_many([f], env)[0])


# -- pretty printing -------------------------------------------------------------

_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}


def _fmt_num(v: float) -> str:
    if _is_int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _pretty(root: ScalarField) -> str:
    memo: dict[int, tuple[str, int]] = {}
    for n in _topo([root]):
        op = n.op
        if op == "const":
            s = _fmt_num(n.value)
            memo[id(n)] = (s, 5) if n.value >= 0 else (f"({s})", 5)
        elif op == "sym":
            memo[id(n)] = (n.value, 5)
        elif op == "fn":
            memo[id(n)] = (f"{n.value}({memo[id(n.args[0])][0]})", 5)
        elif op == "neg":
            s, p = memo[id(n.args[0])]
            memo[id(n)] = ("-" + (s if p > 3 else f"({s})"), 3)
        else:
            prec = _PREC[op]
            (ls, lp), (rs, rp) = memo[id(n.args[0])], memo[id(n.args[1])]
            sym = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}[op]
            if op == "pow":
                ls = ls if lp > prec else f"({ls})"
                rs = rs if rp >= prec else f"({rs})"
            else:
                ls = ls if lp >= prec else f"({ls})"
                rs = rs if rp > prec else f"({rs})"
            memo[id(n)] = (f"{ls} {sym} {rs}" if prec == 1 else f"{ls}{sym}{rs}", prec)
    return memo[id(root)][0]


# -- parsing -----------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^(),]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append((kind, m.group(kind), start))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, coords: Sequence[str], params: Sequence[str]):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.names = set(coords) | set(params)

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value: str):
        t = self.take()
        if t[1] != value:
            found = "end of input" if t[0] == "end" else repr(t[1])
            raise ExpressionSyntaxError(f"expected {value!r}, found {found}", t[2], self.text)

    def parse(self) -> ScalarField:
        node = self.expr()
        t = self.peek()
        if t[0] != "end":
            raise ExpressionSyntaxError(f"unexpected token {t[1]!r}", t[2], self.text)
        return node

    def expr(self) -> ScalarField:
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            node = ScalarField("add" if op == "+" else "sub", (node, rhs))
        return node

    def term(self) -> ScalarField:
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs = self.unary()
            node = ScalarField("mul" if op == "*" else "div", (node, rhs))
        return node

    def unary(self) -> ScalarField:
        if self.peek()[1] == "-":
            self.take()
            return ScalarField("neg", (self.unary(),))
        return self.power()

    def power(self) -> ScalarField:
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            # right-associative; the exponent may carry its own sign (2^-1)
            return ScalarField("pow", (base, self.unary()))
        return base

    def atom(self) -> ScalarField:
        kind, val, pos = self.take()
        if kind == "num":
            return const(float(val))
        if kind == "id":
            if self.peek()[1] == "(":
                self.take()
                args = [self.expr()]
                while self.peek()[1] == ",":
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                if val not in FUNCTIONS:
                    raise UnknownIdentifierError(f"unknown function {val!r}", pos, self.text)
                if len(args) != 1:
                    raise ArityError(f"{val} takes 1 argument, got {len(args)}", pos, self.text)
                return ScalarField("fn", (args[0],), val)
            if val in self.names:
                return symbol(val)
            if val == "pi":
                return const(math.pi)
            raise UnknownIdentifierError(f"unknown identifier {val!r}", pos, self.text)
        if val == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(val)
        raise ExpressionSyntaxError(f"unexpected {found}", pos, self.text)


def parse_expression(text: str, coords: Sequence[str] = (), params: Sequence[str] = ()) -> ScalarField:
    """Parse ``text`` into a ScalarField.

    Precedence from loosest to tightest: ``+ -``, ``* /``, unary ``-``, ``^``.
    ``^`` is right-associative, so ``2^3^2 == 512`` and ``-x^2 == -(x^2)``.
    The tree is kept as written (no simplification) so evaluation follows
    plain left-to-right arithmetic; :func:`simplify` folds it afterwards.
    """
    raw = _Parser(text, coords, params).parse()
    return simplify(raw)


def simplify(f: ScalarField) -> ScalarField:
    """Rebuild ``f`` through the simplifying constructors."""
    memo: dict[int, ScalarField] = {}
    for n in _topo([f]):
        op = n.op
        if op in ("const", "sym"):
            memo[id(n)] = n
            continue
        a = [memo[id(x)] for x in n.args]
        if op == "add":
            r = _add(*a)
        elif op == "sub":
            r = _sub(*a)
        elif op == "mul":
            r = _mul(*a)
        elif op == "div":
            r = _div(*a)
        elif op == "pow":
            r = _pow(*a)
        elif op == "neg":
            r = _neg(a[0])
        else:
            r = apply(n.value, a[0])
        memo[id(n)] = r
    return memo[id(f)]


def node_count(fields: Iterable[ScalarField]) -> int:
    return len(_topo(list(fields)))
