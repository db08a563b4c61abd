"""Hypothesis strategies for expression strings that are smooth near (1, 1, 1)."""

from hypothesis import strategies as st

VARS = ("x", "y", "z")

_leaf = st.one_of(
    st.sampled_from(VARS),
    st.integers(1, 5).map(str),
    st.floats(0.25, 3.0, allow_nan=False).map(lambda v: f"{v:.3f}"),
)


def _extend(child):
    unary = st.tuples(st.sampled_from(["sin", "cos", "exp", "tanh"]), child).map(lambda t: f"{t[0]}({t[1]})")
    smooth = child.map(lambda a: f"sqrt(1 + ({a})^2)")
    logs = child.map(lambda a: f"log(2 + sin({a}))")
    binary = st.tuples(child, st.sampled_from(["+", "-", "*"]), child).map(lambda t: f"({t[0]}) {t[1]} ({t[2]})")
    quotient = st.tuples(child, child).map(lambda t: f"({t[0]})/(2 + cos({t[1]}))")
    power = st.tuples(child, st.integers(0, 3)).map(lambda t: f"({t[0]})^{t[1]}")
    return st.one_of(unary, smooth, logs, binary, quotient, power)


expressions = st.recursive(_leaf, _extend, max_leaves=6)
