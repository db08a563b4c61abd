import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from telegrav.expr import (
    ArityError,
    DomainError,
    ExpressionSyntaxError,
    UnknownIdentifierError,
    derivative,
    evaluate,
    evaluate_many,
    parse_expression,
    symbol,
)

from strategies import VARS, expressions

SCHW = ("t", "r", "theta", "phi")


def at(f, **env):
    return evaluate(f, env)


def central_difference(fn, x, order, steps=(0.08, 0.04, 0.02, 0.01)):
    """Central differences for derivatives 1..3, Richardson-extrapolated over the step sweep."""
    stencils = {
        1: lambda h: (fn(x + h) - fn(x - h)) / (2 * h),
        2: lambda h: (fn(x + h) - 2 * fn(x) + fn(x - h)) / h**2,
        3: lambda h: (fn(x + 2 * h) - 2 * fn(x + h) + 2 * fn(x - h) - fn(x - 2 * h)) / (2 * h**3),
    }
    table = [stencils[order](h) for h in steps]
    # errors are even in h, step ratio 2
    for k in range(1, len(table)):
        f = 4.0**k
        table = [(f * table[i + 1] - table[i]) / (f - 1) for i in range(len(table) - 1)]
    return table[0]


# -- parsing -----------------------------------------------------------------------------


def test_constant():
    f = parse_expression("1")
    assert f.is_const and f.value == 1.0


def test_schwarzschild_lapse_parses():
    f = parse_expression("sqrt(1-2*M/r)", SCHW, ["M"])
    assert f.symbols == {"M", "r"}


def test_power_is_right_associative():
    assert at(parse_expression("2^3^2")) == 512.0


def test_unary_minus_binds_looser_than_power():
    assert at(parse_expression("-x^2", ["x"]), x=3.0) == -9.0
    assert at(parse_expression("2^-1")) == 0.5


@pytest.mark.parametrize(
    "text, value",
    [("1 + 2*3", 7.0), ("(1 + 2)*3", 9.0), ("8/4/2", 1.0), ("2 - 3 - 4", -5.0), ("2*pi", 2 * math.pi), ("1e-3*1e3", 1.0)],
)
def test_arithmetic_precedence(text, value):
    assert at(parse_expression(text)) == pytest.approx(value, rel=1e-15)


@pytest.mark.parametrize(
    "text, position, kind",
    [
        ("2*", 2, ExpressionSyntaxError),
        ("(x + 1", 6, ExpressionSyntaxError),
        ("x + )", 4, ExpressionSyntaxError),
        ("x @ 2", 2, ExpressionSyntaxError),
        ("1 + w", 4, UnknownIdentifierError),
        ("foo(x)", 0, UnknownIdentifierError),
        ("sin(x, y)", 0, ArityError),
        ("x y", 2, ExpressionSyntaxError),
    ],
)
def test_syntax_errors_report_position(text, position, kind):
    with pytest.raises(kind) as info:
        parse_expression(text, ["x", "y"])
    assert info.value.position == position
    assert f"position {position}" in str(info.value)


@given(expressions)
@settings(max_examples=60, deadline=None)
def test_print_parse_round_trip(text):
    f = parse_expression(text, VARS)
    assert parse_expression(str(f), VARS) is f


# -- evaluation ----------------------------------------------------------------------------


def test_evaluate_examples():
    assert evaluate(parse_expression("sqrt(1-2*M/r)", SCHW, ["M"]), {"r": 4.0}, {"M": 1.0}) == pytest.approx(math.sqrt(0.5), rel=1e-15)
    assert at(parse_expression("sin(theta)", SCHW), theta=math.pi / 2) == pytest.approx(1.0, abs=1e-15)


def test_horizon_is_a_domain_error():
    f = parse_expression("1/(1-2*M/r)", SCHW, ["M"])
    with pytest.raises(DomainError):
        evaluate(f, {"r": 2.0}, {"M": 1.0})


@pytest.mark.parametrize("text, x", [("sqrt(x)", -1.0), ("log(x)", 0.0), ("x^0.5", -2.0), ("x^-1", 0.0)])
def test_domain_errors(text, x):
    with pytest.raises(DomainError):
        at(parse_expression(text, ["x"]), x=x)


def test_unbound_symbol():
    with pytest.raises(ArithmeticError):
        evaluate_many([symbol("q")], {"x": 1.0})


def test_vectorised_evaluation_matches_pointwise():
    f = parse_expression("x*sin(y) + exp(-x^2)", ["x", "y"])
    xs = np.linspace(-1, 1, 7)
    ys = np.linspace(0, 2, 7)
    vec = evaluate_many([f], {"x": xs, "y": ys})[0]
    assert np.allclose(vec, [at(f, x=a, y=b) for a, b in zip(xs, ys)], rtol=0, atol=1e-15)


# -- differentiation -----------------------------------------------------------------------


def test_product_rule_example():
    f = parse_expression("x^2*y", ["x", "y"])
    df = f.diff("x")
    for x, y in [(1.0, 2.0), (-0.5, 3.0), (2.0, -1.0)]:
        assert at(df, x=x, y=y) == pytest.approx(2 * x * y, rel=1e-15)


def test_chain_rule_example():
    f = parse_expression("sqrt(1-2*M/r)", SCHW, ["M"])
    df = f.diff("r")
    for r in (3.0, 4.0, 10.0):
        expected = (1.0 / r**2) * (1 - 2.0 / r) ** -0.5
        assert evaluate(df, {"r": r}, {"M": 1.0}) == pytest.approx(expected, rel=1e-14)


def test_third_derivative_against_finite_differences():
    f = parse_expression("t^(2/3)", ["t"])
    exact = at(derivative(f, ["t", "t", "t"]), t=1.0)
    fd = central_difference(lambda t: t ** (2.0 / 3.0), 1.0, 3)
    assert exact == pytest.approx(fd, rel=1e-8)


def test_derivative_of_constant_and_other_symbol():
    f = parse_expression("3*y", ["x", "y"])
    assert f.diff("x").is_zero
    assert parse_expression("2").diff("x").is_zero


@given(expressions, st.sampled_from(VARS), st.sampled_from(VARS))
@settings(max_examples=60, deadline=None)
def test_mixed_partials_commute(text, u, v):
    f = parse_expression(text, VARS)
    env = {"x": 0.9, "y": 1.1, "z": 0.7}
    a = evaluate(derivative(f, [u, v]), env)
    b = evaluate(derivative(f, [v, u]), env)
    assert abs(a - b) <= 1e-10 * max(1.0, abs(a))


@given(expressions, st.sampled_from(VARS), st.integers(1, 2))
@settings(max_examples=60, deadline=None)
def test_derivatives_match_finite_differences(text, var, order):
    f = parse_expression(text, VARS)
    env = {"x": 0.9, "y": 1.1, "z": 0.7}

    def along(s):
        return evaluate(f, {**env, var: s})

    exact = evaluate(derivative(f, [var] * order), env)
    fd = central_difference(along, env[var], order)
    scale = max(1.0, abs(exact), max(abs(along(env[var] + h)) for h in (-0.16, 0.0, 0.16)))
    assert abs(exact - fd) <= 1e-6 * scale
