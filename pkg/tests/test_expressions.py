import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from halanay_cert.expressions import (
    EvaluationError,
    ExprError,
    parse_expr,
)


def test_arithmetic_precedence():
    e = parse_expr("1+2*3")
    assert e(0.0) == 7.0
    assert parse_expr("(1+2)*3")(0.0) == 9.0
    assert parse_expr("2-3-4")(0.0) == -5.0
    assert parse_expr("12/3/2")(0.0) == 2.0


def test_variable_and_pi():
    e = parse_expr("2+sin(pi*t)^2")
    assert e(0.5) == pytest.approx(3.0)
    assert e(0.0) == pytest.approx(2.0)


def test_power_is_integer_only():
    assert parse_expr("t^3")(2.0) == 8.0
    with pytest.raises(ExprError):
        parse_expr("t^2.5")
    with pytest.raises(ExprError):
        parse_expr("t^-1")


def test_unary_functions():
    assert parse_expr("abs(sin(pi*t))^3")(0.5) == pytest.approx(1.0)
    assert parse_expr("floor(t)")(2.7) == 2.0
    assert parse_expr("tanh(t)")(0.3) == pytest.approx(math.tanh(0.3))
    assert parse_expr("arctan(t)")(1.0) == pytest.approx(math.pi / 4)
    assert parse_expr("exp(-t)")(1.0) == pytest.approx(math.exp(-1))


def test_binary_functions():
    assert parse_expr("min(t,1)")(2.0) == 1.0
    assert parse_expr("max(t,1)")(2.0) == 2.0
    with pytest.raises(ExprError):
        parse_expr("min(t)")
    with pytest.raises(ExprError):
        parse_expr("sin(t,1)")


def test_vectorized_evaluation():
    e = parse_expr("t-floor(t)")
    ts = np.array([0.0, 0.25, 1.5, 2.75])
    np.testing.assert_allclose(e(ts), [0.0, 0.25, 0.5, 0.75])


def test_error_offsets():
    with pytest.raises(ExprError) as exc:
        parse_expr("1+&2")
    assert exc.value.offset == 2
    with pytest.raises(ExprError) as exc:
        parse_expr("sin(t")
    assert "expected ')'" in str(exc.value)
    with pytest.raises(ExprError) as exc:
        parse_expr("bogus(t)")
    assert "unknown identifier" in str(exc.value)
    with pytest.raises(ExprError):
        parse_expr("")
    with pytest.raises(ExprError):
        parse_expr("1 2")


def test_division_by_zero_raises():
    with pytest.raises(EvaluationError):
        parse_expr("1/0")(0.0)
    with pytest.raises(EvaluationError):
        parse_expr("1/t")(np.array([1.0, 0.0]))


@st.composite
def expr_sources(draw, depth=0):
    if depth >= 3:
        leaf = draw(st.sampled_from(["t", "pi", "1", "2", "0.5", "3.25"]))
        return leaf
    kind = draw(st.integers(0, 5))
    if kind == 0:
        return draw(expr_sources(depth=3))
    if kind == 1:
        a = draw(expr_sources(depth=depth + 1))
        b = draw(expr_sources(depth=depth + 1))
        op = draw(st.sampled_from(["+", "-", "*"]))
        return f"({a}{op}{b})"
    if kind == 2:
        fn = draw(st.sampled_from(["sin", "cos", "abs", "tanh", "arctan", "floor"]))
        return f"{fn}({draw(expr_sources(depth=depth + 1))})"
    if kind == 3:
        return f"-({draw(expr_sources(depth=depth + 1))})"
    if kind == 4:
        p = draw(st.integers(0, 4))
        return f"({draw(expr_sources(depth=depth + 1))})^{p}"
    fn = draw(st.sampled_from(["min", "max"]))
    a = draw(expr_sources(depth=depth + 1))
    b = draw(expr_sources(depth=depth + 1))
    return f"{fn}({a},{b})"


@settings(max_examples=200, deadline=None)
@given(expr_sources())
def test_print_parse_round_trip(source):
    e = parse_expr(source)
    e2 = parse_expr(e.to_source())
    ts = np.linspace(-3.0, 3.0, 1000)
    v1 = np.asarray(e(ts)) + np.zeros(ts.shape)
    v2 = np.asarray(e2(ts)) + np.zeros(ts.shape)
    np.testing.assert_allclose(v1, v2, rtol=1e-12, atol=1e-12)


def test_ast_is_immutable_and_reprs():
    e = parse_expr("sin(t)+1")
    assert "sin(t)" in repr(e)
    with pytest.raises(Exception):
        e.op = "*"
