import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rftflow.expr import (
    BinOp,
    Call,
    ExprDomainError,
    ExprSyntaxError,
    K,
    Neg,
    Num,
    evaluate,
    evaluate_array,
    log_evaluate_array,
    parse_expr,
    to_source,
)


def test_height_of_example_family_at_two():
    assert evaluate(parse_expr("2*ln(1.25*k)"), 2) == pytest.approx(2 * math.log(2.5))
    assert evaluate(parse_expr("2*ln(1.25*k)"), 2) == pytest.approx(1.8326, abs=1e-4)


@pytest.mark.parametrize("k, expected", [(4, 1), (5, 1), (10, 10), (11, 16)])
def test_floor_multiplicity(k, expected):
    assert evaluate(parse_expr("floor(2^k/k^2)"), k) == expected


def test_identity():
    assert evaluate(parse_expr("k"), 7) == 7


def test_precedence_and_right_associative_power():
    assert evaluate(parse_expr("2^3^2")) == 512
    assert evaluate(parse_expr("-2^2")) == -4
    assert evaluate(parse_expr("1 + 2 * 3 - 4 / 2")) == 5
    assert evaluate(parse_expr("2^-1")) == 0.5
    assert evaluate(parse_expr("abs(-3) + exp(0) + floor(2.7)")) == 6


def test_ast_shape():
    e = parse_expr("2*ln(1.25*k)")
    assert e == BinOp("*", Num(2.0), Call("ln", BinOp("*", Num(1.25), K)))


@pytest.mark.parametrize("text", ["2*", "ln(k", "foo(k)", "k k", "3 + x", "1..2"])
def test_syntax_errors(text):
    with pytest.raises(ExprSyntaxError):
        parse_expr(text)


def test_unknown_identifier_has_position():
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("k + j")
    assert info.value.col == 5


@pytest.mark.parametrize("text, k", [("ln(k - 3)", 3), ("1/(k - 2)", 2), ("ln(0 - k)", 1)])
def test_domain_errors_report_k(text, k):
    with pytest.raises(ExprDomainError) as info:
        evaluate(parse_expr(text), k)
    assert info.value.k == k


def test_array_evaluation_matches_scalar():
    e = parse_expr("floor(2^k/k^2) + 3*ln(k)^2 - exp(1/k)")
    ks = np.arange(2, 60, dtype=float)
    np.testing.assert_allclose(evaluate_array(e, ks), [evaluate(e, k) for k in ks], rtol=1e-14)


def test_array_domain_error_reports_first_bad_k():
    with pytest.raises(ExprDomainError) as info:
        evaluate_array(parse_expr("ln(k - 5)"), np.arange(2, 10, dtype=float))
    assert info.value.k == 2


def test_log_evaluation_beyond_double_range():
    e = parse_expr("floor(2^k/k^2)")
    ks = np.array([10.0, 100.0, 5000.0, 10.0 ** 6])
    logs = log_evaluate_array(e, ks)
    assert np.all(np.isfinite(logs))
    np.testing.assert_allclose(logs[:2], np.log([evaluate(e, 10), evaluate(e, 100)]), rtol=1e-12)
    np.testing.assert_allclose(logs[2:], ks[2:] * math.log(2) - 2 * np.log(ks[2:]), rtol=1e-12)


_leaf = st.one_of(
    st.just(K),
    st.integers(0, 20).map(lambda v: Num(float(v))),
    st.sampled_from([0.5, 1.25, 2.75]).map(Num),
)


def _extend(children):
    return st.one_of(
        children.map(Neg),
        st.tuples(st.sampled_from(["ln", "exp", "abs", "floor"]), children).map(lambda t: Call(*t)),
        st.tuples(st.sampled_from(["+", "-", "*", "/", "^"]), children, children).map(
            lambda t: BinOp(*t)
        ),
    )


@settings(max_examples=300, deadline=None)
@given(st.recursive(_leaf, _extend, max_leaves=8))
def test_printer_round_trip(e):
    assert parse_expr(to_source(e)) == e


@settings(max_examples=200, deadline=None)
@given(st.recursive(_leaf, _extend, max_leaves=6), st.integers(1, 30))
def test_evaluation_never_silently_nan(e, k):
    try:
        v = evaluate(e, k)
    except ExprDomainError:
        return
    assert not math.isnan(v)
