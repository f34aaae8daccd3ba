"""Expression core: parsing, canonical forms, differentiation and the zero test."""

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import NAMES, TABLE, expressions, polynomials, random_expression
from jetcurv.oracle import fd_audit
from jetcurv.symcore import (
    ONE, ZERO, DomainError, ParseError, SymbolTable, UnknownIdentifierError, cos, current_tolerance, diff,
    evaluate, exp, is_zero, numeric_tolerance, parse, simplify, sin, subs, to_string,
)
from jetcurv.symcore.zero import sample_point

P = lambda s: parse(s, TABLE)
FAST = settings(max_examples=40, deadline=None)


# -- parsing and printing ------------------------------------------------------


@pytest.mark.parametrize("text, expected", [
    ("a*b + b*a", "2*a*b"),
    ("(a + 1)^2 - a^2 - 2*a - 1", "0"),
    ("a/a", "1"),
    ("2^-1", "1/2"),
    ("sqrt(a)^2", "a"),
    ("-(-a)", "a"),
])
def test_canonical_forms(text, expected):
    assert to_string(P(text)) == expected


def test_unknown_identifier_is_reported_with_position():
    with pytest.raises(UnknownIdentifierError, match="'z' at position 0"):
        P("z + a")


@pytest.mark.parametrize("text", ["a +", "(a", "a^(1/2)", "1/(a - a)", "a $ b", ""])
def test_malformed_input_raises_parse_error(text):
    with pytest.raises(ParseError):
        P(text)


def test_symbol_table_rejects_duplicates():
    with pytest.raises(ValueError):
        SymbolTable(["a", "a"], ["base", "base"])


def test_printer_round_trip_on_fixed_expression():
    e = P("sin(a*b)/(1 + c^2) - 3/2*a^2")
    assert is_zero(parse(to_string(e), TABLE) - e).method == "symbolic"


@FAST
@given(expressions())
def test_printer_round_trip(e):
    assert is_zero(parse(to_string(e), TABLE) - e)


# -- evaluation ----------------------------------------------------------------


def test_evaluate_polynomial():
    assert evaluate(P("a^2 + b"), {"a": 2.0, "b": 1.0, "c": 0.0}) == 5.0


def test_evaluate_outside_domain():
    with pytest.raises(DomainError):
        evaluate(P("ln(a)"), {"a": -1.0, "b": 0.0, "c": 0.0})


def test_substitution():
    e = subs(P("a*b + c"), {"a": P("b"), "c": ONE})
    assert to_string(e) == "1 + b^2"


# -- differentiation -----------------------------------------------------------


@pytest.mark.parametrize("text, var, expected", [
    ("sin(a*b)", "a", "b*cos(a*b)"),
    ("a^3", "a", "3*a^2"),
    ("exp(2*a)", "a", "2*exp(2*a)"),
    ("ln(a)", "a", "1/a"),
    ("b", "a", "0"),
])
def test_derivatives(text, var, expected):
    assert is_zero(diff(P(text), var) - P(expected)).method == "symbolic"


@FAST
@given(expressions(), expressions(), st.sampled_from(NAMES))
def test_product_rule(f, g, s):
    assert is_zero(diff(f * g, s) - (diff(f, s) * g + f * diff(g, s)))


@FAST
@given(expressions(depth=2), st.sampled_from(NAMES))
def test_chain_rule_through_sine(f, s):
    assert is_zero(diff(sin(f), s) - cos(f) * diff(f, s))


@FAST
@given(expressions(depth=2), st.sampled_from(NAMES))
def test_chain_rule_through_exp(f, s):
    assert is_zero(diff(exp(f), s) - exp(f) * diff(f, s))


@FAST
@given(expressions(), st.sampled_from(NAMES), st.sampled_from(NAMES))
def test_mixed_partials_commute(f, s, t):
    assert is_zero(diff(diff(f, s), t) - diff(diff(f, t), s))


@FAST
@given(expressions())
def test_simplify_is_idempotent(e):
    once = simplify(e)
    assert simplify(once) == once


@FAST
@given(polynomials(), polynomials())
def test_polynomial_identities_decided_symbolically(p, q):
    e = parse(f"({p})*({q}) - ({q})*({p})", TABLE)
    r = is_zero(e)
    assert r and r.method == "symbolic"


def test_finite_difference_audit_on_random_expressions():
    rng = random.Random(11)
    points = [sample_point(NAMES, rng) for _ in range(3)]
    worst = max(fd_audit(random_expression(rng), rng.choice(NAMES), points) for _ in range(50))
    assert worst <= 1e-5


# -- zero test -----------------------------------------------------------------


def test_symbolic_tier_first():
    r = is_zero(P("(a + b)^2 - a^2 - 2*a*b - b^2"))
    assert r.value and r.method == "symbolic" and r.tolerance == 0


def test_numeric_tier_for_trig_identity():
    r = is_zero(P("sin(a)^2 + cos(a)^2 - 1"))
    assert r.value and r.method == "numeric" and r.probes == 8
    assert r.residual < 1e-12


def test_nonzero_detected():
    r = is_zero(P("sin(a)^2 - cos(a)^2"))
    assert not r.value


def test_tolerance_override_is_scoped():
    assert current_tolerance() == 1e-9
    with numeric_tolerance(1e-3):
        r = is_zero(P("sin(a)^2 + cos(a)^2 - 1 + a/10^6"))
        assert r.value and r.tolerance == 1e-3
    assert current_tolerance() == 1e-9
    assert not is_zero(P("sin(a)^2 + cos(a)^2 - 1 + a/10^6"))


def test_tolerance_must_be_positive():
    with pytest.raises(ValueError):
        with numeric_tolerance(0):
            pass


def test_zero_constant():
    assert ZERO.is_zero_const and is_zero(ZERO).method == "symbolic"


def test_sampling_is_deterministic():
    rng1, rng2 = random.Random(5), random.Random(5)
    assert sample_point(NAMES, rng1) == sample_point(NAMES, rng2)
    p = sample_point(NAMES, random.Random(5))
    assert all(0.25 <= v <= 1.75 for v in p.values())


def test_sampling_avoids_small_denominators():
    e = P("1/(a - 1)")
    rng = random.Random(0)
    for _ in range(20):
        p = sample_point(NAMES, rng, [e])
        assert abs(p["a"] - 1) >= 1e-3
        assert math.isfinite(evaluate(e, p))
