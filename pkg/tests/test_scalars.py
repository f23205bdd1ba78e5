import cmath
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lsness.scalars import (
    ONE,
    ZERO,
    ArithmeticOverflowError,
    ExactScalar,
    GaussInt,
    checked_int64,
    poly_conj,
    poly_eval,
    poly_mul,
)

coef = st.integers(min_value=-50, max_value=50)
term = st.tuples(st.integers(0, 4), st.integers(0, 3), coef, coef)
scalars = st.lists(term, max_size=6).map(
    lambda ts: ExactScalar({(a, b): GaussInt(r, i) for a, b, r, i in ts}))
reals = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)


def test_eta_squared_is_minus_eps_squared():
    eta = ExactScalar.eta()
    assert poly_mul(eta, eta) == ExactScalar({(2, 0): GaussInt(-1, 0)})


def test_fixed_weight_composite_is_polynomial():
    # eta * (2p - l) with p = 1/2 - 1/eta and l = 0 equals eta - 2
    eta = ExactScalar.eta()
    got = eta - 2
    assert got == ExactScalar({(1, 0): GaussInt(0, 1), (0, 0): GaussInt(-2, 0)})
    assert poly_eval(got, 0.5) == complex(-2, 0.5)


def test_multiplicative_identity():
    a = ExactScalar({(1, 2): GaussInt(3, -4)})
    assert poly_mul(a, ONE) == a
    assert poly_mul(a, ZERO) == ZERO


def test_conjugation_examples():
    eta = ExactScalar.eta()
    assert poly_conj(eta) == -eta
    a = 2 - eta + 3 * eta * ExactScalar.z()
    assert poly_conj(a) == 2 + eta - 3 * eta * ExactScalar.z()


def test_evaluation_examples():
    assert poly_eval(ExactScalar.eta(), 1.0, 0.0) == 1j
    assert poly_eval(ExactScalar.z(2), 0.0, 2 * math.log(2)) == pytest.approx(4.0)
    assert poly_eval(-ExactScalar.eps(2), 0.5) == pytest.approx(-0.25)


def test_evaluation_rejects_non_finite_and_overflow():
    with pytest.raises(ValueError):
        poly_eval(ONE, float("nan"))
    with pytest.raises(ArithmeticOverflowError):
        poly_eval(ExactScalar.z(4), 0.0, 1e3)


def test_checked_int64():
    assert checked_int64(2**62) == 2**62
    with pytest.raises(ArithmeticOverflowError):
        checked_int64(2**63)


def test_big_coefficients_stay_exact():
    a = ExactScalar({(0, 0): GaussInt(10**30, 1)})
    b = poly_mul(a, a)
    assert b.coefficient(0, 0) == GaussInt(10**60 - 1, 2 * 10**30)


def test_no_stored_zeros():
    a = ExactScalar.eps() + ExactScalar.const(3)
    b = a - ExactScalar.eps()
    assert b == ExactScalar.const(3)
    assert list(b.terms) == [(0, 0)]


def test_text_and_json_round_trip():
    a = 2 - ExactScalar.eta() + 3 * ExactScalar.eta() * ExactScalar.z()
    assert ExactScalar.parse(str(a)) == a
    assert ExactScalar.from_json(a.to_json()) == a
    assert str(ExactScalar.eta()) == "(0+1i)·ε^1·z^0"


def test_scaled_evaluation_is_exact():
    a = ExactScalar.eta(2) + 3 * ExactScalar.eps()  # -eps^2 + 3 eps
    got = a.eval_scaled(1, 2, 2)  # 4 * (-1/4 + 3/2)
    assert got == GaussInt(5, 0)
    re, im = a.eval_fraction(Fraction(1, 2))
    assert (re, im) == (Fraction(5, 4), 0)


@settings(max_examples=60, deadline=None)
@given(scalars, scalars, scalars)
def test_ring_axioms(a, b, c):
    assert poly_mul(a, b) == poly_mul(b, a)
    assert poly_mul(poly_mul(a, b), c) == poly_mul(a, poly_mul(b, c))
    assert poly_mul(a, b + c) == poly_mul(a, b) + poly_mul(a, c)
    assert (a + b) + c == a + (b + c)


@settings(max_examples=60, deadline=None)
@given(scalars, reals, reals)
def test_evaluation_commutes_with_conjugation(a, eps, mu):
    assert poly_eval(poly_conj(a), eps, mu) == pytest.approx(poly_eval(a, eps, mu).conjugate(), abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(scalars, scalars, reals, reals)
def test_evaluation_is_multiplicative(a, b, eps, mu):
    lhs = poly_eval(poly_mul(a, b), eps, mu)
    rhs = poly_eval(a, eps, mu) * poly_eval(b, eps, mu)
    assert cmath.isclose(lhs, rhs, rel_tol=1e-9, abs_tol=1e-6)


@settings(max_examples=40, deadline=None)
@given(scalars)
def test_conjugation_is_an_involution_and_normalize_idempotent(a):
    assert poly_conj(poly_conj(a)) == a
    assert a.normalize().normalize() == a.normalize()
