import math
from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from qdiffeq import NumericContext, PuiseuxSeries, SeriesError
from qdiffeq.series import series_arith, sigma_q, substitute_root, valuation

CTX = NumericContext("polar(1.7, 0.4)", precision=16)

small_ints = st.integers(min_value=-9, max_value=9)


@st.composite
def series(draw, max_len=6, exact=None):
    s = draw(st.sampled_from([1, 2, 3]))
    coeffs = draw(st.lists(small_ints, min_size=0, max_size=max_len))
    offset = draw(st.integers(min_value=-3, max_value=4))
    if exact is None:
        exact = draw(st.booleans())
    trunc = math.inf if exact else offset + len(coeffs) + draw(st.integers(min_value=0, max_value=3))
    return PuiseuxSeries.from_coeffs(coeffs, offset, s, trunc)


def test_normalisation_strips_zeros():
    a = PuiseuxSeries.from_coeffs([0, 0, 1, 2, 0], 1)
    assert a.offset == 3 and a.coeffs == (1, 2)
    assert PuiseuxSeries.from_coeffs([0, 0]).offset == 0
    assert PuiseuxSeries.zero().is_zero()


def test_truncation_and_coefficient_access():
    a = PuiseuxSeries.from_coeffs([1, 2, 3, 4], 0, 1, 3)
    assert a.coeffs == (1, 2, 3)
    assert a.coefficient(2) == 3
    assert a.coefficient(-4) == 0
    with pytest.raises(SeriesError):
        a.coefficient(3)
    assert a.truncation_exponent() == 3
    assert PuiseuxSeries.from_coeffs([1], 0, 2, 5).truncation_exponent() == Fraction(5, 2)


def test_monomial_and_exponents():
    m = PuiseuxSeries.monomial(5, Fraction(3, 4))
    assert m.ramification == 4 and m.offset == 3
    assert m.exponent(3) == Fraction(3, 4)
    assert m.coefficient_at(Fraction(3, 4)) == 5
    assert m.coefficient_at(Fraction(1, 3)) == 0


def test_product_truncation_rule():
    a = PuiseuxSeries.from_coeffs([1, 1], 0, 1, 5)  # 1 + z + O(z^5)
    b = PuiseuxSeries.from_coeffs([1], 2)  # z^2 exact
    c = a * b
    assert c.truncation == 7 and c.coeffs == (1, 1)
    d = a * PuiseuxSeries.from_coeffs([1, 1], 0, 1, 3)
    assert d.truncation == 3


def test_mixed_ramification_addition():
    a = PuiseuxSeries.monomial(1, Fraction(1, 2))
    b = PuiseuxSeries.monomial(1, Fraction(1, 3))
    c = a + b
    assert c.ramification == 6
    assert c.coefficient_at(Fraction(1, 2)) == 1 and c.coefficient_at(Fraction(1, 3)) == 1


def test_substitute_root_and_back():
    a = PuiseuxSeries.from_coeffs([1, 2, 3])
    r = substitute_root(a, 3)
    assert r.ramification == 1 and r.coefficient(3) == 2 and r.coefficient(6) == 3
    assert r.as_ramified(3).reduce_ramification() == a


def test_sigma_on_fractional_powers():
    c = NumericContext(2, precision=16)
    m = PuiseuxSeries.monomial(1, Fraction(1, 2))
    assert m.sigma(c, 2).coeffs[0] == pytest.approx(2.0)  # (4 z)^(1/2)


def test_evaluate_matches_direct_sum():
    c = NumericContext(2, precision=16)
    a = PuiseuxSeries.from_coeffs([1, -2, 3], -1, 2)
    z = 0.7
    direct = sum(v * z ** (Fraction(i, 2)) for i, v in a.items())
    assert a.evaluate(c, z) == pytest.approx(complex(direct))


def test_valuation_with_tolerance():
    a = PuiseuxSeries.from_coeffs([1e-20, 0, 1], 0)
    assert a.valuation() == 0
    assert a.valuation(1e-10) == 2
    assert valuation(PuiseuxSeries.zero()) == math.inf


def test_helpers_dispatch():
    a = PuiseuxSeries.from_coeffs([1, 1])
    assert series_arith(a, a, "add") == a.scale(2)
    assert series_arith(a, a, "mul").coeffs == (1, 2, 1)
    assert sigma_q(CTX, a, 0) == a


@given(series(exact=True), series(exact=True))
def test_valuation_additive(a, b):
    va, vb = a.valuation(), b.valuation()
    assume(va != math.inf and vb != math.inf)
    assert (a * b).valuation() == va + vb


@given(series(), series())
def test_sigma_is_multiplicative(a, b):
    lhs = (a * b).sigma(CTX, 1)
    rhs = a.sigma(CTX, 1) * b.sigma(CTX, 1)
    assert lhs.truncation == rhs.truncation
    assert lhs.allclose(rhs, 1e-12)


@given(series(), series())
def test_sigma_is_additive(a, b):
    assert (a + b).sigma(CTX, 2).allclose(a.sigma(CTX, 2) + b.sigma(CTX, 2), 1e-12)


@given(series(), st.integers(min_value=-3, max_value=3), st.integers(min_value=-3, max_value=3))
def test_sigma_composes(a, j, k):
    assert a.sigma(CTX, j).sigma(CTX, k).allclose(a.sigma(CTX, j + k), 1e-10)


@given(series(), st.sampled_from([2, 3, 6]))
def test_ramification_change_is_lossless(a, f):
    b = a.with_ramification(a.ramification * f)
    assert b.reduce_ramification() == a.reduce_ramification()
    assert b.truncation_exponent() == a.truncation_exponent()


@given(series(), series(), series())
def test_ring_axioms(a, b, c):
    assert ((a + b) * c).allclose(a * c + b * c, 1e-12)
    assert (a * b).allclose(b * a, 0)
