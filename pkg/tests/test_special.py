"""Special functions; frozen values come from mpmath's jtheta and qp."""

import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qdiffeq import (DivergentProductError, NumericContext, ThetaZeroError, q_character, q_log,
                     q_pochhammer, theta, theta_triple_product)

# [DERIVED] theta(z) = jtheta(3, x, t) with t = q^(-1/2) and exp(2ix) = t z, mpmath at 45 digits
THETA_FROZEN = [
    (2, "0.5", "6.566530242620615465175371080901717736904"),
    (2, "0.3+0.7i", "0.7522803316739124987689650734264788122732-1.284772114573174656459873345089873345785i"),
    (2, "3", "4.527463672128424215069358784966995596486"),
    ("3/2", "1.1", "3.992943976112038147145725547599482022315"),
    ("polar(2, pi/7)", "0.4", "6.369175182306838121200622654193927068935-3.541805624460396477281606594882987315305i"),
]


@pytest.mark.parametrize("q,z,expected", THETA_FROZEN)
def test_theta_frozen_high_precision(q, z, expected):
    c = NumericContext(q, precision=45)
    got = theta(c, c.num(z))
    expected = c.num(expected)
    assert abs(got - expected) <= 1e-35 * abs(expected)


@pytest.mark.parametrize("q,z,expected", THETA_FROZEN)
def test_theta_frozen_double(q, z, expected):
    c = NumericContext(q, precision=16)
    got = theta(c, c.num(z))
    expected = complex(c.num(expected))
    assert abs(got - complex(expected)) <= 1e-12 * abs(complex(expected))


def test_q_pochhammer_frozen():
    c = NumericContext(2, precision=45)
    # [DERIVED] mpmath.qp(2^(1/3), 2, 10)
    expected = c.num("28848640368764.07931932281127621641347948")
    got = q_pochhammer(c, c.q_power(Fraction(1, 3)), 10)
    assert abs(got - expected) < 1e-30 * abs(expected)
    # [DERIVED] mpmath.qp(1/2, 1/2, inf)
    inf = q_pochhammer(c, 0.5, math.inf, 0.5)
    assert abs(inf - c.num("0.2887880950866024212788997219292307800889")) < 1e-28


def test_q_pochhammer_edge_cases(dctx):
    assert q_pochhammer(dctx, 5, 0) == 1
    assert q_pochhammer(dctx, 1, 3) == 0
    with pytest.raises(DivergentProductError):
        q_pochhammer(dctx, 0.5, math.inf)
    with pytest.raises(ValueError):
        q_pochhammer(dctx, 0.5, -1)


def _grid(c, n=50):
    """n points on a few annuli away from the theta zeros -q^k."""
    pts = []
    for k in range(n):
        r = 0.3 + 2.7 * k / n
        ang = 2 * math.pi * (0.13 + 0.37 * k)
        z = c.num(r) * c.exp(c.num(1j * ang))
        pts.append(z)
    return pts


@pytest.mark.parametrize("q", [2, "3/2", "polar(2, pi/7)"])
@pytest.mark.parametrize("precision,rel", [(16, 1e-10), (40, 1e-30)])
def test_functional_equations_on_grid(q, precision, rel):
    c = NumericContext(q, precision=precision)
    lam = c.num("0.7+0.4i")
    for z in _grid(c):
        th = theta(c, z)
        assert abs(theta(c, c.q * z) - z * th) <= rel * abs(z * th)
        e = q_character(c, z, lam)
        assert abs(q_character(c, c.q * z, lam) - lam * e) <= rel * abs(lam * e)
        lz = q_log(c, z)
        assert abs(q_log(c, c.q * z) - lz - 1) <= rel * max(1, abs(lz))
        assert abs(theta_triple_product(c, z) - th) <= rel * abs(th)


def test_e_q_q_value():
    # e_{q,q}(z) = theta(z)/theta(z/q) = z/q, so 0.25 at z = 0.5, q = 2
    c = NumericContext(2, precision=30)
    assert abs(q_character(c, 0.5, 2) - 0.25) < 1e-28


@pytest.mark.parametrize("m", range(-3, 4))
def test_e_q_integer_powers(m):
    # theta(q^k z) = q^(k(k-1)/2) z^k theta(z) gives e_{q,q^m}(z) = q^(-m(m+1)/2) z^m
    c = NumericContext("polar(2, pi/7)", precision=40)
    z = c.num("0.3+0.45i")
    want = c.q_power(Fraction(-m * (m + 1), 2)) * z ** m
    assert abs(q_character(c, z, c.q ** m) - want) < 1e-32 * abs(want)


def test_e_q_1_is_one(dctx):
    assert q_character(dctx, 0.7, 1) == 1


def test_q_log_special_points():
    c = NumericContext(2, precision=40)
    # theta(1/z) = z theta(z) gives l(1) = -1/2, hence l(1/q) = -3/2
    assert abs(q_log(c, 1) + 0.5) < 1e-36
    assert abs(q_log(c, 0.5) + 1.5) < 1e-36


@pytest.mark.parametrize("k", [-2, 0, 1, 3])
def test_theta_zero_raises(dctx, k):
    z = -(2.0 ** k)
    assert abs(theta(dctx, z)) < 1e-8 * max(1, abs(theta(dctx, abs(z))))
    with pytest.raises(ThetaZeroError):
        q_log(dctx, z)
    with pytest.raises(ThetaZeroError):
        q_character(dctx, 2 * z, 2)


def test_theta_at_zero_rejected(dctx):
    with pytest.raises(ValueError):
        theta(dctx, 0)


@given(st.floats(min_value=0.2, max_value=5.0), st.floats(min_value=-math.pi, max_value=math.pi))
def test_theta_functional_equation_property(r, ang):
    c = NumericContext("polar(1.8, 0.3)", precision=16)
    z = r * complex(math.cos(ang), math.sin(ang))
    th = theta(c, z)
    if abs(th) < 1e-6:
        return
    assert abs(theta(c, c.q * z) - z * th) <= 1e-9 * abs(z * th)
    # theta(1/z) = z theta(z)
    assert abs(theta(c, 1 / z) - z * th) <= 1e-9 * abs(z * th)
