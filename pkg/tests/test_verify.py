import math
import random
from fractions import Fraction

import pytest

from conftest import close
from qdiffeq import (NumericContext, PuiseuxSeries, SeriesError, TruncationDominated, eval_solution,
                     growth_classify, parse, q_character, solve, wronskian_matrix)
from qdiffeq.frobenius import SolutionForm
from qdiffeq.verify import apply_operator, rebase_character

HYPER = "(1-S)*(1-q^(1/2)*S) - z*(1-q^(1/3)*S)*(1-q^(1/5)*S)"


def random_regular_text(rng):
    n = rng.randint(2, 4)
    terms = []
    for i in range(n + 1):
        for j in range(4):
            c = rng.randint(-4, 4)
            if (i in (0, n) and j == 0):
                c = rng.choice([-4, -3, -2, -1, 1, 2, 3, 4])
            if c:
                terms.append(f"({c})*z^{j}*S^{i}")
    return " + ".join(terms)


def test_random_regular_operators_have_vanishing_residuals():
    ctx = NumericContext(2, precision=16)
    rng = random.Random(7)
    checked = 0
    for _ in range(100):
        op = parse(random_regular_text(rng), ctx)
        basis = solve(op, 20)
        assert len(basis) == op.order
        for sol in basis:
            res = apply_operator(op, sol)
            assert res.relative < 1e-8, str(op)
            checked += 1
    assert checked >= 200


def _slope_two_first(ctx, N, bump=None):
    q = ctx.q
    coeffs = [0] * (2 * N)
    pochh = ctx.one
    for n in range(N):
        if n:
            pochh *= 1 - q ** (2 * n)
        coeffs[2 * n] = (-1) ** n * q ** (2 * n * (n - 1)) / pochh
    if bump:
        idx, delta = bump
        coeffs[idx] += delta
    return SolutionForm(Fraction(0), ctx.one, 0, PuiseuxSeries.from_coeffs(coeffs, 0, 1, 2 * N))


def test_hand_built_series_has_zero_residual(hctx):
    op = parse("z^2*S^2 - S + 1", hctx)
    res = apply_operator(op, _slope_two_first(hctx, 10))
    assert res.relative < 1e-40
    assert res.guaranteed_order == 20


def test_perturbation_is_detected(dctx):
    op = parse("z^2*S^2 - S + 1", dctx)
    res = apply_operator(op, _slope_two_first(dctx, 10, bump=(4, 1e-3)))
    (stratum,) = res.strata.values()
    # the corrupted coefficient enters (-S + 1) at index 4 with factor 1 - q^4
    assert abs(stratum.coefficient(4)) == pytest.approx(1e-3 * 15, rel=1e-6)
    assert res.relative > 1e-5


def test_residual_reports_log_strata(dctx):
    op = parse("(1-S)^2 - z*S", dctx)
    logged = solve(op)[1]
    res = apply_operator(op, logged)
    assert sorted(res.strata) == [0, 1]
    assert res.relative < 1e-12


def test_rebase_character_matches_functions(hctx):
    c = hctx.num("0.7+0.2i")
    for m in (-2, 1, 3):
        part = SolutionForm(Fraction(0), c * hctx.q ** m, 0, PuiseuxSeries.from_coeffs([1]))
        series = rebase_character(hctx, part, c)
        z = hctx.num("0.3-0.1i")
        lhs = q_character(hctx, z, c * hctx.q ** m)
        rhs = series.evaluate(hctx, z) * q_character(hctx, z, c)
        assert close(lhs, rhs, 1e-35)
    with pytest.raises(ValueError):
        rebase_character(hctx, SolutionForm(Fraction(0), 3 * c, 0, PuiseuxSeries.from_coeffs([1])), c)


@pytest.mark.parametrize("text,pick,kind", [
    (HYPER, 0, "convergent"),
    (HYPER, 1, "convergent"),
    ("q*z*S^2 - S + 1", 0, "convergent"),  # theta^-1 series
    ("q*z*S^2 - S + 1", 1, "q_gevrey"),  # horizontal series
    ("(1-S)^2 - z*S", 0, "convergent"),
])
def test_growth_classes(hctx, text, pick, kind):
    basis = solve(parse(text, hctx), 30)
    series = sorted(basis, key=lambda s: s.theta_exp)[pick].series
    assert growth_classify(series, hctx.q).kind == kind


def test_ramanujan_gevrey_weight(hctx):
    basis = solve(parse("q*z*S^2 - S + 1", hctx), 30)
    horiz = [s for s in basis if s.theta_exp == 0][0]
    report = growth_classify(horiz.series, hctx.q)
    # |f_n| ~ |q|^(n^2) / |(q;q)_n| ~ |q|^(n^2 / 2)
    assert report.weight == pytest.approx(0.5, abs=0.05)


def test_growth_needs_enough_terms(dctx):
    with pytest.raises(SeriesError):
        growth_classify(PuiseuxSeries.from_coeffs([1, 2, 3]), 2)


def test_eval_constant_and_character(ctx):
    one = SolutionForm(Fraction(0), ctx.one, 0, PuiseuxSeries.from_coeffs([1]))
    assert close(eval_solution(ctx, one, 0.37).value, 1, 1e-14)
    (sol,) = solve(parse("S - q", ctx))
    res = eval_solution(ctx, sol, 0.5)
    # e_{q,q}(z) = z / q with theta(z) = sum q^(-d(d+1)/2) z^d
    assert close(res.value, 0.25, 1e-14)
    assert not res.truncation_dominated


def test_eval_hypergeometric_against_direct_sum(hctx):
    basis = solve(parse(HYPER, hctx), 30)
    f1 = [s for s in basis if abs(s.character - 1) < 1e-20][0]
    mp, q = hctx.mp, hctx.q
    a, b, r = (hctx.q_power(Fraction(1, 3)), hctx.q_power(Fraction(1, 5)), hctx.q_power(Fraction(1, 2)))
    z = mp.mpf("0.01")
    direct = mp.nsum(lambda n: mp.qp(a, q, int(n)) * mp.qp(b, q, int(n))
                     / (mp.qp(q, q, int(n)) * mp.qp(r * q, q, int(n))) * z ** int(n), [0, 60])
    res = eval_solution(hctx, f1, z)
    assert close(res.value, direct, 10 * hctx.tol)


@pytest.mark.parametrize("c", ["3", "0.4+1.1i", "-2"])
def test_eval_sigma_equivariance(hctx, c):
    (sol,) = solve(parse(f"S - ({c})", hctx))
    z0 = hctx.num("0.21+0.05i")
    lhs = eval_solution(hctx, sol, hctx.q * z0).value
    rhs = hctx.num(c) * eval_solution(hctx, sol, z0).value
    assert close(lhs, rhs, 1e-35)


def test_eval_with_log_override(dctx):
    op = parse("(1-S)^2", dctx)
    basis = solve(op)
    logged = basis[1]
    assert close(eval_solution(dctx, logged, 0.3, ellq_value=5.0).value, 5.0, 1e-14)


def test_truncation_dominated_is_flagged(dctx):
    sol = SolutionForm(Fraction(0), dctx.one, 0, PuiseuxSeries.from_coeffs([1, 1, 1, 1], 0, 1, 4))
    res = eval_solution(dctx, sol, 0.9)
    assert res.truncation_dominated
    with pytest.raises(TruncationDominated):
        eval_solution(dctx, sol, 0.9, strict=True)


def test_wronskian_rescaling(dctx):
    basis = solve(parse(HYPER, dctx), 30)
    fs = [lambda z, s=s: eval_solution(dctx, s, z).value for s in basis]
    _, det = wronskian_matrix(dctx, fs, 0.05)
    scaled = [lambda z: 3 * fs[0](z), lambda z: (1 - 2j) * fs[1](z)]
    _, det2 = wronskian_matrix(dctx, scaled, 0.05)
    assert abs(det) > 1e-6
    assert close(det2, det * 3 * (1 - 2j), 1e-10)
