"""Built-in example operators with independent oracles.

Each oracle recomputes the expected coefficients from closed forms or
from a recurrence written out here by hand, never through the solver's
own recurrence code.  Characters and polygons are compared exactly where
they are rational and to ``10 tol`` otherwise.
"""

from __future__ import annotations

import cmath
import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .classify import is_regular_singular, newton_polygon
from .errors import QDiffError
from .frobenius import SolutionBasis, characteristic, solve, theta_transform
from .numctx import NumericContext, format_fraction
from .operator import parse
from .verify import apply_operator

__all__ = ["Fixture", "Check", "FixtureResult", "FIXTURES", "get_fixture", "run_fixture",
           "load_fixture_file", "fixture_names"]


@dataclass(frozen=True)
class Check:
    description: str
    deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tolerance


@dataclass
class FixtureResult:
    name: str
    operator: str
    checks: list = field(default_factory=list)
    error: str | None = None
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return self.error is None and all(c.passed for c in self.checks)

    @property
    def max_deviation(self) -> float:
        return max((c.deviation for c in self.checks if math.isfinite(c.deviation)), default=0.0)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "operator": self.operator,
            "passed": self.passed,
            "max_deviation": self.max_deviation,
            "elapsed": round(self.elapsed, 3),
            "error": self.error,
            "checks": [{"description": c.description, "deviation": c.deviation,
                        "tolerance": c.tolerance, "passed": c.passed} for c in self.checks],
        }


@dataclass(frozen=True)
class Fixture:
    """An operator template, its parameters and expected data.

    ``operator`` may contain ``{name}`` placeholders filled from ``params``.
    ``expected`` holds declarative data (regularity, slopes, lengths,
    solution count); ``oracle`` adds closed-form coefficient checks.
    """

    name: str
    operator: str
    params: dict
    provenance: str
    expected: dict
    oracle: Callable | None = None
    truncation: int | None = None

    def operator_text(self) -> str:
        return self.operator.format(**{k: format_fraction(Fraction(v)) for k, v in self.params.items()})


# -- helpers -------------------------------------------------------------

def _poch(ctx, a, n: int, base=None):
    base = ctx.q if base is None else base
    out = ctx.one
    for i in range(n):
        out *= 1 - a * base ** i
    return out


def _rel(a, b) -> float:
    # stays in the oracle's number type so huge values do not overflow
    if b == 0:
        return float(abs(a))
    return float(abs(a - b) / abs(b))


def _coeff_tol(ctx) -> float:
    return 10 * ctx.tol


def _residual_tol(ctx) -> float:
    return 1e-8 if not ctx.high_precision else max(10 * ctx.tol, 1e-25)


def _find(ctx, basis, theta_exp, character, log_power=None):
    """Solution with the given prefactor, or ``None``."""
    best = None
    for sol in basis:
        if Fraction(sol.theta_exp) != Fraction(theta_exp):
            continue
        if log_power is not None and sol.log_power != log_power:
            continue
        d = _rel(sol.character, character)
        if d < math.sqrt(ctx.tol) and (best is None or d < best[0]):
            best = (d, sol)
    return None if best is None else best[1]


def _compare_series(ctx, label, series, expected: dict) -> Check:
    """``expected`` maps index to value; indices past the truncation are skipped."""
    worst = 0.0
    checked = 0
    for idx, val in expected.items():
        if idx >= series.truncation:
            continue
        worst = max(worst, _rel(series.coefficient(idx), val))
        checked += 1
    if checked == 0:
        return Check(f"{label}: no coefficients available", math.inf, _coeff_tol(ctx))
    return Check(f"{label} ({checked} coefficients)", worst, _coeff_tol(ctx))


def _missing(label, ctx) -> Check:
    return Check(f"{label}: solution not found", math.inf, _coeff_tol(ctx))


# -- oracles -------------------------------------------------------------

def _hypergeometric_oracle(ctx: NumericContext, basis: SolutionBasis, params, N):
    q = ctx.q
    qa, qb, qr = (ctx.q_power(Fraction(params[k])) for k in ("alpha", "beta", "r"))
    checks = []
    # root 1: (q^a;q)_n (q^b;q)_n / ((q;q)_n (q^(r+1);q)_n)
    f = {n: _poch(ctx, qa, n) * _poch(ctx, qb, n) / (_poch(ctx, q, n) * _poch(ctx, qr * q, n))
         for n in range(N)}
    sol = _find(ctx, basis, 0, 1)
    checks.append(_compare_series(ctx, "root 1 series", sol.series, f) if sol else _missing("root 1", ctx))
    # root q^(-r): the same with a, b shifted by -r and q^(r+1) replaced by q^(1-r)
    g = {n: _poch(ctx, qa / qr, n) * _poch(ctx, qb / qr, n) / (_poch(ctx, q, n) * _poch(ctx, q / qr, n))
         for n in range(N)}
    sol = _find(ctx, basis, 0, 1 / qr)
    checks.append(_compare_series(ctx, "root q^(-r) series", sol.series, g) if sol else _missing("root q^(-r)", ctx))
    return checks


def _p1_first(ctx, l, N):
    q = ctx.q
    out = {}
    for d in range(N):
        den = ctx.one
        for k in range(1, d + 1):
            den *= (1 - q ** k) ** 2
        out[d] = ctx.q_power(Fraction(l * d * (d - 1), 2)) / den
    return out


def _p1_second(ctx, l, N, first):
    """Log-free stratum of ``l_q F_1 + F_2`` from the hand-derived recurrence, ``f_{2,0} = 0``."""
    q = ctx.q
    f2 = {0: ctx.zero}
    for d in range(1, N):
        f2[d] = (q ** (l * (d - 1)) / (1 - q ** d) ** 2 * f2[d - 1]
                 + first[d] * (2 * q ** d / (1 - q ** d) + l))
    return f2


def _p1_oracle(ctx: NumericContext, basis: SolutionBasis, params, N):
    l = int(params["l"])
    checks = []
    first = _p1_first(ctx, l, N)
    sol = _find(ctx, basis, 0, 1, 0)
    checks.append(_compare_series(ctx, "F_1", sol.series, first) if sol else _missing("F_1", ctx))
    sol = _find(ctx, basis, 0, 1, 1)
    if sol is None:
        checks.append(_missing("l_q F_1 + F_2", ctx))
    else:
        checks.append(_compare_series(ctx, "log stratum of the second solution", sol.series, first))
        low = sol.tail[0].series if sol.tail else None
        f2 = _p1_second(ctx, l, N, first)
        if low is None:
            # F_2 vanished identically; only possible if every f2 is zero
            dev = max(abs(complex(v)) for v in f2.values())
            checks.append(Check("F_2 (identically zero)", dev, _coeff_tol(ctx)))
        else:
            worst = 0.0
            for d, val in f2.items():
                if d < low.truncation:
                    got = low.coefficient(d)
                    scale = max(abs(complex(val)), abs(complex(first[d])))
                    worst = max(worst, abs(complex(got - val)) / scale)
            checks.append(Check("F_2 against its recurrence", worst, _coeff_tol(ctx)))
    if l > 2:
        checks.extend(_p1_character_checks(ctx, basis, l, N))
    return checks


def _p1_character_checks(ctx, basis, l, N):
    """Level ``l > 2``: the ``l - 2`` solutions with prefactor ``theta^(-1/(l-2))``.

    With ``s = l - 2``, ``p = q^(1/s)`` and ``Q = z^(1/s)`` the conjugated
    operator is ``Q^2 - 2Q S + p^(-1) S^2 - p^(-l(l-1)/2) S^l``; its nonzero
    characteristic roots are ``c = zeta p^((l+1)/2)`` with ``zeta^s = 1``,
    and the series satisfy

        zeta^2 p^l (p^(2d) - p^(ld)) f_d = 2 c p^(d-1) f_(d-1) - f_(d-2).
    """
    s = l - 2
    p = ctx.q_power(Fraction(1, s))
    checks = []
    for k in range(s):
        zeta = ctx.exp(2 * ctx.pi * 1j * ctx.num(Fraction(k, s)))
        c = zeta * ctx.q_power(Fraction(l + 1, 2 * s))
        sol = _find(ctx, basis, Fraction(-1, s), c)
        label = f"character zeta^{k} p^((l+1)/2)"
        if sol is None:
            checks.append(_missing(label, ctx))
            continue
        f = {-1: ctx.zero, 0: ctx.one}
        for d in range(1, N * s):
            lhs = zeta ** 2 * p ** l * (p ** (2 * d) - p ** (l * d))
            f[d] = (2 * c * p ** (d - 1) * f[d - 1] - f[d - 2]) / lhs
        del f[-1]
        checks.append(_compare_series(ctx, label, sol.series, f))
    return checks


def _ramanujan_oracle(ctx, basis, params, N):
    q = ctx.q
    checks = []
    f = {n: (-1) ** n * ctx.q_power(Fraction(n * (n - 1))) * q ** n / _poch(ctx, q, n) for n in range(N)}
    sol = _find(ctx, basis, 0, 1)
    checks.append(_compare_series(ctx, "horizontal series", sol.series, f) if sol else _missing("horizontal", ctx))
    g = {n: ctx.q_power(Fraction(-n * (n - 1), 2)) / q ** n / _poch(ctx, q, n) for n in range(N)}
    sol = _find(ctx, basis, -1, 1)
    checks.append(_compare_series(ctx, "theta^(-1) series", sol.series, g) if sol else _missing("theta^(-1)", ctx))
    return checks


def _slope_minus_1_oracle(ctx, basis, params, N):
    # characters: roots of q^(-1) x^2 + x + 1, series identically 1
    q = ctx.q
    disc = cmath.sqrt(complex(1 - 4 / q))
    checks = []
    for sign in (1, -1):
        c = (-1 + sign * disc) * complex(q) / 2
        sol = _find(ctx, basis, -1, c)
        label = f"theta^(-1) e_(q,{complex(c):.6g})"
        checks.append(_compare_series(ctx, label, sol.series, {n: int(n == 0) for n in range(N)})
                      if sol else _missing(label, ctx))
    return checks


def _slope_minus_2_oracle(ctx, basis, params, N):
    q = ctx.q
    q2 = q * q
    checks = []
    f = {}
    for n in range(N):
        if 2 * n < N:
            f[2 * n] = (-1) ** n * ctx.q_power(Fraction(n * (n - 1), 2)) ** 4 / _poch(ctx, q2, n, q2)
        if 2 * n + 1 < N:
            f[2 * n + 1] = 0
    sol = _find(ctx, basis, 0, 1)
    checks.append(_compare_series(ctx, "F_1", sol.series, f) if sol else _missing("F_1", ctx))
    g = {}
    for n in range(N):
        if 2 * n < N:
            g[2 * n] = ctx.q_power(-n * (n + 1) - 2 * n) / _poch(ctx, q2, n, q2)
        if 2 * n + 1 < N:
            g[2 * n + 1] = 0
    sol = _find(ctx, basis, -2, q2)
    checks.append(_compare_series(ctx, "theta^(-2) e_(q,q^2) series", sol.series, g)
                  if sol else _missing("theta^(-2)", ctx))
    return checks


def _slope_minus_half_oracle(ctx, basis, params, N):
    checks = []
    r = ctx.q_power(Fraction(1, 4))
    for c, label in ((r, "q^(1/4)"), (-r, "-q^(1/4)")):
        sol = _find(ctx, basis, Fraction(-1, 2), c)
        checks.append(_compare_series(ctx, f"theta^(-1/2) e_(q,{label})", sol.series,
                                      {n: int(n == 0) for n in range(2 * N)})
                      if sol else _missing(label, ctx))
    return checks


def _quintic_oracle(ctx, basis, params, N):
    """Roots of the transformed characteristic polynomial are ``xi p^(-1/2)``, ``xi^20 = 1``."""
    op = basis.op
    seg = newton_polygon(op).segments[0]
    new_op, info = theta_transform(op, seg.slope)
    hseg = [s for s in newton_polygon(new_op).segments if s.is_horizontal and s.height == 0][0]
    roots = [complex(r) for r, m in characteristic(new_op, hseg).roots for _ in range(m)]
    target = complex(info.ctx.q_power(Fraction(-1, 2)))
    worst = 0.0
    used = set()
    for k in range(20):
        xi = cmath.exp(2j * math.pi * k / 20)
        want = xi * target
        j = min((j for j in range(len(roots)) if j not in used), key=lambda j: abs(roots[j] - want),
                default=None)
        if j is None:
            worst = math.inf
            break
        used.add(j)
        worst = max(worst, abs(roots[j] - want))
    checks = [Check("20 characteristic roots xi p^(-1/2)", worst if len(roots) == 20 else math.inf, 1e-8)]
    theta_sols = [s for s in basis if Fraction(s.theta_exp) == Fraction(-1, 20)]
    checks.append(Check("20 theta^(-1/20) solutions", abs(len(theta_sols) - 20), 0))
    return checks


def _pn_oracle(ctx, basis, params, N):
    # I-function coefficients at P = 1: 1 / (q;q)_d^(N+1)
    n1 = int(params["N"]) + 1
    f = {d: 1 / _poch(ctx, ctx.q, d) ** n1 for d in range(N)}
    sol = _find(ctx, basis, 0, 1, 0)
    return [_compare_series(ctx, "I-function series", sol.series, f) if sol else _missing("I-function", ctx)]


# -- registry ------------------------------------------------------------

_P1 = "(1-S)^2 - z*S^{l}"
_QUINTIC = "(1-S)^5 - z*(1-q*S^5)*(1-q^2*S^5)*(1-q^3*S^5)*(1-q^4*S^5)*(1-q^5*S^5)"


def _p1_fixture(l: int) -> Fixture:
    if l <= 2:
        expected = {"regular": True, "slopes": ["0"], "lengths": [2], "solutions": 2}
    else:
        expected = {"regular": False, "slopes": [format_fraction(Fraction(-1, l - 2)), "0"],
                    "lengths": [l - 2, 2], "solutions": l}
    return Fixture(
        f"p1-level-{l}", _P1, {"l": l},
        "projective line with level structure: F_1 closed form, F_2 recurrence with f_(2,0) = 0"
        + ("" if l <= 2 else "; irregular level, theta^(-1/(l-2)) character series"),
        expected, _p1_oracle)


FIXTURES: dict = {f.name: f for f in [
    Fixture(
        "q-hypergeometric",
        "(1-S)*(1-q^({r})*S) - z*(1-q^({alpha})*S)*(1-q^({beta})*S)",
        {"alpha": Fraction(1, 3), "beta": Fraction(1, 5), "r": Fraction(1, 2)},
        "q-hypergeometric equation with r not an integer: both series in q-Pochhammer closed form",
        {"regular": True, "slopes": ["0"], "lengths": [2], "solutions": 2},
        _hypergeometric_oracle),
    *[_p1_fixture(l) for l in (0, 1, 2, 3, 5)],
    Fixture(
        "ramanujan", "q*z*S^2 - S + 1", {},
        "Ramanujan equation: 0phi1-type horizontal series and the theta^(-1) series",
        {"regular": False, "slopes": ["-1", "0"], "lengths": [1, 1], "solutions": 2},
        _ramanujan_oracle),
    Fixture(
        "slope-minus-1", "z^2*S^2 + z*S + 1", {},
        "single slope -1: theta^(-1) e_(q,c) with c a root of q^(-1) x^2 + x + 1",
        {"regular": False, "slopes": ["-1"], "lengths": [2], "solutions": 2},
        _slope_minus_1_oracle),
    Fixture(
        "slope-minus-2", "z^2*S^2 - S + 1", {},
        "slopes -2 and 0: even series F_1 and theta^(-2) e_(q,q^2) series (z^(2n) powers)",
        {"regular": False, "slopes": ["-2", "0"], "lengths": [1, 1], "solutions": 2},
        _slope_minus_2_oracle),
    Fixture(
        "slope-minus-half", "z*S^2 - 1", {},
        "single slope -1/2: theta^(-1/2) e_(q, +-q^(1/4)) with constant series",
        {"regular": False, "slopes": ["-1/2"], "lengths": [2], "solutions": 2},
        _slope_minus_half_oracle),
    Fixture(
        "quintic", _QUINTIC, {},
        "quintic threefold: degree 25 equation, slopes -1/20 and 0, 20 roots xi p^(-1/2)",
        {"regular": False, "slopes": ["-1/20", "0"], "lengths": [20, 5], "solutions": 25},
        _quintic_oracle, truncation=10),
    Fixture(
        "p2", "(1-S)^{n1} - z", {"n1": 3, "N": 2},
        "projective plane I-function at P = 1: coefficients 1/(q;q)_d^3",
        {"regular": True, "slopes": ["0"], "lengths": [3], "solutions": 3},
        _pn_oracle),
]}


def fixture_names() -> list:
    return sorted(FIXTURES)


def get_fixture(name: str) -> Fixture:
    try:
        return FIXTURES[name]
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(fixture_names())}") from None


def load_fixture_file(path) -> Fixture:
    """JSON ``{name, operator, params, oracle}``; ``oracle`` is declarative.

    Supported oracle keys: ``regular``, ``slopes``, ``lengths``,
    ``solutions`` and ``coefficients`` (a list of ``{solution, values}``
    with ``values`` as ``[re, im]`` pairs from index 0).
    """
    with open(path) as fh:
        data = json.load(fh)
    params = {k: Fraction(str(v)) for k, v in data.get("params", {}).items()}
    oracle = data.get("oracle", {})
    coeffs = oracle.get("coefficients")

    def file_oracle(ctx, basis, _params, N):
        out = []
        for entry in coeffs or []:
            i = int(entry["solution"])
            if i >= len(basis):
                out.append(_missing(f"solution {i}", ctx))
                continue
            want = {k: complex(*v) if isinstance(v, (list, tuple)) else complex(v)
                    for k, v in enumerate(entry["values"])}
            out.append(_compare_series(ctx, f"solution {i} coefficients", basis[i].series, want))
        return out

    return Fixture(data.get("name", str(path)), data["operator"], params,
                   data.get("provenance", f"fixture file {path}"), oracle, file_oracle,
                   data.get("truncation"))


def _structure_checks(ctx, fx: Fixture, op, basis) -> list:
    exp = fx.expected
    checks = []
    if "regular" in exp:
        checks.append(Check("regular singular verdict", float(bool(is_regular_singular(op)) != exp["regular"]), 0))
    poly = newton_polygon(op)
    if "slopes" in exp:
        got = [format_fraction(s) for s in poly.slopes]
        checks.append(Check(f"slopes {got}", float(got != [str(s) for s in exp["slopes"]]), 0))
    if "lengths" in exp:
        checks.append(Check(f"lengths {poly.lengths}", float(poly.lengths != list(exp["lengths"])), 0))
    if "solutions" in exp and basis is not None:
        checks.append(Check(f"{len(basis)} solutions", float(abs(len(basis) - int(exp["solutions"]))), 0))
    return checks


def _oracle_context(ctx: NumericContext) -> NumericContext:
    """Oracles run at 30 digits at least, so double-mode results are measured, not echoed."""
    if ctx.high_precision:
        return ctx
    return NumericContext(ctx.q, 30, ctx.tol, ctx.series_truncation)


def run_fixture(fx: Fixture, ctx: NumericContext, N: int | None = None, max_shift: int = 64,
                residuals: bool = True) -> FixtureResult:
    """Solve the fixture and compare against its oracle."""
    text = fx.operator_text()
    result = FixtureResult(fx.name, text)
    t0 = time.perf_counter()
    try:
        if N is None:
            N = fx.truncation or ctx.series_truncation
        op = parse(text, ctx)
        basis = solve(op, N, max_shift)
        result.checks.extend(_structure_checks(ctx, fx, op, basis))
        if fx.oracle is not None:
            result.checks.extend(fx.oracle(_oracle_context(ctx), basis, fx.params, N))
        if residuals and fx.expected.get("residual", True):
            worst = max((apply_operator(op, s).relative for s in basis), default=0.0)
            result.checks.append(Check("residuals (relative)", worst, _residual_tol(ctx)))
    except QDiffError as exc:
        result.error = f"{type(exc).__name__}: {exc}"
    result.elapsed = time.perf_counter() - t0
    return result

