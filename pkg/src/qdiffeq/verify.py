"""Independent checks of solutions: formal residuals, growth, evaluation.

The residual is computed by plain series arithmetic with the prefactor
rules

    sigma^k theta^r = q^(r k(k-1)/2) z^(r k) theta^r,
    sigma^k e_c     = c^k e_c,
    sigma^k l^m     = (l + k)^m,

so it shares no code with the recurrences of :mod:`qdiffeq.frobenius`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import SeriesError, TruncationDominated
from .frobenius import SolutionForm
from .numctx import NumericContext
from .operator import DifferenceOperator
from .series import PuiseuxSeries
from .special import q_character, q_log, theta

__all__ = [
    "Residual",
    "GrowthReport",
    "EvalResult",
    "apply_operator",
    "growth_classify",
    "eval_solution",
    "rebase_character",
]


@dataclass
class Residual:
    """Residual strata ``{log power: series}`` of ``P f`` after removing the prefactor."""

    theta_exp: Fraction
    character: complex
    strata: dict
    magnitudes: dict = field(default_factory=dict)
    guaranteed_order: Fraction | float = math.inf

    @property
    def max_abs(self) -> float:
        return max((s.max_abs() for s in self.strata.values()), default=0.0)

    @property
    def relative(self) -> float:
        """Largest ``|R_k| / sum|summands_k|`` over all coefficients (backward error)."""
        worst = 0.0
        for b, res in self.strata.items():
            mag = self.magnitudes.get(b)
            for idx, c in res.items():
                if c == 0:
                    continue
                m = mag.coefficient(idx) if mag is not None and idx < mag.truncation else 0.0
                if isinstance(m, float) and m < 1e-290:
                    # summands are subnormal in double mode: nothing to measure
                    if float(abs(c)) < 1e-290:
                        continue
                    return math.inf
                if m == 0:
                    return math.inf
                worst = max(worst, float(abs(c) / m))
        return worst

    def vanishes(self, tol: float) -> bool:
        return self.relative <= tol


def rebase_character(ctx: NumericContext, part: SolutionForm, base) -> PuiseuxSeries:
    """Series of ``part`` rewritten relative to ``e_{q,base}``.

    Uses ``e_{q, c q^m} = q^(-m(m+1)/2) c^(-m) z^m e_{q,c}``.
    """
    base = ctx.num(base)
    c = ctx.num(part.character)
    if c == base:
        return part.series
    ratio = c / base
    m = round(math.log(float(abs(ratio))) / math.log(float(abs(ctx.q))))
    qm = ctx.q_power(m)
    if abs(ratio - qm) > math.sqrt(ctx.tol) * abs(qm):
        raise ValueError("characters differ by a factor outside q^Z")
    factor = ctx.q_power(Fraction(-m * (m + 1), 2)) * base ** (-m)
    return part.series.shift(m).scale(factor)


def _abs_series(a: PuiseuxSeries) -> PuiseuxSeries:
    return PuiseuxSeries(tuple(abs(c) for c in a.coeffs), a.offset, a.ramification, a.truncation)


def apply_operator(op: DifferenceOperator, sol: SolutionForm) -> Residual:
    """Formal residual ``P(sol)`` split by powers of the q-logarithm."""
    ctx = op.ctx
    r = Fraction(sol.theta_exp)
    c = ctx.num(sol.character)
    strata_in = {}
    for part in [sol, *sol.tail]:
        if Fraction(part.theta_exp) != r:
            raise ValueError("all strata of a solution must share the theta exponent")
        series = rebase_character(ctx, part, c)
        prev = strata_in.get(part.log_power)
        strata_in[part.log_power] = series if prev is None else prev + series
    top = max(strata_in)
    out: dict = {}
    mags: dict = {}
    for k, a in enumerate(op.coeffs):
        if a.is_zero():
            continue
        pref = ctx.q_power(r * k * (k - 1) / 2) * c ** k
        ak = a.shift(r * k)
        ak_abs = _abs_series(ak)
        for a_pow, H in strata_in.items():
            sH = H.sigma(ctx, k)
            term = ak * sH
            term_abs = ak_abs * _abs_series(sH)
            for b in range(a_pow + 1):
                w = math.comb(a_pow, b) * k ** (a_pow - b)
                if w == 0:
                    continue
                piece = term.scale(pref * w)
                piece_abs = term_abs.scale(abs(pref) * w)
                out[b] = piece if b not in out else out[b] + piece
                mags[b] = piece_abs if b not in mags else mags[b] + piece_abs
    for b in range(top + 1):
        out.setdefault(b, PuiseuxSeries.zero())
    order = min(s.truncation_exponent() for s in out.values())
    return Residual(r, c, dict(sorted(out.items(), reverse=True)), mags, order)


@dataclass(frozen=True)
class GrowthReport:
    kind: str  # "convergent", "q_gevrey" or "undetermined"
    estimate: float  # radius for convergent, Gevrey weight otherwise
    weight: float
    slope: float

    def as_dict(self) -> dict:
        return {"class": self.kind, "estimate": self.estimate, "weight": self.weight}


def growth_classify(series: PuiseuxSeries, q, convergent_below: float = 0.05,
                    gevrey_above: float = 0.2, min_terms: int = 8) -> GrowthReport:
    """Fit ``log|f_e| = A + B e + C e^2`` over the tail of the coefficients.

    ``w = C / log|q|``.  ``w < convergent_below`` (including strongly
    negative values, i.e. entire functions) means convergent with radius
    ``exp(-B)`` when ``w`` is near zero; ``w > gevrey_above`` means
    q-Gevrey growth of weight ``w``.
    """
    pts = [(float(Fraction(idx, series.ramification)), math.log(float(abs(c))))
           for idx, c in series.items() if c != 0 and float(abs(c)) > 0.0]
    if len(pts) < min_terms:
        raise SeriesError(f"growth classification needs {min_terms} nonzero coefficients, got {len(pts)}")
    tail = pts[len(pts) // 2:]
    if len(tail) < 3:
        tail = pts[-3:]
    e = np.array([p[0] for p in tail])
    y = np.array([p[1] for p in tail])
    C, B, _ = np.polyfit(e, y, 2)
    w = float(C) / math.log(float(abs(q)))
    if w > gevrey_above:
        return GrowthReport("q_gevrey", w, w, float(B))
    if w < convergent_below:
        if abs(w) < convergent_below:
            # near-linear: refit linearly for the radius
            B1, _ = np.polyfit(e, y, 1)
            radius = math.exp(-float(B1))
        else:
            radius = math.inf
        return GrowthReport("convergent", radius, w, float(B))
    return GrowthReport("undetermined", w, w, float(B))


@dataclass(frozen=True)
class EvalResult:
    value: complex
    truncation_dominated: bool
    tail_estimate: float

    def __complex__(self):
        return complex(self.value)


def _sum_series(ctx, series: PuiseuxSeries, z):
    """Partial sum at ``z`` plus a tail estimate from the last two retained indices."""
    if not series.coeffs:
        return ctx.zero, 0.0
    root = z if series.ramification == 1 else ctx.exp(ctx.log(z) / series.ramification)

    def power(idx):
        return root ** idx if idx >= 0 else 1 / root ** (-idx)

    total = ctx.zero
    for idx, c in series.items():
        total += c * power(idx)
    tail = 0.0
    if not series.is_exact:
        T = int(series.truncation)
        for idx in (T - 2, T - 1):
            c = series.coefficient(idx)
            if c:
                tail += float(abs(c * power(idx)))
    return total, tail


def eval_solution(ctx: NumericContext, sol: SolutionForm, z0, ellq_value=None,
                  strict: bool = False) -> EvalResult:
    """Numeric value ``theta^r e_c sum_a l^a F_a`` at ``z0``.

    The tail estimate is the size of the last two retained terms; when it
    exceeds ``10 tol`` relative to the value the result is flagged (or
    :class:`TruncationDominated` is raised with ``strict=True``).
    """
    z0 = ctx.num(z0)
    if z0 == 0:
        raise ValueError("evaluation point must be nonzero")
    pref = ctx.one
    if sol.theta_exp != 0:
        th = theta(ctx, z0)
        pref = ctx.exp(ctx.num(Fraction(sol.theta_exp)) * ctx.log(th))
    pref = pref * q_character(ctx, z0, sol.character)
    ell = None
    if sol.log_power or sol.tail:
        ell = ctx.num(ellq_value) if ellq_value is not None else q_log(ctx, z0)
    total = ctx.zero
    tail = 0.0
    for a, series in sol.strata():
        s, t = _sum_series(ctx, series, z0)
        w = ell ** a if a else ctx.one
        total += w * s
        tail += float(abs(w)) * t
    value = pref * total
    tail_abs = float(abs(pref)) * tail
    flagged = tail_abs > 10 * ctx.tol * max(float(abs(value)), 1e-300)
    if flagged and strict:
        raise TruncationDominated(f"series tail {tail_abs:.3g} dominates the value {float(abs(value)):.3g}")
    return EvalResult(value, flagged, tail_abs)
