"""JSON encoding of solutions, residual reports and contexts.

Numbers are written as ``[re, im]`` pairs.  In double mode these are JSON
floats (which round-trip exactly); in high precision they are decimal
strings with enough digits to recover the binary value, so a solution fed
back through :func:`solution_from_json` reproduces the same residual.
"""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath
from mpmath import libmp

from .frobenius import SolutionForm, describe_character
from .numctx import NumericContext, format_fraction
from .series import PuiseuxSeries

__all__ = [
    "number_to_json",
    "number_from_json",
    "solution_to_json",
    "solution_from_json",
    "basis_to_json",
    "context_to_json",
    "context_from_json",
    "residual_report",
]


def _real_to_json(ctx: NumericContext, x):
    if ctx.high_precision:
        x = ctx.mp.mpf(x)
        return libmp.to_str(x._mpf_, libmp.repr_dps(ctx.mp.prec))
    return float(x)


def number_to_json(ctx: NumericContext, x) -> list:
    x = ctx.num(x)
    return [_real_to_json(ctx, x.real), _real_to_json(ctx, x.imag)]


def number_from_json(ctx: NumericContext, value):
    if isinstance(value, dict):
        value = [value.get("re", 0), value.get("im", 0)]
    if isinstance(value, (list, tuple)):
        re_, im_ = value
        if ctx.high_precision:
            mp = ctx.mp
            return mp.mpc(mp.mpf(re_), mp.mpf(im_))
        return complex(float(re_), float(im_))
    return ctx.num(value)


def _series_to_json(ctx, series: PuiseuxSeries) -> dict:
    return {
        "offset": series.offset,
        "truncation": "inf" if series.is_exact else int(series.truncation),
        "coefficients": [number_to_json(ctx, c) for c in series.coeffs],
    }


def _series_from_json(ctx, data: dict, ramification: int) -> PuiseuxSeries:
    trunc = data.get("truncation", "inf")
    trunc = math.inf if trunc in ("inf", None) else int(trunc)
    coeffs = [number_from_json(ctx, c) for c in data.get("coefficients", [])]
    return PuiseuxSeries.from_coeffs(coeffs, int(data.get("offset", 0)), ramification, trunc)


def solution_to_json(ctx: NumericContext, sol: SolutionForm) -> dict:
    """Schema: theta_exp "t/s", character {re, im}, log_power, ramification,
    coefficients, tail (lower q-log strata in the same shape)."""
    char = ctx.num(sol.character)
    out = {
        "theta_exp": format_fraction(Fraction(sol.theta_exp)),
        "character": dict(zip(("re", "im"), number_to_json(ctx, char))),
        "character_label": describe_character(ctx, char, sol.ramification),
        "log_power": sol.log_power,
        "ramification": sol.ramification,
    }
    out.update(_series_to_json(ctx, sol.series))
    out["tail"] = [solution_to_json(ctx, t) for t in sol.tail]
    if sol.label:
        out["label"] = sol.label
    return out


def solution_from_json(ctx: NumericContext, data: dict) -> SolutionForm:
    s = int(data.get("ramification", 1))
    theta_exp = Fraction(str(data.get("theta_exp", "0")))
    char = data.get("character", {"re": 1, "im": 0})
    if isinstance(char, str):
        # "q^{m/s}" form
        exp = char.strip().removeprefix("q^").strip("{}()")
        char = ctx.q_power(Fraction(exp))
    else:
        char = number_from_json(ctx, char)
    tail = tuple(solution_from_json(ctx, t) for t in data.get("tail", []))
    return SolutionForm(theta_exp, char, int(data.get("log_power", 0)),
                        _series_from_json(ctx, data, s), tail, data.get("label", ""))


def context_to_json(ctx: NumericContext) -> dict:
    return {
        "q": number_to_json(ctx, ctx.q),
        "precision": ctx.precision,
        "tol": ctx.tol,
        "truncation": ctx.series_truncation,
    }


def context_from_json(data: dict) -> NumericContext:
    precision = int(data.get("precision", 50))
    q = data["q"]
    if isinstance(q, (list, tuple)):
        if precision > 16:
            with mpmath.workdps(precision + 5):
                q = mpmath.mpc(mpmath.mpf(q[0]), mpmath.mpf(q[1]))
        else:
            q = complex(float(q[0]), float(q[1]))
    return NumericContext(q, precision, data.get("tol"), int(data.get("truncation", 30)))


def basis_to_json(basis, rendered=None) -> dict:
    ctx = basis.op.ctx
    sols = []
    for k, sol in enumerate(basis):
        d = solution_to_json(ctx, sol)
        if rendered is not None:
            d["prefactor"] = rendered[k]
        sols.append(d)
    return {
        "operator": str(basis.op),
        "context": context_to_json(ctx),
        "solutions": sols,
        "diagnostics": basis.diagnostics,
    }


def residual_report(index: int, residual, growth=None) -> dict:
    order = residual.guaranteed_order
    out = {
        "solution_index": index,
        "residual_max_abs": residual.max_abs,
        "residual_relative": residual.relative,
        "guaranteed_order": "inf" if order == math.inf else format_fraction(Fraction(order)),
    }
    if growth is not None:
        out["growth"] = growth
    return out
