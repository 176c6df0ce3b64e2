"""Truncated Puiseux series ``sum_k c_k z^(k/s)`` with honest truncation.

A series stores the coefficients of ``z^(k/s)`` for ``offset <= k <
offset + len(coeffs)``; indices in ``[offset + len(coeffs), truncation)``
are known to vanish and indices ``>= truncation`` are unknown.  Exact
(finite) series carry ``truncation = math.inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .errors import SeriesError

__all__ = ["PuiseuxSeries", "series_arith", "sigma_q", "valuation", "substitute_root"]

INF = math.inf


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


@dataclass(frozen=True)
class PuiseuxSeries:
    coeffs: tuple = ()
    offset: int = 0
    ramification: int = 1
    truncation: int | float = INF

    def __post_init__(self):
        if self.ramification < 1:
            raise SeriesError("ramification must be >= 1")
        coeffs = tuple(self.coeffs)
        offset = self.offset
        # exact zeros are structural, so strip them from both ends
        lead = 0
        while lead < len(coeffs) and coeffs[lead] == 0:
            lead += 1
        coeffs = coeffs[lead:]
        offset += lead
        end = len(coeffs)
        while end and coeffs[end - 1] == 0:
            end -= 1
        coeffs = coeffs[:end]
        if self.truncation != INF:
            keep = max(0, int(self.truncation) - offset)
            coeffs = coeffs[:keep]
        if not coeffs:
            offset = 0
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "offset", offset)

    # -- constructors --------------------------------------------------
    @classmethod
    def from_coeffs(cls, coeffs: Iterable, offset: int = 0, ramification: int = 1,
                    truncation: int | float = INF) -> "PuiseuxSeries":
        return cls(tuple(coeffs), offset, ramification, truncation)

    @classmethod
    def zero(cls, ramification: int = 1, truncation: int | float = INF) -> "PuiseuxSeries":
        return cls((), 0, ramification, truncation)

    @classmethod
    def monomial(cls, coeff, exponent=0, truncation: int | float = INF) -> "PuiseuxSeries":
        """``coeff * z^exponent``; ``truncation`` is in units of the exponent's denominator."""
        e = Fraction(exponent)
        return cls((coeff,), e.numerator, e.denominator, truncation)

    # -- basic queries -------------------------------------------------
    @property
    def s(self) -> int:
        return self.ramification

    @property
    def is_exact(self) -> bool:
        return self.truncation == INF

    def is_zero(self) -> bool:
        return not self.coeffs

    def __len__(self):
        return len(self.coeffs)

    def items(self):
        """Pairs ``(index, coefficient)`` of stored coefficients."""
        return ((self.offset + k, c) for k, c in enumerate(self.coeffs))

    def exponent(self, index: int) -> Fraction:
        return Fraction(index, self.ramification)

    def coefficient(self, index: int):
        """Coefficient of ``z^(index/s)``; raises past the truncation."""
        if index >= self.truncation:
            raise SeriesError(f"coefficient {index} lies beyond the truncation {self.truncation}")
        k = index - self.offset
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return 0

    def coefficient_at(self, exponent):
        e = Fraction(exponent) * self.ramification
        if e.denominator != 1:
            return 0
        return self.coefficient(e.numerator)

    def truncation_exponent(self):
        """Truncation as an exponent of z (``inf`` for exact series)."""
        if self.is_exact:
            return INF
        return Fraction(int(self.truncation), self.ramification)

    def max_abs(self) -> float:
        return max((abs(c) for c in self.coeffs), default=0.0)

    def valuation(self, tol: float = 0.0):
        """First exponent whose coefficient exceeds ``tol * max|c|``."""
        if not self.coeffs:
            return INF
        bound = tol * self.max_abs()
        for idx, c in self.items():
            if abs(c) > bound:
                return Fraction(idx, self.ramification)
        return INF

    # -- ramification --------------------------------------------------
    def with_ramification(self, s: int) -> "PuiseuxSeries":
        """Re-express in the variable ``z^(1/s)``; ``s`` must be a multiple of ours."""
        if s == self.ramification:
            return self
        if s % self.ramification:
            raise SeriesError(f"ramification {s} is not a multiple of {self.ramification}")
        f = s // self.ramification
        coeffs = []
        for c in self.coeffs:
            coeffs.append(c)
            coeffs.extend([0] * (f - 1))
        if coeffs:
            coeffs = coeffs[: len(coeffs) - (f - 1)]
        trunc = self.truncation if self.is_exact else int(self.truncation) * f
        return PuiseuxSeries(tuple(coeffs), self.offset * f, s, trunc)

    def reduce_ramification(self) -> "PuiseuxSeries":
        """Smallest ramification that represents the same exponents."""
        g = self.ramification
        for idx, c in self.items():
            if c == 0:
                continue
            g = math.gcd(g, idx)
            if g == 1:
                return self
        if not self.is_exact:
            g = math.gcd(g, int(self.truncation))
        if g <= 1:
            return self
        coeffs = [self.coefficient(self.offset + k * g) for k in range((len(self.coeffs) - 1) // g + 1)] if self.coeffs else []
        trunc = self.truncation if self.is_exact else int(self.truncation) // g
        return PuiseuxSeries(tuple(coeffs), self.offset // g, self.ramification // g, trunc)

    def substitute_root(self, s_new: int) -> "PuiseuxSeries":
        """Read ``a(z)`` (with ``s = 1``) as ``a(Q^s_new)`` in ``Q = z^(1/s_new)``.

        The result has ramification 1 in the variable ``Q``.
        """
        if self.ramification != 1:
            raise SeriesError("substitute_root needs an integral power series")
        if s_new < 1:
            raise SeriesError("s_new must be >= 1")
        r = self.with_ramification(s_new)
        return PuiseuxSeries(r.coeffs, r.offset, 1, r.truncation)

    def as_ramified(self, s: int) -> "PuiseuxSeries":
        """Inverse of :meth:`substitute_root`: a series in ``Q`` becomes one in ``z^(1/s)``."""
        if self.ramification != 1:
            raise SeriesError("as_ramified needs a series in the variable Q")
        return PuiseuxSeries(self.coeffs, self.offset, s, self.truncation)

    # -- arithmetic ----------------------------------------------------
    def _align(self, other: "PuiseuxSeries"):
        s = _lcm(self.ramification, other.ramification)
        return self.with_ramification(s), other.with_ramification(s), s

    def __add__(self, other):
        if not isinstance(other, PuiseuxSeries):
            other = PuiseuxSeries.monomial(other, 0)
        a, b, s = self._align(other)
        trunc = min(a.truncation, b.truncation)
        if not a.coeffs:
            return PuiseuxSeries(b.coeffs, b.offset, s, trunc)
        if not b.coeffs:
            return PuiseuxSeries(a.coeffs, a.offset, s, trunc)
        lo = min(a.offset, b.offset)
        hi = max(a.offset + len(a.coeffs), b.offset + len(b.coeffs))
        if trunc != INF:
            hi = min(hi, int(trunc))
        out = [0] * max(0, hi - lo)
        for idx, c in a.items():
            if idx < hi:
                out[idx - lo] = out[idx - lo] + c
        for idx, c in b.items():
            if idx < hi:
                out[idx - lo] = out[idx - lo] + c
        return PuiseuxSeries(tuple(out), lo, s, trunc)

    __radd__ = __add__

    def __neg__(self):
        return PuiseuxSeries(tuple(-c for c in self.coeffs), self.offset, self.ramification, self.truncation)

    def __sub__(self, other):
        if not isinstance(other, PuiseuxSeries):
            other = PuiseuxSeries.monomial(other, 0)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "PuiseuxSeries":
        return PuiseuxSeries(tuple(c * v for v in self.coeffs), self.offset, self.ramification, self.truncation)

    def __mul__(self, other):
        if not isinstance(other, PuiseuxSeries):
            return self.scale(other)
        a, b, s = self._align(other)
        a_low = a.offset if a.coeffs else a.truncation
        b_low = b.offset if b.coeffs else b.truncation
        trunc = min(a.truncation + b_low, b.truncation + a_low)
        if trunc != INF:
            trunc = int(trunc)
        if not a.coeffs or not b.coeffs:
            return PuiseuxSeries.zero(s, trunc)
        lo = a.offset + b.offset
        n = len(a.coeffs) + len(b.coeffs) - 1
        if trunc != INF:
            n = min(n, max(0, trunc - lo))
        out = [0] * n
        for i, x in enumerate(a.coeffs):
            if i >= n:
                break
            for j, y in enumerate(b.coeffs):
                k = i + j
                if k >= n:
                    break
                out[k] = out[k] + x * y
        return PuiseuxSeries(tuple(out), lo, s, trunc)

    def __rmul__(self, other):
        return self.scale(other)

    def shift(self, exponent) -> "PuiseuxSeries":
        """Multiply by ``z^exponent`` (rational)."""
        e = Fraction(exponent)
        s = _lcm(self.ramification, e.denominator)
        a = self.with_ramification(s)
        k = int(e * s)
        trunc = a.truncation if a.is_exact else int(a.truncation) + k
        return PuiseuxSeries(a.coeffs, a.offset + k, s, trunc)

    def truncate(self, index: int) -> "PuiseuxSeries":
        """Forget coefficients at indices ``>= index`` (own ramification units)."""
        return PuiseuxSeries(self.coeffs, self.offset, self.ramification, min(self.truncation, index))

    def sigma(self, ctx, k: int = 1) -> "PuiseuxSeries":
        """``f(z) -> f(q^k z)``: multiplies ``z^(m/s)`` by ``q^(k m / s)``."""
        if k == 0 or not self.coeffs:
            return self
        unit = ctx.q_power(Fraction(k, self.ramification))
        inv = 1 / unit
        out = []
        for idx, c in self.items():
            if idx >= 0:
                out.append(c * unit ** idx)
            else:
                out.append(c * inv ** (-idx))
        return PuiseuxSeries(tuple(out), self.offset, self.ramification, self.truncation)

    def evaluate(self, ctx, z):
        """Sum of the stored terms at ``z`` using the principal ``z^(1/s)``."""
        if not self.coeffs:
            return ctx.zero
        z = ctx.num(z)
        root = z if self.ramification == 1 else ctx.exp(ctx.log(z) / self.ramification)
        total = ctx.zero
        # Horner in the root variable, then the offset power
        for c in reversed(self.coeffs):
            total = total * root + c
        if self.offset:
            total = total * (root ** self.offset if self.offset > 0 else 1 / root ** (-self.offset))
        return total

    def map(self, fn) -> "PuiseuxSeries":
        return PuiseuxSeries(tuple(fn(c) for c in self.coeffs), self.offset, self.ramification, self.truncation)

    def allclose(self, other: "PuiseuxSeries", tol: float) -> bool:
        """Coefficient-wise comparison on the common known range, relative to the max coefficient."""
        d = self - other
        scale = max(self.max_abs(), other.max_abs(), 1e-300)
        return d.max_abs() <= tol * scale

    def __repr__(self):
        body = " + ".join(f"({c})*z^({Fraction(i, self.ramification)})" for i, c in self.items()) or "0"
        if not self.is_exact:
            body += f" + O(z^({self.truncation_exponent()}))"
        return f"PuiseuxSeries({body})"


def series_arith(a: PuiseuxSeries, b: PuiseuxSeries, op: str) -> PuiseuxSeries:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown series operation {op!r}")


def sigma_q(ctx, a: PuiseuxSeries, k: int = 1) -> PuiseuxSeries:
    return a.sigma(ctx, k)


def valuation(a: PuiseuxSeries, tol: float = 0.0):
    return a.valuation(tol)


def substitute_root(a: PuiseuxSeries, s_new: int) -> PuiseuxSeries:
    return a.substitute_root(s_new)
