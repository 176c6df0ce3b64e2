"""Numeric field for the solver: complex numbers at a chosen precision.

Two back ends are supported behind one interface:

* double mode (``precision <= 16``): plain Python ``complex`` plus numpy;
* high precision: a private :class:`mpmath.MPContext` so that several
  contexts with different precisions can coexist in one process.

Exponents and slopes are exact :class:`fractions.Fraction` values.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import mpmath
import numpy as np

from .errors import InvalidConfiguration, ParseError

__all__ = [
    "NumericContext",
    "Fraction",
    "as_fraction",
    "format_fraction",
    "parse_complex",
    "rational_arith",
]

DOUBLE_PRECISION = 16
DEFAULT_PRECISION = 50


def as_fraction(value) -> Fraction:
    """Coerce ints, Fractions and ``"t/s"`` strings to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip().replace("−", "-"))
    raise TypeError(f"cannot interpret {value!r} as a rational")


def format_fraction(value: Fraction) -> str:
    value = as_fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def rational_arith(a, b, op: str):
    """Exact rational arithmetic; ``cmp`` returns -1, 0 or 1."""
    a, b = as_fraction(a), as_fraction(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if b == 0:
            raise ZeroDivisionError("rational division by zero")
        return a / b
    if op == "cmp":
        return (a > b) - (a < b)
    raise ValueError(f"unknown rational operation {op!r}")


_POLAR = re.compile(r"^polar\((?P<r>[^,]+),(?P<t>[^)]+)\)$")
_PI_ANGLE = re.compile(r"^(?P<c>[-+]?\d*(?:\.\d*)?)\*?pi(?:/(?P<d>\d+))?$")


def parse_complex(text: str, ctx: "NumericContext | None" = None, precision: int | None = None):
    """Parse a complex literal.

    Accepted forms: ``2``, ``1.5``, ``3/2``, ``1+2i`` (or ``j``), ``-0.5i``
    and ``polar(r, theta)`` where ``theta`` may be written ``pi/7`` or
    ``2*pi/7``.  The value is returned in the number type of ``ctx`` (or
    at ``precision`` digits, or as a Python complex).
    """
    mp = _mp_for(ctx, precision)
    s = str(text).strip().replace(" ", "").replace("−", "-").lower()
    if not s:
        raise ParseError("empty complex literal", 0, str(text))

    def real(tok):
        if "/" in tok:
            num, den = tok.split("/", 1)
            return real(num) / real(den)
        return mp.mpf(tok) if mp is not None else float(tok)

    m = _POLAR.match(s)
    if m:
        r = real(m.group("r"))
        t = m.group("t")
        pm = _PI_ANGLE.match(t)
        if pm:
            c = pm.group("c")
            coeff = real(c if c not in ("", "+", "-") else c + "1")
            den = int(pm.group("d") or 1)
            if mp is not None:
                return r * mp.expjpi(coeff / den)
            return r * cmath.exp(1j * math.pi * coeff / den)
        theta = real(t)
        return r * (mp.expj(theta) if mp is not None else cmath.exp(1j * theta))
    if "/" in s and not s.endswith(("i", "j")):
        try:
            val = real(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"bad rational literal {text!r}", 0, str(text)) from exc
        return mp.mpc(val) if mp is not None else complex(val)
    try:
        re_tok, im_tok = _split_complex(s)
        re_part = real(re_tok) if re_tok else 0
        im_part = real(im_tok) if im_tok else 0
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad complex literal {text!r}", 0, str(text)) from exc
    if mp is not None:
        return mp.mpc(re_part, im_part)
    return complex(re_part, im_part)


def _split_complex(s: str):
    """Split ``a+bi`` into ``("a", "+b")``; either part may be empty."""
    if not s.endswith(("i", "j")):
        return s, ""
    body = s[:-1]
    cut = None
    for k in range(len(body) - 1, 0, -1):
        if body[k] in "+-" and body[k - 1] != "e":
            cut = k
            break
    re_tok, im_tok = (body[:cut], body[cut:]) if cut is not None else ("", body)
    if im_tok in ("", "+", "-"):
        im_tok += "1"
    return re_tok, im_tok


def _mp_for(ctx, precision):
    if ctx is not None:
        return ctx.mp
    if precision is not None and precision > DOUBLE_PRECISION:
        mp = mpmath.MPContext()
        mp.dps = precision
        return mp
    return None


@dataclass(frozen=True)
class NumericContext:
    """Immutable numeric environment: the parameter ``q`` and tolerances.

    Parameters
    ----------
    q : complex, str or number
        The shift parameter.  Must satisfy ``|q| > 1``.  Strings are parsed
        with :func:`parse_complex` at the working precision.
    precision : int
        Significant decimal digits.  ``<= 16`` selects double mode.
    tol : float, optional
        Comparison tolerance; defaults to ``1e-10`` in double mode and
        ``1e-30`` at 50 digits (scaled down for lower precisions).
    series_truncation : int
        Default number of series coefficients computed by the solver.
    """

    q: Any
    precision: int = DEFAULT_PRECISION
    tol: float | None = None
    series_truncation: int = 30
    _mp: Any = field(default=None, compare=False, repr=False, hash=False)
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if self.precision < 1:
            raise InvalidConfiguration("precision must be positive")
        if self.series_truncation < 1:
            raise InvalidConfiguration("series truncation must be positive")
        mp = None
        if self.precision > DOUBLE_PRECISION:
            mp = mpmath.MPContext()
            mp.dps = self.precision
        object.__setattr__(self, "_mp", mp)
        q = self.q
        if isinstance(q, str):
            q = parse_complex(q, self)
        q = self.num(q)
        object.__setattr__(self, "q", q)
        tol = self.tol
        if tol is None:
            if mp is None:
                tol = 1e-10
            else:
                tol = 10.0 ** (-min(30, (3 * self.precision) // 5))
        if not tol > 0:
            raise InvalidConfiguration("tol must be positive")
        object.__setattr__(self, "tol", float(tol))
        if not abs(q) > 1:
            raise InvalidConfiguration(f"|q| must exceed 1 (got |q| = {float(abs(q)):.6g})")

    # -- number type -------------------------------------------------
    @property
    def mp(self):
        """The private mpmath context, or ``None`` in double mode."""
        return self._mp

    @property
    def high_precision(self) -> bool:
        return self._mp is not None

    def num(self, x):
        """Convert ``x`` (int, Fraction, float, complex, mpc, str) to the working type."""
        mp = self._mp
        if isinstance(x, str):
            return parse_complex(x, self)
        if isinstance(x, Fraction):
            if mp is None:
                return complex(x.numerator / x.denominator)
            return mp.mpc(mp.mpf(x.numerator) / x.denominator)
        if mp is None:
            return complex(x)
        if isinstance(x, (mpmath.mpc, mpmath.mpf)) or hasattr(x, "_mpc_") or hasattr(x, "_mpf_"):
            return mp.mpc(x)
        if isinstance(x, (np.complexfloating, np.floating, np.integer)):
            x = complex(x)
        return mp.mpc(x)

    @property
    def zero(self):
        return self.num(0)

    @property
    def one(self):
        return self.num(1)

    def exp(self, x):
        return self._mp.exp(x) if self._mp is not None else cmath.exp(x)

    def log(self, x):
        return self._mp.log(x) if self._mp is not None else cmath.log(x)

    @property
    def pi(self):
        return self._mp.pi if self._mp is not None else math.pi

    def to_complex(self, x) -> complex:
        return complex(x)

    def nstr(self, x, digits: int | None = None) -> str:
        """Compact string for a number, enough digits to round-trip."""
        explicit = digits is not None
        if digits is None:
            digits = self.precision if self._mp is not None else 17
        if self._mp is not None:
            x = self._mp.mpc(x)
            re_s = self._mp.nstr(x.real, digits)
            im_s = self._mp.nstr(x.imag, digits)
        else:
            x = complex(x)
            re_s = f"{x.real:.{digits}g}" if explicit else repr(x.real)
            im_s = f"{x.imag:.{digits}g}" if explicit else repr(x.imag)
        return _join_complex(re_s, im_s, x.imag == 0)

    # -- q powers ----------------------------------------------------
    def q_power(self, e) -> Any:
        """Principal-branch ``q**e`` for a rational exponent.

        All fractional powers are computed as ``exp(e * Log q)``, so
        ``q_power(a) * q_power(b) == q_power(a + b)`` up to rounding for
        every pair of rationals (one consistent branch).
        """
        e = as_fraction(e)
        cached = self._cache.get(("qpow", e))
        if cached is not None:
            return cached
        if e.denominator == 1:
            n = e.numerator
            val = self.q ** n if n >= 0 else self.one / self.q ** (-n)
        else:
            val = self.exp(self.num(e) * self.log(self.q))
        self._cache[("qpow", e)] = val
        return val

    def root_of_q(self, s: int):
        """The fixed base unit ``q**(1/s)``."""
        return self.q_power(Fraction(1, s))

    def with_q(self, q) -> "NumericContext":
        """Same precision and tolerances, different shift parameter."""
        return NumericContext(q, self.precision, self.tol, self.series_truncation)

    # -- comparisons -------------------------------------------------
    def is_zero(self, x, scale=1.0) -> bool:
        return abs(x) <= self.tol * max(abs(scale), 1e-300)

    def close(self, a, b, rel: float | None = None) -> bool:
        rel = self.tol if rel is None else rel
        return abs(a - b) <= rel * max(abs(a), abs(b), 1e-300)

    # -- linear algebra ---------------------------------------------
    def eigvals(self, rows):
        """Eigenvalues of a square matrix given as a list of rows."""
        if self._mp is None:
            arr = np.array([[complex(v) for v in row] for row in rows], dtype=complex)
            return [complex(v) for v in np.linalg.eigvals(arr)]
        mat = self._mp.matrix([[self._mp.mpc(v) for v in row] for row in rows])
        vals = self._mp.eig(mat, left=False, right=False)
        return list(vals)

    def det(self, rows):
        if self._mp is None:
            arr = np.array([[complex(v) for v in row] for row in rows], dtype=complex)
            return complex(np.linalg.det(arr))
        return self._mp.det(self._mp.matrix(rows))


def _join_complex(re_s: str, im_s: str, real: bool) -> str:
    if real:
        return re_s
    if re_s in ("0.0", "0", "-0.0"):
        return f"{im_s}i"
    sign = "" if im_s.startswith("-") else "+"
    return f"{re_s}{sign}{im_s}i"
