"""Linear q-difference operators ``sum_i a_i(z) S^i`` with ``S f(z) = f(qz)``.

Parsing expands an expression into the normal form using ``S z = q z S``;
coefficients become exact polynomials (finite :class:`PuiseuxSeries`).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .errors import OperatorError, ParseError
from .expr import Add, Mul, Node, Num, Pow, QPow, Sym, parse_expr
from .numctx import NumericContext
from .series import PuiseuxSeries

__all__ = [
    "DifferenceOperator",
    "CompanionSystem",
    "parse",
    "print_operator",
    "normal_form",
    "apply_expr",
    "companion",
    "wronskian_matrix",
]

# normal form: {(S power, z power): coefficient}
NormalForm = dict


def _num_value(ctx: NumericContext, n: Num):
    val = ctx.num(n.re)
    if n.im:
        val = val + ctx.num(n.im) * 1j
    return val


def _nf_mul(ctx, a: NormalForm, b: NormalForm) -> NormalForm:
    out: NormalForm = {}
    for (i, j), x in a.items():
        for (k, m), y in b.items():
            # z^j S^i * z^m S^k = q^(i m) z^(j+m) S^(i+k)
            c = x * y
            if i and m:
                c = c * ctx.q_power(i * m)
            key = (i + k, j + m)
            out[key] = out.get(key, 0) + c
    return out


def _scalar(nf: NormalForm):
    if any(key != (0, 0) for key in nf):
        return None
    return nf.get((0, 0), 0)


def normal_form(ctx: NumericContext, node: Node) -> NormalForm:
    """Expand a tree into ``{(i, j): c}`` meaning ``c z^j S^i``."""
    if isinstance(node, Num):
        return {(0, 0): _num_value(ctx, node)}
    if isinstance(node, QPow):
        return {(0, 0): ctx.q_power(node.exponent)}
    if isinstance(node, Sym):
        return {(0, 1): ctx.one} if node.name == "z" else {(1, 0): ctx.one}
    if isinstance(node, Add):
        out: NormalForm = {}
        for sign, sub in node.items:
            for key, c in normal_form(ctx, sub).items():
                out[key] = out.get(key, 0) + (c if sign > 0 else -c)
        return out
    if isinstance(node, Mul):
        acc: NormalForm = {(0, 0): ctx.one}
        for op, sub in node.items:
            nf = normal_form(ctx, sub)
            if op == "/":
                d = _scalar(nf)
                if d is None:
                    raise OperatorError("division is only allowed by constants")
                if d == 0:
                    raise OperatorError("division by zero in operator expression")
                nf = {(0, 0): 1 / d}
            acc = _nf_mul(ctx, acc, nf)
        return acc
    if isinstance(node, Pow):
        nf = normal_form(ctx, node.base)
        n = node.exponent
        if n < 0:
            d = _scalar(nf)
            if d is None or d == 0:
                raise OperatorError("negative powers are only allowed for nonzero constants")
            return {(0, 0): (1 / d) ** (-n)}
        acc = {(0, 0): ctx.one}
        base = nf
        while n:
            if n & 1:
                acc = _nf_mul(ctx, acc, base)
            n >>= 1
            if n:
                base = _nf_mul(ctx, base, base)
        return acc
    raise TypeError(f"not an expression node: {node!r}")


def apply_expr(ctx: NumericContext, node: Node, f: PuiseuxSeries) -> PuiseuxSeries:
    """Apply the unexpanded tree to a series (independent of :func:`normal_form`)."""
    if isinstance(node, Num):
        return f.scale(_num_value(ctx, node))
    if isinstance(node, QPow):
        return f.scale(ctx.q_power(node.exponent))
    if isinstance(node, Sym):
        return f.shift(1) if node.name == "z" else f.sigma(ctx, 1)
    if isinstance(node, Add):
        out = None
        for sign, sub in node.items:
            g = apply_expr(ctx, sub, f)
            g = g if sign > 0 else -g
            out = g if out is None else out + g
        return out
    if isinstance(node, Mul):
        g = f
        for op, sub in reversed(node.items):
            if op == "/":
                d = _scalar(normal_form(ctx, sub))
                if not d:
                    raise OperatorError("division is only allowed by nonzero constants")
                g = g.scale(1 / d)
            else:
                g = apply_expr(ctx, sub, g)
        return g
    if isinstance(node, Pow):
        if node.exponent < 0:
            d = _scalar(normal_form(ctx, node))
            return f.scale(d)
        g = f
        for _ in range(node.exponent):
            g = apply_expr(ctx, node.base, g)
        return g
    raise TypeError(f"not an expression node: {node!r}")


@dataclass(frozen=True)
class DifferenceOperator:
    """``sum_{i=0}^{n} a_i(z) S^i`` with ``a_0`` and ``a_n`` nonzero."""

    coeffs: tuple
    ctx: NumericContext
    source: str | None = None

    def __post_init__(self):
        coeffs = tuple(c if isinstance(c, PuiseuxSeries) else PuiseuxSeries.from_coeffs(c)
                       for c in self.coeffs)
        for c in coeffs:
            if c.ramification != 1:
                raise OperatorError("operator coefficients must be power series in z")
            if c.coeffs and c.offset < 0:
                raise OperatorError("operator coefficients must not have negative powers of z")
        # drop identically zero top coefficients
        while coeffs and coeffs[-1].is_zero():
            coeffs = coeffs[:-1]
        if not coeffs:
            raise OperatorError("zero operator")
        if len(coeffs) == 1:
            raise OperatorError("operator of order 0 (no shift)")
        if coeffs[0].is_zero():
            raise OperatorError("a_0 vanishes identically; divide the operator by S first")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def from_normal_form(cls, ctx: NumericContext, nf: NormalForm, source=None):
        scale = max((abs(c) for c in nf.values()), default=0)
        if scale == 0:
            raise OperatorError("zero operator")
        for (i, j) in nf:
            if i < 0 or j < 0:
                raise OperatorError("negative powers of z or S are not allowed")
        order = max(i for (i, _), c in nf.items() if abs(c) > ctx.tol * scale) if any(
            abs(c) > ctx.tol * scale for c in nf.values()) else 0
        rows = []
        for i in range(order + 1):
            terms = {j: c for (k, j), c in nf.items() if k == i and abs(c) > ctx.tol * scale}
            deg = max(terms, default=-1)
            rows.append(PuiseuxSeries.from_coeffs([terms.get(j, 0) for j in range(deg + 1)]))
        return cls(tuple(rows), ctx, source)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def n(self) -> int:
        return self.order

    def coefficient(self, i: int, j: int):
        """Coefficient of ``z^j`` in ``a_i`` (0 when absent)."""
        if not 0 <= i <= self.order:
            return 0
        return self.coeffs[i].coefficient(j)

    def valuations(self):
        return [c.valuation(self.ctx.tol) for c in self.coeffs]

    def apply(self, f: PuiseuxSeries) -> PuiseuxSeries:
        out = None
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            term = a * f.sigma(self.ctx, i)
            out = term if out is None else out + term
        return out

    def scale(self, c) -> "DifferenceOperator":
        return DifferenceOperator(tuple(a.scale(c) for a in self.coeffs), self.ctx)

    def __str__(self):
        return print_operator(self)


def parse(text: str, ctx: NumericContext) -> DifferenceOperator:
    """Parse operator text into its normal form."""
    tree = parse_expr(text)
    try:
        nf = normal_form(ctx, tree)
    except OperatorError as exc:
        raise ParseError(str(exc), 0, text) from exc
    return DifferenceOperator.from_normal_form(ctx, nf, text)


def _format_coeff(ctx: NumericContext, c) -> str:
    if c.imag == 0:
        re_ = c.real
        if re_ == int(re_) and abs(re_) < 2 ** 53:
            return str(int(re_))
    return ctx.nstr(c)


def print_operator(op: DifferenceOperator) -> str:
    """Canonical text of the normal form, e.g. ``1 - 2*S + S^2 - z*S^3``.

    Truncated coefficients print their known polynomial part only.
    """
    ctx = op.ctx
    pieces = []
    for i, a in enumerate(op.coeffs):
        for j, c in a.items():
            if c == 0:
                continue
            mono = []
            if j:
                mono.append("z" if j == 1 else f"z^{j}")
            if i:
                mono.append("S" if i == 1 else f"S^{i}")
            sign = 1
            text = _format_coeff(ctx, c)
            if c.imag == 0 and c.real < 0:
                sign = -1
                text = _format_coeff(ctx, -c)
            elif c.imag != 0:
                text = f"({text})"
            if mono and text == "1":
                body = "*".join(mono)
            else:
                body = "*".join([text] + mono)
            pieces.append((sign, body))
    out = []
    for k, (sign, body) in enumerate(pieces):
        if k == 0:
            out.append(f"-{body}" if sign < 0 else body)
        else:
            out.append(f" {'-' if sign < 0 else '+'} {body}")
    return "".join(out)


@dataclass(frozen=True)
class CompanionSystem:
    """``sigma X = A X`` with ``A`` stored as (numerator, denominator) pairs."""

    n: int
    entries: tuple  # rows of (PuiseuxSeries, PuiseuxSeries)

    def evaluate(self, ctx: NumericContext, z):
        return [[num.evaluate(ctx, z) / den.evaluate(ctx, z) for num, den in row]
                for row in self.entries]


def companion(op: DifferenceOperator) -> CompanionSystem:
    n = op.order
    one = PuiseuxSeries.from_coeffs([1])
    zero = PuiseuxSeries.zero()
    an = op.coeffs[n]
    if an.is_zero():
        raise OperatorError("leading coefficient must be invertible")
    rows = []
    for r in range(n - 1):
        rows.append(tuple((one if c == r + 1 else zero, one) for c in range(n)))
    rows.append(tuple((-op.coeffs[k], an) for k in range(n)))
    return CompanionSystem(n, tuple(rows))


def wronskian_matrix(ctx: NumericContext, solutions: Sequence[Callable], z0):
    """Rows ``k = 0..n-1`` hold ``f_j(q^k z0)``; returns (matrix, determinant)."""
    n = len(solutions)
    z0 = ctx.num(z0)
    rows = []
    point = z0
    for _ in range(n):
        rows.append([f(point) for f in solutions])
        point = point * ctx.q
    return rows, ctx.det(rows)
