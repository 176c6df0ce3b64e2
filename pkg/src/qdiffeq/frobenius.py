"""Local solutions at z = 0: Frobenius method plus theta prefactors.

Every solution is ``theta^(t/s) * e_c * sum_a l^a H_a`` where ``l`` is the
q-logarithm kept as a formal symbol and ``H_a`` are series in ``z^(1/s)``.
For a horizontal segment at height ``h`` write ``b_{k,j}`` for the
coefficient of ``z^(h+j)`` in ``a_k`` and

    L^(r)_j(d) = sum_k k^r b_{k,j} c^k q^(k d).

Collecting ``e_c l^b z^(h+M)`` in ``P f`` gives

    sum_{a>=b} C(a,b) sum_j L^(a-b)_j(M-j) H_a[M-j] = 0,

an upper triangular system in the unknowns ``H_a[M]`` whose diagonal is
``L_0(M)``.  When ``c q^M`` is a characteristic root of multiplicity
``mu`` the first ``mu`` strata at ``M`` are free parameters.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .classify import NewtonPolygon, Segment, newton_polygon
from .errors import OperatorError, RecurrenceError, ResonanceError
from .numctx import NumericContext, as_fraction, format_fraction
from .operator import DifferenceOperator
from .series import PuiseuxSeries

__all__ = [
    "CharacteristicData",
    "ResonanceClass",
    "SolutionForm",
    "SolutionBasis",
    "TransformData",
    "characteristic",
    "find_roots",
    "resonance_partition",
    "solve_horizontal",
    "theta_transform",
    "solve",
    "describe_character",
]

DEFAULT_MAX_SHIFT = 64


@dataclass(frozen=True)
class CharacteristicData:
    segment: Segment
    polynomial: tuple  # ascending coefficients after removing x^zero_roots
    roots: tuple  # (value, multiplicity)
    zero_roots: int = 0

    @property
    def degree(self) -> int:
        return len(self.polynomial) - 1

    def evaluate(self, x):
        total = 0
        for c in reversed(self.polynomial):
            total = total * x + c
        return total


@dataclass(frozen=True)
class ResonanceClass:
    base: complex
    shifts: tuple  # sorted, with repetition for multiple roots
    members: tuple = ()  # (value, multiplicity) pairs

    @property
    def size(self) -> int:
        return len(self.shifts)

    def multiplicities(self) -> dict:
        out: dict = {}
        for m in self.shifts:
            out[m] = out.get(m, 0) + 1
        return out


@dataclass(frozen=True)
class SolutionForm:
    """``theta^theta_exp * e_{q,character} * l^log_power * series`` plus lower strata.

    ``series`` lives in ``z^(1/s)`` with ``s = series.ramification``.
    ``tail`` holds the strata with smaller powers of the q-logarithm.
    """

    theta_exp: Fraction
    character: complex
    log_power: int
    series: PuiseuxSeries
    tail: tuple = ()
    label: str = ""

    @property
    def ramification(self) -> int:
        return self.series.ramification

    def strata(self):
        """All ``(log_power, series)`` pairs, highest power first."""
        yield self.log_power, self.series
        for t in self.tail:
            yield t.log_power, t.series


@dataclass(frozen=True)
class TransformData:
    slope: Fraction
    s: int
    t: int
    p: complex
    removed_power: int  # the factor Q^removed_power divided out
    ctx: NumericContext


@dataclass
class SolutionBasis:
    op: DifferenceOperator
    solutions: list
    diagnostics: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.solutions)

    def __iter__(self):
        return iter(self.solutions)

    def __getitem__(self, i):
        return self.solutions[i]


# -- roots -------------------------------------------------------------

def _eps(ctx: NumericContext) -> float:
    return 2.2e-16 if not ctx.high_precision else 10.0 ** (-ctx.precision)


def _poly_eval(coeffs, x, deriv: int = 0):
    """Value of the ``deriv``-th derivative and the matching magnitude scale."""
    total = 0
    scale = 0.0
    ax = abs(x)
    for k in range(len(coeffs) - 1, deriv - 1, -1):
        f = math.perm(k, deriv)
        total = total * x + coeffs[k] * f
        scale = scale * ax + abs(coeffs[k]) * f
    return total, scale


def find_roots(ctx: NumericContext, coeffs) -> list:
    """Nonzero-leading ascending ``coeffs`` -> ``[(root, multiplicity)]``.

    Companion eigenvalues are clustered first: a group of nearby
    eigenvalues becomes a multiple root only when the leading derivatives
    all vanish at its centroid.  Each root then gets a Newton polish (on
    the derivative where a multiple root is simple).
    """
    coeffs = [ctx.num(c) for c in coeffs]
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    d = len(coeffs) - 1
    if d <= 0:
        return []
    if d == 1:
        return [(-coeffs[0] / coeffs[1], 1)]
    lead = coeffs[-1]
    rows = [[ctx.zero] * d for _ in range(d)]
    for i in range(1, d):
        rows[i][i - 1] = ctx.one
    for i in range(d):
        rows[i][d - 1] = -coeffs[i] / lead
    # cluster the raw eigenvalues: their centroid is accurate even when
    # the individual members of a multiple root are not
    cand = [ctx.num(r) for r in ctx.eigvals(rows)]
    thresh = math.sqrt(ctx.tol)
    eps = _eps(ctx)
    unused = list(range(d))
    out = []
    while unused:
        i = unused[0]
        r = cand[i]
        radius = max(10 * eps ** (1.0 / d), thresh) * (1 + abs(r))
        near = sorted((abs(cand[j] - r), j) for j in unused if abs(cand[j] - r) <= radius)
        chosen = [i]
        centre = r
        for m in range(len(near), 1, -1):
            group = [j for _, j in near[:m]]
            c = sum(cand[j] for j in group) / m
            if all(abs(_poly_eval(coeffs, c, k)[0]) <= thresh * _poly_eval(coeffs, c, k)[1]
                   for k in range(m)):
                chosen, centre = group, c
                break
        m = len(chosen)
        # Newton on the (m-1)-th derivative, where the root is simple
        for _ in range(1 if m == 1 else 3):
            v, _ = _poly_eval(coeffs, centre, m - 1)
            dv, _ = _poly_eval(coeffs, centre, m)
            if dv == 0:
                break
            step = v / dv
            if not abs(step) < 0.1 * max(abs(centre), 1e-300):
                break
            centre = centre - step
        out.append((centre, m))
        unused = [j for j in unused if j not in chosen]
    out.sort(key=lambda rm: root_order_key(rm[0]))
    return out


def root_order_key(r):
    """Deterministic order: decreasing modulus, then argument in (-pi, pi]."""
    mag = float(abs(r))
    ang = cmath.phase(complex(r))
    if ang <= -math.pi + 1e-9:
        ang = math.pi
    return (-round(mag, 10), round(ang, 9))


def characteristic(op: DifferenceOperator, segment: Segment) -> CharacteristicData:
    """Characteristic polynomial of a horizontal segment."""
    if not segment.is_horizontal:
        raise OperatorError("characteristic needs a horizontal segment; apply theta_transform first")
    h = segment.height
    if h.denominator != 1:
        raise OperatorError("horizontal segment at a fractional height")
    h = int(h)
    idx = sorted(segment.supporting_indices)
    lo, hi = idx[0], idx[-1]
    poly = [op.coefficient(i, h) for i in range(lo, hi + 1)]
    poly = [op.ctx.num(c) for c in poly]
    roots = find_roots(op.ctx, poly)
    return CharacteristicData(segment, tuple(poly), tuple(roots), lo)


# -- resonance ---------------------------------------------------------

def _q_shift(ctx: NumericContext, u, v, max_shift: int):
    """Integer m with u/v = q^m (within tol), or None; ambiguity raises."""
    ratio = u / v
    lq = math.log(float(abs(ctx.q)))
    m0 = round(math.log(float(abs(ratio))) / lq)
    hits = []
    for m in (m0 - 1, m0, m0 + 1):
        if abs(m) > max_shift:
            continue
        qm = ctx.q_power(m)
        if abs(ratio - qm) < ctx.tol * abs(qm) * 100:
            hits.append(m)
    if len(hits) > 1:
        raise ResonanceError(f"ambiguous q-power ratio between roots (candidates {hits})")
    return hits[0] if hits else None


def resonance_partition(roots, ctx: NumericContext, max_shift: int = DEFAULT_MAX_SHIFT) -> list:
    """Group roots whose ratios are integral powers of q."""
    items = [(ctx.num(r), int(mu)) for r, mu in roots]
    for r, _ in items:
        if r == 0:
            raise ResonanceError("zero root cannot seed a solution")
    classes: list = []  # each: list of (value, mult, shift relative to first)
    for r, mu in items:
        for cls in classes:
            m = _q_shift(ctx, r, cls[0][0], max_shift)
            if m is not None:
                cls.append((r, mu, m))
                break
        else:
            classes.append([(r, mu, 0)])
    out = []
    for cls in classes:
        low = min(m for _, _, m in cls)
        base = next(r for r, _, m in cls if m == low)
        shifts = sorted(m - low for _, mu, m in cls for _ in range(mu))
        members = tuple(sorted(((r, mu) for r, mu, _ in cls), key=lambda t: abs(t[0])))
        out.append(ResonanceClass(base, tuple(shifts), members))
    out.sort(key=lambda c: root_order_key(c.base))
    return out


# -- recurrence --------------------------------------------------------

class _LTable:
    """Cached ``L^(r)_j(d)`` values for one character."""

    def __init__(self, ctx, B, c, K):
        self.ctx = ctx
        self.B = B  # B[k][j]
        self.c = c
        self.K = K
        self.n = len(B) - 1
        self.J = max(len(row) for row in B) - 1
        self.cache: dict = {}

    def row(self, d):
        hit = self.cache.get(d)
        if hit is not None:
            return hit
        ctx = self.ctx
        w = self.c * ctx.q_power(d)
        powers = [ctx.one]
        for _ in range(self.n):
            powers.append(powers[-1] * w)
        # table[j][r] and matching magnitudes for j = 0
        table = []
        for j in range(self.J + 1):
            vals = []
            for r in range(self.K + 2):
                total = 0
                for k in range(self.n + 1):
                    b = self.B[k][j] if j < len(self.B[k]) else 0
                    if b:
                        total = total + (k ** r) * b * powers[k]
                vals.append(total)
            table.append(vals)
        scale = sum(abs(self.B[k][0]) * abs(powers[k]) for k in range(self.n + 1) if self.B[k])
        self.cache[d] = (table, scale)
        return table, scale


def _run(ctx, table: _LTable, K, resonant: dict, seed, length):
    """Forward recurrence; ``seed = (M, a)`` is the unit free parameter."""
    H = [[ctx.zero] * length for _ in range(K + 1)]
    J = table.J
    last = length
    for M in range(length):
        R = []
        for b in range(K + 1):
            acc = 0
            for a in range(b, K + 1):
                cab = math.comb(a, b)
                for j in range(1, min(J, M) + 1):
                    h = H[a][M - j]
                    if h:
                        acc = acc + cab * table.row(M - j)[0][j][a - b] * h
            R.append(-acc)
        row0, scale = table.row(M)
        L = row0[0]
        mu = resonant.get(M, 0)
        if mu == 0:
            if abs(L[0]) <= math.sqrt(ctx.tol) * scale:
                raise RecurrenceError(
                    f"recurrence denominator vanishes at index {M}; "
                    "a characteristic root beyond max_shift is likely")
            for b in range(K, -1, -1):
                acc = R[b]
                for a in range(b + 1, K + 1):
                    acc = acc - math.comb(a, b) * L[a - b] * H[a][M]
                H[b][M] = acc / L[0]
        else:
            for a in range(min(mu, K + 1)):
                H[a][M] = ctx.one if seed == (M, a) else ctx.zero
            for b in range(K - mu, -1, -1):
                acc = R[b]
                for a in range(b + mu + 1, K + 1):
                    acc = acc - math.comb(a, b) * L[a - b] * H[a][M]
                H[b + mu][M] = acc / (math.comb(b + mu, b) * L[mu])
            for b in range(max(K - mu + 1, 0), K + 1):
                mag = sum(abs(x) for x in R) + 1e-300
                if abs(R[b]) > math.sqrt(ctx.tol) * max(mag, scale):
                    raise ResonanceError(f"resonance constraint fails at index {M} (stratum {b})")
        if not ctx.high_precision and not all(_representable(H[a][M]) for a in range(K + 1)):
            last = M
            break
    if last < length:
        H = [col[:last] for col in H]
    return H, last


# double-mode runs stop outside this range, leaving headroom for sigma and
# verification; exact zeros are kept
_DOUBLE_RANGE = (1e-300, 1e150)


def _representable(x) -> bool:
    if x == 0:
        return True
    return cmath.isfinite(x) and _DOUBLE_RANGE[0] < abs(x) < _DOUBLE_RANGE[1]


def _rref(ctx, runs, columns):
    """Row-reduce solution vectors on the functionals ``H_a[M]``."""
    rows = [list(r) for r in runs]
    vec = [[H[a][M] if M < len(H[a]) else ctx.zero for a, M in columns] for H, _ in rows]
    n = len(rows)
    scale = max((abs(x) for v in vec for x in v), default=1.0) or 1.0
    pivot_row = 0
    for col in range(len(columns)):
        if pivot_row >= n:
            break
        best = max(range(pivot_row, n), key=lambda r: abs(vec[r][col]))
        if abs(vec[best][col]) <= math.sqrt(ctx.tol) * scale:
            continue
        vec[pivot_row], vec[best] = vec[best], vec[pivot_row]
        rows[pivot_row], rows[best] = rows[best], rows[pivot_row]
        piv = vec[pivot_row][col]
        vec[pivot_row] = [x / piv for x in vec[pivot_row]]
        H, last = rows[pivot_row]
        rows[pivot_row] = ([[x / piv for x in h] for h in H], last)
        for r in range(n):
            if r == pivot_row:
                continue
            f = vec[r][col]
            if f == 0:
                continue
            vec[r] = [x - f * y for x, y in zip(vec[r], vec[pivot_row])]
            Hr, lr = rows[r]
            Hp, lp = rows[pivot_row]
            m = min(lr, lp)
            rows[r] = ([[x - f * y for x, y in zip(hr[:m], hp[:m])] for hr, hp in zip(Hr, Hp)], m)
        pivot_row += 1
    return rows


def _segment_data(op: DifferenceOperator, h: int, length: int):
    """``B[k][j]`` = coefficient of ``z^(h+j)`` in ``a_k`` for ``j < length``."""
    B = []
    for a in op.coeffs:
        row = []
        for j in range(length):
            idx = h + j
            if idx >= a.truncation:
                break
            row.append(a.coefficient(idx))
        while row and row[-1] == 0:
            row.pop()
        B.append(row)
    J = max(len(r) for r in B)
    for r in B:
        r.extend([0] * (J - len(r)))
    return B


def solve_horizontal(op: DifferenceOperator, char: CharacteristicData, N: int | None = None,
                     max_shift: int = DEFAULT_MAX_SHIFT, theta_exp=Fraction(0), ramification: int = 1,
                     diagnostics: dict | None = None) -> list:
    """Solutions attached to a horizontal segment of ``op``."""
    ctx = op.ctx
    N = ctx.series_truncation if N is None else N
    h = int(char.segment.height)
    classes = resonance_partition(char.roots, ctx, max_shift)
    op_trunc = min(a.truncation for a in op.coeffs)
    out = []
    for cls in classes:
        K = cls.size - 1
        resonant = cls.multiplicities()
        length = max(N, max(resonant) + 1)
        if op_trunc != math.inf:
            length = min(length, int(op_trunc) - h)
        B = _segment_data(op, h, length)
        table = _LTable(ctx, B, ctx.num(cls.base), K)
        seeds = [(M, a) for M in sorted(resonant) for a in range(resonant[M])]
        runs = [_run(ctx, table, K, resonant, seed, length) for seed in seeds]
        if len(runs) > 1:
            columns = [(a, M) for a in range(K, -1, -1) for M in sorted(resonant)]
            runs = _rref(ctx, runs, columns)
        block = []
        for H, last in runs:
            if diagnostics is not None and last < length:
                diagnostics.setdefault("overflow_truncated", []).append(last)
            mags = [max((abs(x) for x in col), default=0) for col in H]
            top = max(mags) if mags else 0
            strata = [a for a in range(K + 1) if mags[a] > ctx.tol * top]
            d = max(strata) if strata else 0
            series = {a: PuiseuxSeries.from_coeffs(H[a], 0, ramification, last) for a in range(d + 1)}
            tail = tuple(SolutionForm(theta_exp, cls.base, a, series[a]) for a in range(d - 1, -1, -1)
                         if a in strata)
            block.append(SolutionForm(theta_exp, cls.base, d, series[d], tail))
        # plain series first, then increasing powers of the q-logarithm
        out.extend(sorted(block, key=lambda sol: sol.log_power))
    return out


# -- theta transform ---------------------------------------------------

def theta_transform(op: DifferenceOperator, slope) -> tuple:
    """Conjugate by ``theta^(t/s)``; returns the operator in ``Q = z^(1/s)``.

    ``a_k(z)`` becomes ``p^(t k(k-1)/2) Q^(t k) a_k(Q^s)`` with shift base
    ``p = q^(1/s)``; the lowest power of ``Q`` is then divided out.
    """
    slope = as_fraction(slope)
    t, s = slope.numerator, slope.denominator
    ctx = op.ctx
    p = ctx.q_power(Fraction(1, s))
    new_ctx = ctx.with_q(p)
    rows = []
    for k, a in enumerate(op.coeffs):
        b = a.substitute_root(s).shift(t * k)
        b = b.scale(new_ctx.q_power(t * k * (k - 1) // 2))
        rows.append(b)
    v = min(r.valuation() for r in rows if not r.is_zero())
    rows = [r.shift(-v) for r in rows]
    new_op = DifferenceOperator(tuple(rows), new_ctx)
    return new_op, TransformData(slope, s, t, p, int(v), new_ctx)


def _find_horizontal(poly: NewtonPolygon, height=0):
    for seg in poly.segments:
        if seg.is_horizontal and seg.height == height:
            return seg
    return None


def solve(op: DifferenceOperator, N: int | None = None, max_shift: int = DEFAULT_MAX_SHIFT) -> SolutionBasis:
    """Local basis at 0: one block of solutions per Newton polygon segment."""
    ctx = op.ctx
    N = ctx.series_truncation if N is None else N
    poly = newton_polygon(op)
    solutions = []
    diag: dict = {"order": op.order, "segments": [], "zero_roots_skipped": 0}
    for seg in poly.segments:
        entry = {"slope": format_fraction(seg.slope), "length": seg.length}
        if seg.is_horizontal:
            char = characteristic(op, seg)
            sols = solve_horizontal(op, char, N, max_shift, Fraction(0), 1, diag)
        else:
            new_op, info = theta_transform(op, seg.slope)
            hseg = _find_horizontal(newton_polygon(new_op), 0)
            if hseg is None:
                raise OperatorError("theta transform did not produce a horizontal segment")
            char = characteristic(new_op, hseg)
            # series in Q need s*N terms to reach z^N
            sols = solve_horizontal(new_op, char, N * info.s, max_shift, seg.slope, info.s, diag)
            entry["p"] = str(info.p)
        if char.zero_roots:
            diag["zero_roots_skipped"] += char.zero_roots
            entry["zero_roots_skipped"] = char.zero_roots
        entry["roots"] = [[complex(r).real, complex(r).imag, m] for r, m in char.roots]
        entry["solutions"] = len(sols)
        for sol in sols:
            label = render_prefactor(ctx, sol)
            solutions.append(SolutionForm(sol.theta_exp, sol.character, sol.log_power,
                                          sol.series, sol.tail, label))
        diag["segments"].append(entry)
    diag["found"] = len(solutions)
    return SolutionBasis(op, solutions, diag)


# -- display -----------------------------------------------------------

def describe_character(ctx: NumericContext, c, ramification: int = 1) -> str:
    """Best-effort exact label such as ``q^(1/4)`` or ``-q^(1/2)``."""
    c = ctx.num(c)
    if c == 0:
        return "0"
    lq = math.log(float(abs(ctx.q)))
    lc = math.log(float(abs(c)))
    rel = math.sqrt(ctx.tol)
    for D in sorted({1, 2, 4, ramification, 2 * ramification, 4 * ramification}):
        e = Fraction(round(lc / lq * D), D)
        qe = ctx.q_power(e)
        u = c / qe
        if abs(abs(u) - 1) > rel:
            continue
        base = "" if e == 0 else ("q" if e == 1 else f"q^({format_fraction(e)})")
        if abs(u - 1) <= rel:
            return base or "1"
        if abs(u + 1) <= rel:
            return f"-{base}" if base else "-1"
        ang = cmath.phase(complex(u)) / (2 * math.pi)
        for n in range(3, 61):
            k = round(ang * n)
            if abs(ang * n - k) < rel * n:
                fr = format_fraction(Fraction(k, n))
                zeta = f"exp(2pi i*{fr})" if k >= 0 else f"exp(-2pi i*{fr[1:]})"
                return f"{zeta}*{base}" if base else zeta
    return ctx.nstr(c, 12)


def render_prefactor(ctx: NumericContext, sol: SolutionForm) -> str:
    parts = []
    if sol.theta_exp != 0:
        parts.append(f"theta^({format_fraction(sol.theta_exp)})")
    lab = describe_character(ctx, sol.character, sol.ramification)
    if lab != "1":
        parts.append(f"e_{{q,{lab}}}")
    if sol.log_power:
        parts.append("l_q" if sol.log_power == 1 else f"l_q^{sol.log_power}")
    parts.append("F(z)" if sol.ramification == 1 else f"F(z^(1/{sol.ramification}))")
    text = "*".join(parts)
    if sol.tail:
        text += " + lower l_q powers"
    return text
