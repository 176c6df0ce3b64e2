"""Theta function, q-Pochhammer symbol, q-characters and the q-logarithm.

All functions take a :class:`~qdiffeq.numctx.NumericContext` and work for
``|q| > 1``.  The theta function is the bilateral series

    theta(z) = sum_{d in Z} q^(-d(d+1)/2) z^d,

whose functional equation ``theta(q z) = z theta(z)`` drives every
prefactor used by the solver.
"""

from __future__ import annotations

import math

from .errors import DivergentProductError, ThetaZeroError
from .numctx import NumericContext

__all__ = [
    "q_pochhammer",
    "theta_cutoff",
    "theta",
    "theta_triple_product",
    "theta_log_derivative",
    "q_log",
    "q_character",
    "theta_zero_index",
]


def q_pochhammer(ctx: NumericContext, a, k, base=None):
    """``(a; base)_k = prod_{i=1}^{k} (1 - a base^(i-1))``.

    ``base`` defaults to ``q``.  ``k`` may be ``math.inf``, in which case
    ``|base| < 1`` is required and the product stops once the factors are
    within the working epsilon of one.
    """
    base = ctx.q if base is None else ctx.num(base)
    a = ctx.num(a)
    result = ctx.one
    if k == math.inf:
        if not abs(base) < 1:
            raise DivergentProductError("infinite q-Pochhammer needs |base| < 1")
        term = a
        eps = min(ctx.tol * 1e-4, 10.0 ** (-ctx.precision - 2))
        while True:
            result *= 1 - term
            if abs(term) < eps:
                return result
            term *= base
    if k < 0:
        raise ValueError("q-Pochhammer length must be >= 0")
    term = a
    for _ in range(int(k)):
        result *= 1 - term
        term *= base
    return result


def theta_cutoff(ctx: NumericContext, z) -> int:
    """Smallest D with |q|^(-D(D-1)/2) * max(|z|, 1/|z|)^D below the working epsilon.

    Bounds both tails of the bilateral sum relative to the d = 0 term.
    """
    aq = math.log(float(abs(ctx.q)))
    az = abs(math.log(float(abs(z))))
    target = math.log(min(ctx.tol * 1e-2, 10.0 ** (-ctx.precision - 2)))
    d = 1
    while -aq * d * (d - 1) / 2 + az * d >= target:
        d += 1
    return d


def _check_nonzero(z):
    if z == 0:
        raise ValueError("theta is not defined at z = 0")


def theta_zero_index(ctx: NumericContext, z, bound: int | None = None):
    """Return k if ``z`` is within tolerance of the theta zero ``-q^k``."""
    z = ctx.num(z)
    _check_nonzero(z)
    k0 = round(math.log(float(abs(z))) / math.log(float(abs(ctx.q))))
    bound = theta_cutoff(ctx, z) if bound is None else bound
    for k in (k0 - 1, k0, k0 + 1):
        if abs(k) > bound + 1:
            continue
        qk = ctx.q_power(k)
        if abs(z + qk) < ctx.tol * abs(qk) * 10:
            return k
    return None


def _theta_sums(ctx: NumericContext, z):
    """Bilateral sums (theta, z*theta') with cutoff ``theta_cutoff``."""
    z = ctx.num(z)
    _check_nonzero(z)
    D = theta_cutoff(ctx, z)
    qinv = 1 / ctx.q
    total = ctx.one
    deriv = ctx.zero
    # d > 0: term_d = term_{d-1} * z * q^(-d)
    term = ctx.one
    step = qinv
    for d in range(1, D + 1):
        term = term * z * step
        step *= qinv
        total += term
        deriv += d * term
    # d < 0: term_{-e} = term_{-(e-1)} * z^(-1) * q^(-(e-1))
    term = ctx.one
    zinv = 1 / z
    step = ctx.one
    for e in range(1, D + 1):
        term = term * zinv * step
        step *= qinv
        total += term
        deriv -= e * term
    return total, deriv


def theta(ctx: NumericContext, z):
    """Jacobi theta by its bilateral series; ``z = 0`` is an error."""
    return _theta_sums(ctx, z)[0]


def theta_triple_product(ctx: NumericContext, z):
    """Theta via the product form
    ``(1/q; 1/q)_inf (-z/q; 1/q)_inf (-1/z; 1/q)_inf``."""
    z = ctx.num(z)
    _check_nonzero(z)
    qi = 1 / ctx.q
    inf = math.inf
    return (q_pochhammer(ctx, qi, inf, qi)
            * q_pochhammer(ctx, -qi * z, inf, qi)
            * q_pochhammer(ctx, -1 / z, inf, qi))


def theta_log_derivative(ctx: NumericContext, z):
    """The q-logarithm ``z theta'(z) / theta(z)``, satisfying
    ``l(qz) = l(z) + 1``.  Raises :class:`ThetaZeroError` on ``-q^k``."""
    z = ctx.num(z)
    k = theta_zero_index(ctx, z)
    if k is not None:
        raise ThetaZeroError(f"z is the theta zero -q^{k}")
    th, zdth = _theta_sums(ctx, z)
    if th == 0:
        raise ThetaZeroError("theta vanishes at z")
    return zdth / th


q_log = theta_log_derivative


def q_character(ctx: NumericContext, z, lam):
    """``e_{q,lam}(z) = theta(z) / theta(z / lam)``; ``e(qz) = lam e(z)``."""
    z = ctx.num(z)
    lam = ctx.num(lam)
    if lam == 0:
        raise ValueError("q-character needs lam != 0")
    _check_nonzero(z)
    if lam == 1:
        return ctx.one
    for w in (z, z / lam):
        k = theta_zero_index(ctx, w)
        if k is not None:
            raise ThetaZeroError(f"q-character pole/zero collision at -q^{k}")
    return theta(ctx, z) / theta(ctx, z / lam)
