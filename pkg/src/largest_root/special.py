"""Log-domain scalar special functions.

Factorials, Pochhammer symbols, binomials and integer-parameter Jacobi
polynomials, all returned as logarithms (or sign + log magnitude) so that
products such as ``(n + p + i - 2)!`` can be combined before anything is
exponentiated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from numbers import Integral

import numpy as np
from scipy.special import gammaln, logsumexp

from .exceptions import DomainError

__all__ = [
    "LogScaledReal",
    "ln_factorial",
    "ln_binomial",
    "pochhammer",
    "jacobi_poly",
    "log_jacobi_inverse_arg",
    "signed_logsumexp",
    "jacobi_sum_coeffs",
]


@dataclass(frozen=True)
class LogScaledReal:
    """A real number stored as ``sign * exp(log_abs)``.

    ``sign`` is one of -1, 0, +1; ``log_abs`` is ignored when ``sign == 0``.
    """

    sign: int
    log_abs: float = 0.0

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise DomainError(f"sign must be -1, 0 or 1, got {self.sign!r}")
        if self.sign == 0:
            object.__setattr__(self, "log_abs", -math.inf)

    @classmethod
    def from_float(cls, x: float) -> LogScaledReal:
        if x == 0:
            return cls(0)
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_abs)

    def __mul__(self, other):
        if not isinstance(other, LogScaledReal):
            other = LogScaledReal.from_float(float(other))
        s = self.sign * other.sign
        if s == 0:
            return LogScaledReal(0)
        return LogScaledReal(s, self.log_abs + other.log_abs)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, LogScaledReal):
            other = LogScaledReal.from_float(float(other))
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero LogScaledReal")
        if self.sign == 0:
            return LogScaledReal(0)
        return LogScaledReal(self.sign * other.sign, self.log_abs - other.log_abs)

    def __neg__(self):
        return LogScaledReal(-self.sign, self.log_abs)

    def __add__(self, other):
        if not isinstance(other, LogScaledReal):
            other = LogScaledReal.from_float(float(other))
        s, l = signed_logsumexp([self.log_abs, other.log_abs], [self.sign, other.sign])
        return LogScaledReal(int(s), float(l))

    __radd__ = __add__


LogScaledReal.zero = LogScaledReal(0)
LogScaledReal.one = LogScaledReal(1, 0.0)


def signed_logsumexp(log_abs, signs, axis=None):
    """Sign-aware ``log(sum(sign * exp(log_abs)))``.

    Returns ``(sign, log_abs)`` of the sum. Positive and negative parts are
    accumulated separately with ``logsumexp`` and combined once, which is
    exact up to the final subtraction.
    """
    log_abs = np.asarray(log_abs, dtype=float)
    signs = np.asarray(signs)
    neg_inf = np.full_like(log_abs, -np.inf)
    lp = logsumexp(np.where(signs > 0, log_abs, neg_inf), axis=axis)
    ln = logsumexp(np.where(signs < 0, log_abs, neg_inf), axis=axis)
    lp = np.asarray(lp, dtype=float)
    ln = np.asarray(ln, dtype=float)
    hi = np.maximum(lp, ln)
    lo = np.minimum(lp, ln)
    sign = np.where(lp > ln, 1, np.where(lp < ln, -1, 0))
    with np.errstate(invalid="ignore", divide="ignore"):
        out = hi + np.log1p(-np.exp(lo - hi))
    out = np.where(sign == 0, -np.inf, out)
    if out.ndim == 0:
        return int(sign), float(out)
    return sign, out


def _check_nonneg_int(k, name="k"):
    if isinstance(k, (bool, np.bool_)) or not isinstance(k, (Integral, np.integer)):
        raise DomainError(f"{name} must be an integer, got {k!r}")
    if k < 0:
        raise DomainError(f"{name} must be nonnegative, got {k}")


def ln_factorial(k: int) -> float:
    """Return ``ln(k!)`` for a nonnegative integer ``k``."""
    _check_nonneg_int(k)
    if k < 2:
        return 0.0
    return math.lgamma(k + 1)


def ln_binomial(n: int, k: int) -> float:
    """``ln C(n, k)`` for integers ``n >= k >= 0``; ``-inf`` outside that range."""
    if k < 0 or k > n:
        return -math.inf
    return ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)


def pochhammer(a: float, k: int) -> LogScaledReal:
    """Rising factorial ``(a)_k = a (a+1) ... (a+k-1)`` as sign + log magnitude."""
    _check_nonneg_int(k)
    if k == 0:
        return LogScaledReal.one
    if a > 0:
        return LogScaledReal(1, float(gammaln(a + k) - gammaln(a)))
    factors = a + np.arange(k, dtype=float)
    if np.any(factors == 0):
        return LogScaledReal.zero
    sign = -1 if np.count_nonzero(factors < 0) % 2 else 1
    return LogScaledReal(sign, float(np.sum(np.log(np.abs(factors)))))


def jacobi_sum_coeffs(deg, a, b):
    """Logs of ``C(deg+a, deg-k) C(deg+k+a+b, k)`` for ``k = 0..deg``."""
    k = np.arange(deg + 1)
    return (
        gammaln(deg + a + 1) - gammaln(deg - k + 1) - gammaln(a + k + 1)
        + gammaln(deg + k + a + b + 1) - gammaln(k + 1) - gammaln(deg + a + b + 1)
    )


def jacobi_poly(deg: int, a: int, b: int, x: float) -> LogScaledReal:
    """Jacobi polynomial ``P_deg^{(a,b)}(x)`` from its explicit binomial sum.

    ``sum_k C(deg+a, deg-k) C(deg+k+a+b, k) ((x-1)/2)**k``. Negative degrees
    return zero, which is the convention used by the determinant formulas in
    :mod:`largest_root.distribution`.
    """
    if deg < 0:
        return LogScaledReal.zero
    _check_nonneg_int(a, "a")
    _check_nonneg_int(b, "b")
    if deg == 0:
        return LogScaledReal.one
    coeffs = jacobi_sum_coeffs(deg, a, b)
    h = (x - 1.0) / 2.0
    if h == 0:
        return LogScaledReal(1, float(coeffs[0]))
    k = np.arange(deg + 1)
    logs = coeffs + k * math.log(abs(h))
    signs = np.ones(deg + 1, dtype=int) if h > 0 else np.where(k % 2, -1, 1)
    s, l = signed_logsumexp(logs, signs)
    return LogScaledReal(s, l)


def log_jacobi_inverse_arg(deg: int, a: int, b: int, log_t):
    """``log P_deg^{(a,b)}(2/t + 1)`` for an array of ``log t``.

    At this argument ``(x - 1)/2 = 1/t`` so every term of the binomial sum
    is positive and the sum is a plain ``logsumexp``. Negative degree gives
    ``-inf`` (the polynomial is taken to be zero).
    """
    log_t = np.asarray(log_t, dtype=float)
    if deg < 0:
        return np.full_like(log_t, -np.inf)
    coeffs = jacobi_sum_coeffs(deg, a, b)
    k = np.arange(deg + 1)
    terms = coeffs[:, None] - k[:, None] * log_t.reshape(1, -1)
    return logsumexp(terms, axis=0).reshape(log_t.shape)
