"""Exact finite-m distribution of the largest eigenvalue of ``W1 W2^{-1}``.

``W1 ~ CW_m(p, I + eta v v^H)`` and ``W2 ~ CW_m(n, I)`` are independent
complex Wishart matrices with ``m <= n, p``. The CDF of the largest
eigenvalue is a determinant of size ``alpha + 1`` (``alpha = n - m``): one
column of spike terms and ``alpha`` columns of Jacobi polynomials evaluated
at ``2/t + 1``. All entries are positive and are built as logarithms; the
matrix is row-scaled before the determinant so that the LU factorization
sees numbers of order one.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy.special import gammaln, xlogy

from .exceptions import DegenerateInputError, DomainError, NumericalError
from .linalg import ScaledSquareMatrix, log_scaled_det
from .special import jacobi_sum_coeffs, ln_factorial, signed_logsumexp

__all__ = [
    "EnsembleParams",
    "Spike",
    "T_FLOOR",
    "cdf_max_eig",
    "cdf_max_eig_alpha0",
    "cdf_precision_check",
    "CdfCheck",
    "joint_density",
    "null_joint_density",
    "log_k1",
]

log = logging.getLogger(__name__)

# F(0) = 0 exactly; below this the Jacobi argument 2/t + 1 is not worth evaluating.
T_FLOOR = 1e-12
PROB_SLACK = 1e-8
TIE_TOL = 1e-9
AUTO_RTOL = 1e-10


def _positive_int(name, v):
    if isinstance(v, bool) or int(v) != v or v < 1:
        raise DomainError(f"{name} must be a positive integer, got {v!r}")
    return int(v)


@dataclass(frozen=True)
class EnsembleParams:
    """Dimensions of the problem.

    m : dimension of the observations
    n : number of noise-only samples (degrees of freedom of ``W2``)
    p : number of signal-plus-noise samples (degrees of freedom of ``W1``)
    """

    m: int
    n: int
    p: int

    def __post_init__(self):
        for name in ("m", "n", "p"):
            object.__setattr__(self, name, _positive_int(name, getattr(self, name)))
        if self.m > self.n or self.m > self.p:
            raise DomainError(f"need m <= n and m <= p, got (m, n, p) = ({self.m}, {self.n}, {self.p})")

    @property
    def alpha(self) -> int:
        return self.n - self.m

    @property
    def beta(self) -> int:
        return self.p - self.m

    @property
    def kappa(self) -> float:
        return self.p / self.n


@dataclass(frozen=True)
class Spike:
    """Rank-one spike strength ``eta >= 0`` (the SNR under the alternative)."""

    eta: float

    def __post_init__(self):
        eta = float(self.eta)
        if not eta >= 0 or not math.isfinite(eta):
            raise DomainError(f"eta must be finite and nonnegative, got {self.eta!r}")
        object.__setattr__(self, "eta", eta)


def _as_eta(spike) -> float:
    if isinstance(spike, Spike):
        return spike.eta
    return Spike(spike).eta


def _log_prefactor(params: EnsembleParams, eta: float) -> float:
    """Log of the t-independent factor ``K(m,p,alpha) / ((p-1)! (1+eta)^p)``."""
    m, p, a = params.m, params.p, params.alpha
    log_k = sum(ln_factorial(p + m + j - 1) - ln_factorial(p + m + 2 * j) for j in range(a))
    return log_k - ln_factorial(p - 1) - p * math.log1p(eta)


def _lse(x, axis=-1):
    """logsumexp along ``axis`` that tolerates all ``-inf`` slices."""
    top = np.max(x, axis=axis, keepdims=True)
    shift = np.where(np.isfinite(top), top, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(x - shift), axis=axis)) + np.squeeze(shift, axis=axis)
    return out


@dataclass(frozen=True)
class _Tables:
    """t-independent pieces of the determinant entries for one ``(params, eta)``."""

    log_q: np.ndarray       # (N,) log Q_i
    phi_coef: np.ndarray    # (N, K) log coefficients of the Phi_i sums, -inf padded
    phi_k: np.ndarray       # (N, K) summation index k
    phi_power: np.ndarray   # (N, K) exponent k + i - 1 of (eta t)
    psi_coef: np.ndarray    # (N, N-1, D) log coefficients of the Psi_{i,j} sums
    psi_k: np.ndarray       # (D,)


@lru_cache(maxsize=256)
def _tables(params: EnsembleParams, eta: float) -> _Tables:
    m, n, p, a, b = params.m, params.n, params.p, params.alpha, params.beta
    size = a + 1
    kmax = a + 1
    phi_coef = np.full((size, kmax), -np.inf)
    phi_k = np.zeros((size, kmax))
    phi_power = np.zeros((size, kmax))
    log_q = np.empty(size)
    for i in range(1, size + 1):
        # Phi_i = Q_i sum_k (p+i-1)_k (alpha-i+1)! / (k! (p+m+2i-2)_k (alpha-i-k+1)!)
        #         * (eta t)^(k+i-1) ((1+eta)(1+t))^p / (1+eta+t)^(p+k+i-1)
        log_q[i - 1] = ln_factorial(n + p + i - 2) + ln_factorial(p + i - 2) - ln_factorial(p + m + 2 * i - 3)
        k = np.arange(a - i + 2)
        coef = (
            gammaln(p + i - 1 + k) - gammaln(p + i - 1)
            + ln_factorial(a - i + 1) - gammaln(k + 1)
            - (gammaln(p + m + 2 * i - 2 + k) - gammaln(p + m + 2 * i - 2))
            - gammaln(a - i - k + 2)
        )
        power = k + i - 1
        if eta == 0.0:
            # 0**0 = 1: only the k = 0, i = 1 term survives under the null
            coef = np.where(power == 0, coef, -np.inf)
        phi_coef[i - 1, : k.size] = coef
        phi_k[i - 1, : k.size] = k
        phi_power[i - 1, : k.size] = power
    dmax = m + a - 1
    psi_coef = np.full((size, max(size - 1, 1), dmax + 1), -np.inf)
    for i in range(1, size + 1):
        for j in range(2, size + 1):
            # Psi_{i,j} = (m+i+beta-1)_{j-2} P_{m+i-j}^{(j-2, beta+j-2)}(2/t + 1)
            deg = m + i - j
            if deg < 0:
                continue
            poch = gammaln(m + i + b - 1 + j - 2) - gammaln(m + i + b - 1)
            psi_coef[i - 1, j - 2, : deg + 1] = poch + jacobi_sum_coeffs(deg, j - 2, b + j - 2)
    return _Tables(log_q, phi_coef, phi_k, phi_power, psi_coef, np.arange(dmax + 1))


def _log_phi_column(tab: _Tables, params: EnsembleParams, eta: float, log_t, log1p_t, t):
    p = params.p
    log_eta = math.log(eta) if eta > 0 else 0.0
    i = np.arange(1, tab.log_q.size + 1)[:, None]
    lt = log_t[:, None, None]
    terms = (
        tab.phi_coef[None]
        + tab.phi_power[None] * (log_eta + lt)
        + p * (math.log1p(eta) + log1p_t[:, None, None])
        - (p + tab.phi_k[None] + i[None] - 1) * np.log1p(eta + t)[:, None, None]
    )
    return tab.log_q[None] + _lse(terms)


def _log_cdf_matrix(params: EnsembleParams, eta: float, t):
    """Log magnitudes of the ``(alpha+1) x (alpha+1)`` determinant entries, per t."""
    tab = _tables(params, eta)
    log_t = np.log(t)
    log1p_t = np.log1p(t)
    size = params.alpha + 1
    out = np.empty((t.size, size, size))
    out[:, :, 0] = _log_phi_column(tab, params, eta, log_t, log1p_t, t)
    if size > 1:
        terms = tab.psi_coef[None] - tab.psi_k[None, None, None, :] * log_t[:, None, None, None]
        out[:, :, 1:] = _lse(terms)
    return out


_warned_negative_degree = set()


def _note_negative_degrees(params):
    if params.n > 2 * params.m and params not in _warned_negative_degree:
        _warned_negative_degree.add(params)
        log.info(
            "n > 2m for %s: Jacobi entries of negative degree are taken as zero", params
        )


def _to_prob(log_f, sign):
    with np.errstate(over="ignore"):
        return sign * np.exp(log_f)


def _check_prob(f):
    bad = (f < -PROB_SLACK) | (f > 1 + PROB_SLACK) | np.isnan(f)
    if np.any(bad):
        raise NumericalError(f"CDF evaluation left [0, 1]: {f[bad][:5]}")
    return np.clip(f, 0.0, 1.0)


def _prepare_t(t):
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(np.isnan(t)) or np.any(t < 0):
        raise DomainError("t must be nonnegative")
    return t, scalar


def _cdf_double(params, eta, t, column_log_scales=None, jitter=0):
    L = _log_cdf_matrix(params, eta, t)
    if jitter:
        L = L + _entry_jitter(L, jitter)
    if column_log_scales is not None:
        L = L + np.asarray(column_log_scales, dtype=float)[None, None, :]
    sign, log_det = log_scaled_det(ScaledSquareMatrix.from_log_entries(L))
    if column_log_scales is not None:
        log_det = log_det - float(np.sum(column_log_scales))
    m, a, b = params.m, params.alpha, params.beta
    log_x0 = np.log(t) - np.log1p(t)
    log_f = _log_prefactor(params, eta) + m * (a + b + m) * log_x0 + log_det
    return _to_prob(log_f, sign)


def _cdf_mp(params, eta, t, dps=50):
    """Same determinant in mpmath arithmetic; slow, used where doubles cancel."""
    m, n, p, a, b = params.m, params.n, params.p, params.alpha, params.beta
    fac = mpmath.factorial
    rf = mpmath.rf
    out = np.empty(t.size)
    with mpmath.workdps(dps):
        eta_ = mpmath.mpf(eta)
        pref = mpmath.exp(_log_prefactor_mp(params, eta_))
        for idx, tv in enumerate(t):
            tv = mpmath.mpf(float(tv))
            x = 2 / tv + 1
            M = mpmath.matrix(a + 1, a + 1)
            for i in range(1, a + 2):
                q = fac(n + p + i - 2) * fac(p + i - 2) / fac(p + m + 2 * i - 3)
                acc = mpmath.mpf(0)
                for k in range(a - i + 2):
                    power = k + i - 1
                    if eta == 0 and power > 0:
                        continue
                    acc += (
                        rf(p + i - 1, k) * fac(a - i + 1)
                        / (fac(k) * rf(p + m + 2 * i - 2, k) * fac(a - i - k + 1))
                        * (eta_ * tv) ** power * ((1 + eta_) * (1 + tv)) ** p
                        / (1 + eta_ + tv) ** (p + k + i - 1)
                    )
                M[i - 1, 0] = q * acc
                for j in range(2, a + 2):
                    deg = m + i - j
                    if deg < 0:
                        M[i - 1, j - 1] = 0
                        continue
                    aa, bb = j - 2, b + j - 2
                    jac = mpmath.fsum(
                        mpmath.binomial(deg + aa, deg - r) * mpmath.binomial(deg + r + aa + bb, r) * ((x - 1) / 2) ** r
                        for r in range(deg + 1)
                    )
                    M[i - 1, j - 1] = rf(m + i + b - 1, j - 2) * jac
            out[idx] = float(pref * (tv / (1 + tv)) ** (m * (a + b + m)) * mpmath.det(M))
    return out


def _log_prefactor_mp(params, eta):
    m, p, a = params.m, params.p, params.alpha
    fac = mpmath.factorial
    log_k = mpmath.fsum(mpmath.log(fac(p + m + j - 1) / fac(p + m + 2 * j)) for j in range(a))
    return log_k - mpmath.log(fac(p - 1)) - p * mpmath.log1p(eta)


_COLUMN_PROBE = 4.0


def _probe_scales(size):
    return _COLUMN_PROBE * np.sin(1.0 + np.arange(size))


# a few ulps of each log entry, with a fixed sign pattern
_JITTER_ULPS = 4.0


def _entry_jitter(L, variant=1):
    k = L.shape[-1]
    pattern = np.sign(np.sin(variant + np.arange(k * k) * (1.0 + 0.5 * variant))).reshape(k, k)
    finite = np.where(np.isfinite(L), L, 0.0)
    return _JITTER_ULPS * np.finfo(float).eps * (1.0 + np.abs(finite)) * pattern


def _probe_deviation(params, eta, t, f):
    """Largest relative change of ``f`` over two rescaled, jittered re-evaluations."""
    dev = np.zeros_like(f)
    for variant in (1, 2):
        alt = _cdf_double(params, eta, t, _probe_scales(params.alpha + 1) / variant, jitter=variant)
        denom = np.maximum(np.abs(f), np.abs(alt))
        with np.errstate(invalid="ignore", divide="ignore"):
            dev = np.maximum(dev, np.where(denom > 0, np.abs(f - alt) / denom, 0.0))
    return dev


def cdf_max_eig(params: EnsembleParams, spike, t, *, precision="double", column_log_scales=None):
    """CDF ``P(lambda_max <= t)`` of the largest eigenvalue of ``W1 W2^{-1}``.

    Parameters
    ----------
    params : EnsembleParams
    spike : Spike or float
        Spike strength ``eta``; 0 gives the null distribution.
    t : float or array_like
        Evaluation points, ``t >= 0``.
    precision : {"double", "auto", "high"}
        ``"double"`` evaluates the row-scaled determinant in floating point.
        ``"auto"`` additionally re-evaluates with perturbed column scales and
        log entries jittered by a few ulps, and redoes points whose two
        results differ by more than ``AUTO_RTOL`` (relative) in 50-digit
        arithmetic. ``"high"`` uses 50 digits
        everywhere and is slow.
    column_log_scales : array_like, optional
        Extra column scaling applied before the determinant (diagnostics
        only; the value is mathematically unchanged).

    Returns
    -------
    float or ndarray

    Raises
    ------
    NumericalError
        If the result leaves ``[-1e-8, 1 + 1e-8]``.
    """
    eta = _as_eta(spike)
    t, scalar = _prepare_t(t)
    if precision not in ("double", "auto", "high"):
        raise DomainError(f"unknown precision {precision!r}")
    _note_negative_degrees(params)
    out = np.zeros(t.shape)
    out[np.isposinf(t)] = 1.0
    live = (t >= T_FLOOR) & np.isfinite(t)
    if np.any(live):
        tl = t[live]
        if precision == "high":
            f = _cdf_mp(params, eta, tl)
        else:
            f = _cdf_double(params, eta, tl, column_log_scales)
            if precision == "auto":
                dev = _probe_deviation(params, eta, tl, f)
                redo = (dev > AUTO_RTOL) | (f > 1) | (f < 0)
                if np.any(redo):
                    log.debug("recomputing %d CDF points in extended precision", int(redo.sum()))
                    f[redo] = _cdf_mp(params, eta, tl[redo])
        out[live] = _check_prob(f)
    return float(out[0]) if scalar else out


def cdf_max_eig_alpha0(m: int, p: int, eta: float, t):
    """Closed form of the CDF when ``n == m``.

    ``(t/(1+t))**(m p) * (1 + eta/(1+t))**(-p)``, evaluated in log space.
    """
    m = _positive_int("m", m)
    p = _positive_int("p", p)
    eta = _as_eta(eta)
    t, scalar = _prepare_t(t)
    out = np.zeros(t.shape)
    out[np.isposinf(t)] = 1.0
    live = (t > 0) & np.isfinite(t)
    tl = t[live]
    log_f = m * p * (np.log(tl) - np.log1p(tl)) - p * np.log1p(eta / (1.0 + tl))
    out[live] = np.exp(log_f)
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class CdfCheck:
    value: float
    alternate: float
    rel_dev: float
    ok: bool


def cdf_precision_check(params: EnsembleParams, spike, t: float, rtol: float = 1e-6) -> CdfCheck:
    """Recompute the CDF under perturbed scaling and compare.

    The re-evaluations rescale the columns and jitter every log entry by a
    few ulps. Neither changes the exact value beyond rounding level, so
    a large deviation means the determinant amplifies rounding in its
    entries and the double result should not be trusted to ``rtol``.
    """
    base = cdf_max_eig(params, spike, t)
    eta = _as_eta(spike)
    tt, _ = _prepare_t(t)
    alt = float(_cdf_double(params, eta, tt, _probe_scales(params.alpha + 1), jitter=1)[0])
    dev = float(_probe_deviation(params, eta, tt, np.array([base]))[0])
    return CdfCheck(base, alt, dev, dev <= rtol)


def log_k1(m: int, n: int, p: int) -> float:
    """Log of the normalising constant of the null joint eigenvalue density.

    The powers of pi in the complex multivariate gamma functions cancel, so
    ``K1 = prod_j Gamma(n+p-j+1) / (Gamma(m-j+1) Gamma(n-j+1) Gamma(p-j+1))``.
    """
    j = np.arange(1, m + 1)
    return float(np.sum(gammaln(n + p - j + 1) - gammaln(m - j + 1) - gammaln(n - j + 1) - gammaln(p - j + 1)))


def _check_lambdas(params, lambdas):
    lam = np.asarray(lambdas, dtype=float)
    if lam.shape[-1:] != (params.m,):
        raise DomainError(f"expected {params.m} eigenvalues on the last axis, got shape {lam.shape}")
    if np.any(lam < 0) or np.any(np.isnan(lam)):
        raise DomainError("eigenvalues must be nonnegative")
    if np.any(np.diff(lam, axis=-1) < 0):
        raise DomainError("eigenvalues must be sorted in ascending order")
    return lam


def _log_vandermonde_sq(lam):
    m = lam.shape[-1]
    if m == 1:
        return np.zeros(lam.shape[:-1])
    i, j = np.triu_indices(m, 1)
    with np.errstate(divide="ignore"):
        return 2.0 * np.sum(np.log(lam[..., j] - lam[..., i]), axis=-1)


def _log_null_density(params, lam):
    m, n, p, b = params.m, params.n, params.p, params.beta
    return (
        log_k1(m, n, p)
        + np.sum(xlogy(b, lam) - (p + n) * np.log1p(lam), axis=-1)
        + _log_vandermonde_sq(lam)
    )


def null_joint_density(params: EnsembleParams, lambdas):
    """Joint density of the ordered eigenvalues when ``eta = 0``."""
    lam = _check_lambdas(params, lambdas)
    out = np.exp(_log_null_density(params, lam))
    return float(out) if np.ndim(out) == 0 else out


def joint_density(params: EnsembleParams, spike, lambdas):
    """Joint density of the ordered eigenvalues ``lambda_1 <= ... <= lambda_m``.

    Null density times a spike correction; the correction is a sum over
    ``k`` with poles at coinciding eigenvalues, so inputs with gaps below
    ``1e-9`` are rejected with :class:`DegenerateInputError`. Accepts a
    stack of points along leading axes.
    """
    eta = _as_eta(spike)
    if eta == 0.0:
        return null_joint_density(params, lambdas)
    lam = _check_lambdas(params, lambdas)
    m, n, p = params.m, params.n, params.p
    if m > 1 and np.any(np.diff(lam, axis=-1) < TIE_TOL):
        raise DegenerateInputError("eigenvalues closer than 1e-9; the spike correction is singular there")

    log_k2 = ln_factorial(m - 1) + ln_factorial(p + n - m) - ln_factorial(p + n - 1)
    log_c = log_k2 - (m - 1) * math.log(eta) - (p + 1 - m) * math.log1p(eta)

    diff = lam[..., :, None] - lam[..., None, :]
    eye = np.eye(m, dtype=bool)
    diff = np.where(eye, 1.0, diff)
    log_prod = np.sum(np.log(np.abs(diff)), axis=-1)
    # lambda_k - lambda_j < 0 for every j > k
    signs = np.where((m - 1 - np.arange(m)) % 2, -1, 1)
    terms = (
        (p + n - 1) * np.log1p(lam)
        - log_prod
        - (p + n + 1 - m) * np.log1p(lam / (1.0 + eta))
    )
    s, log_sum = signed_logsumexp(terms, np.broadcast_to(signs, terms.shape), axis=-1)
    log_cor = log_c + np.sum(np.log1p(lam), axis=-1) + log_sum
    with np.errstate(under="ignore"):
        out = s * np.exp(_log_null_density(params, lam) + log_cor)
    out = np.maximum(out, 0.0)
    return float(out) if np.ndim(out) == 0 else out
