"""Largest-root detector: false alarm and detection probabilities, ROC.

The detector thresholds the largest eigenvalue of ``R^{-1} S`` where ``R``
and ``S`` are the noise-only and signal-plus-noise sample covariances
(normalised by ``n`` and ``p``). Its eigenvalues are ``n/p`` times those of
``W1 W2^{-1}``, so with ``kappa = p/n``

    P_F(mu) = 1 - F(kappa mu; 0),    P_D(mu) = 1 - F(kappa mu; gamma).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .distribution import EnsembleParams, cdf_max_eig
from .exceptions import DomainError, NumericalError

__all__ = [
    "DetectorParams",
    "RocCurve",
    "db_to_linear",
    "linear_to_db",
    "detection_probability",
    "false_alarm_probability",
    "threshold_for_pf",
    "cdf_quantile",
    "roc_curve",
    "roc_balanced",
    "optimal_p_bounds",
    "optimal_p_approx",
    "optimal_p_exact",
    "round_half_up",
    "dimension_for",
]

BISECT_WIDTH = 1e-12
MAX_DOUBLINGS = 200
MAX_BISECTIONS = 2000
# small dimensions with a large alpha lose digits in double; "auto" repairs those points
DEFAULT_PRECISION = "auto"


def db_to_linear(db):
    """Power ratio from decibels: ``10 ** (db / 10)``."""
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0) if np.ndim(db) else 10.0 ** (db / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


@dataclass(frozen=True)
class DetectorParams:
    ensemble: EnsembleParams
    gamma: float

    def __post_init__(self):
        g = float(self.gamma)
        if not (g >= 0 and math.isfinite(g)):
            raise DomainError(f"gamma must be finite and nonnegative, got {self.gamma!r}")
        object.__setattr__(self, "gamma", g)

    @classmethod
    def from_snr_db(cls, m, n, p, snr_db):
        return cls(EnsembleParams(m, n, p), db_to_linear(snr_db))

    @property
    def kappa(self) -> float:
        return self.ensemble.kappa


@dataclass(frozen=True)
class RocCurve:
    """ROC points ordered by increasing false-alarm probability."""

    thresholds: np.ndarray
    p_f: np.ndarray
    p_d: np.ndarray

    @property
    def points(self):
        return list(zip(self.thresholds.tolist(), self.p_f.tolist(), self.p_d.tolist()))

    def __len__(self):
        return self.p_f.size


def _check_threshold(mu):
    mu = np.asarray(mu, dtype=float)
    if np.any(~(mu > 0)):
        raise DomainError("threshold must be positive")
    return mu


def _exceedance(dp, eta, mu, precision):
    out = 1.0 - cdf_max_eig(dp.ensemble, eta, dp.kappa * mu, precision=precision)
    return float(out) if np.ndim(out) == 0 else out


def detection_probability(dp: DetectorParams, mu_th, *, precision=DEFAULT_PRECISION):
    """``P_D(mu) = 1 - F(kappa * mu; gamma)``.

    ``precision`` is passed to :func:`~largest_root.distribution.cdf_max_eig`.
    """
    return _exceedance(dp, dp.gamma, _check_threshold(mu_th), precision)


def false_alarm_probability(dp: DetectorParams, mu_th, *, precision=DEFAULT_PRECISION):
    """``P_F(mu) = 1 - F(kappa * mu; 0)``."""
    return _exceedance(dp, 0.0, _check_threshold(mu_th), precision)


def _solve_log_decreasing(fun, q):
    """Root of ``fun(log_x) = q`` for ``fun`` decreasing in ``log_x``, one per target.

    The bracket ``[-1, 1]`` is widened by doubling (vectorised over targets)
    until it straddles every target, then each root is refined by Brent's
    method to an absolute width of ``BISECT_WIDTH`` in ``log_x``.
    """
    lo = np.full(q.shape, -1.0)
    hi = np.full(q.shape, 1.0)
    for _ in range(MAX_DOUBLINGS):
        low_bad = fun(lo) < q
        high_bad = fun(hi) > q
        if not (low_bad.any() or high_bad.any()):
            break
        width = hi - lo
        lo = np.where(low_bad, lo - 2.0 * width, lo)
        hi = np.where(high_bad, hi + 2.0 * width, hi)
    else:
        raise NumericalError("could not bracket the root")
    roots = np.empty(q.shape)
    for i, target in enumerate(q):
        g = lambda x: float(fun(np.array([x]))[0]) - target
        roots[i] = brentq(g, lo[i], hi[i], xtol=BISECT_WIDTH, rtol=4 * np.finfo(float).eps,
                          maxiter=MAX_BISECTIONS)
    return np.exp(roots)


def _targets(q, name):
    q_arr = np.atleast_1d(np.asarray(q, dtype=float))
    if np.any(~((q_arr > 0) & (q_arr < 1))):
        raise DomainError(f"{name} must lie in (0, 1)")
    return q_arr, np.ndim(q) == 0


def threshold_for_pf(dp: DetectorParams, target_pf, *, precision=DEFAULT_PRECISION):
    """Threshold ``mu`` with ``P_F(mu) = target_pf``.

    Brent's method on ``log mu`` to an absolute width of ``1e-12``, after
    expanding the bracket ``[-1, 1]`` by doubling.
    P_F is strictly decreasing in ``mu`` so the root is unique.
    """
    q, scalar = _targets(target_pf, "target false-alarm probability")
    mu = _solve_log_decreasing(
        lambda log_mu: 1.0 - cdf_max_eig(dp.ensemble, 0.0, dp.kappa * np.exp(log_mu), precision=precision), q)
    return float(mu[0]) if scalar else mu


def cdf_quantile(params: EnsembleParams, spike, q, *, precision=DEFAULT_PRECISION):
    """Inverse of :func:`~largest_root.distribution.cdf_max_eig` in ``t``."""
    q, scalar = _targets(q, "quantile level")
    t = _solve_log_decreasing(
        lambda log_t: 1.0 - cdf_max_eig(params, spike, np.exp(log_t), precision=precision), 1.0 - q)
    return float(t[0]) if scalar else t


def roc_curve(dp: DetectorParams, pf_grid, *, precision=DEFAULT_PRECISION) -> RocCurve:
    """ROC by threshold inversion: for each target P_F find ``mu``, then P_D."""
    pf_grid = np.atleast_1d(np.asarray(pf_grid, dtype=float))
    if np.any(np.diff(pf_grid) < 0):
        raise DomainError("pf_grid must be sorted")
    mu = np.atleast_1d(threshold_for_pf(dp, pf_grid, precision=precision))
    return RocCurve(mu, false_alarm_probability(dp, mu, precision=precision),
                    detection_probability(dp, mu, precision=precision))


def roc_balanced(m, p, gamma, pf):
    """Closed-form ROC for ``n == m``: ``1 - (1-pf) / (1 + gamma - gamma (1-pf)**(1/(m p)))**p``.

    ``m`` and ``p`` may be non-integer (continuous relaxation); arguments
    broadcast.
    """
    pf = np.asarray(pf, dtype=float)
    if np.any((pf < 0) | (pf > 1)):
        raise DomainError("pf must lie in [0, 1]")
    m = np.asarray(m, dtype=float)
    p = np.asarray(p, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    with np.errstate(divide="ignore"):
        log_q = np.log1p(-pf)
    # 1 - (1-pf)^(1/mp), kept accurate for small pf
    w = -np.expm1(log_q / (m * p))
    out = -np.expm1(log_q - p * np.log1p(gamma * w))
    return float(out) if out.ndim == 0 else out


def _check_design(pf, gamma, nu):
    if not 0 < pf < 1:
        raise DomainError("pf must lie in (0, 1)")
    if not gamma > 0:
        raise DomainError("gamma must be positive")
    if not nu > 0:
        raise DomainError("nu must be positive")


def optimal_p_bounds(pf: float, gamma: float, nu: float):
    """Bracket for the sample count maximising P_D when ``m = n = nu * p``.

    Returns ``(lower, upper)`` with
    ``lower = sqrt(-ln(1-pf) / (-2 nu ln((gamma+1)/(gamma+2))))`` and
    ``upper = sqrt(-ln(1-pf) / (-nu ln((gamma+2)/(gamma+4))))``.
    """
    _check_design(pf, gamma, nu)
    c = -math.log1p(-pf)
    lower = math.sqrt(c / (2.0 * nu * math.log((gamma + 2.0) / (gamma + 1.0))))
    upper = math.sqrt(c / (nu * math.log((gamma + 4.0) / (gamma + 2.0))))
    return lower, upper


def optimal_p_approx(pf: float, gamma: float, nu: float) -> float:
    """Midpoint of :func:`optimal_p_bounds`."""
    lower, upper = optimal_p_bounds(pf, gamma, nu)
    return 0.5 * (lower + upper)


def round_half_up(x):
    return np.floor(np.asarray(x, dtype=float) + 0.5)


def dimension_for(p, nu):
    """Integer dimension paired with ``p`` samples: ``max(1, round(nu p))``."""
    return np.maximum(1, round_half_up(nu * np.asarray(p, dtype=float))).astype(int)


def optimal_p_exact(pf: float, gamma: float, nu: float):
    """Integer ``p`` maximising the balanced-case P_D, with ``m = max(1, round(nu p))``.

    Exhaustive over ``1 <= p <= ceil(4 * upper)``; ties go to the smallest
    ``p``. Returns ``(p_star, p_d_max)``.
    """
    _, upper = optimal_p_bounds(pf, gamma, nu)
    p = np.arange(1, max(1, math.ceil(4.0 * upper)) + 1)
    pd = roc_balanced(dimension_for(p, nu), p, gamma, pf)
    best = int(np.argmax(pd))
    return int(p[best]), float(pd[best])
