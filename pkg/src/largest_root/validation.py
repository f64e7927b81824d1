"""Self-consistency and Monte Carlo cross-checks behind ``validate``.

Each check returns a :class:`CheckResult`; :func:`run_checks` collects them
for a level (``"quick"`` or ``"full"``) and :func:`format_table` renders the
pass/fail table printed by the command line.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import distribution as dist
from .detector import DetectorParams, db_to_linear, roc_balanced, roc_curve, threshold_for_pf, false_alarm_probability
from .distribution import EnsembleParams, cdf_max_eig, cdf_max_eig_alpha0
from .montecarlo import SimConfig, ks_statistic, simulate_max_eig

__all__ = ["CheckResult", "LEVELS", "ks_tolerance", "run_checks", "format_table"]

LEVELS = ("quick", "full")

QUICK_TRIALS = 50_000
FULL_TRIALS = 200_000


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def ks_tolerance(trials: int) -> float:
    """KS acceptance level: the 99% Kolmogorov bound plus slack, never below 0.01."""
    return max(0.01, 1.63 / math.sqrt(trials) + 0.002)


def _timed(name, fn):
    t0 = time.perf_counter()
    try:
        passed, detail = fn()
    except Exception as exc:  # a crash is a failed check, not a crashed suite
        passed, detail = False, f"{type(exc).__name__}: {exc}"
    return CheckResult(name, bool(passed), detail, time.perf_counter() - t0)


def _rel_dev(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = np.maximum(np.abs(a), np.abs(b))
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(scale > 0, np.abs(a - b) / scale, 0.0)


def check_path_identity(tol=1e-9):
    t = np.logspace(-2, 3, 20)
    worst = 0.0
    for m in range(1, 9):
        for p in range(m, m + 7):
            for eta in (0.0, 0.5, 1.0, 5.0, 20.0):
                general = cdf_max_eig(EnsembleParams(m, m, p), eta, t)
                worst = max(worst, float(np.max(_rel_dev(general, cdf_max_eig_alpha0(m, p, eta, t)))))
    return worst <= tol, f"max rel dev {worst:.2e} (tol {tol:g})"


_SCAN_CASES = [(2, 4, 4), (3, 5, 6), (2, 5, 2), (5, 8, 10), (2, 3, 4)]


def check_monotone_t():
    t = np.logspace(-3, 3, 1000)
    worst = 0.0
    for m, n, p in _SCAN_CASES:
        for eta in (0.0, 2.0, 10.0):
            f = cdf_max_eig(EnsembleParams(m, n, p), eta, t)
            worst = min(worst, float(np.min(np.diff(f))))
    return worst >= -1e-12, f"min step {worst:.2e}"


def check_monotone_eta():
    t = np.logspace(-1, 2, 40)
    worst = 0.0
    for m, n, p in _SCAN_CASES:
        e = EnsembleParams(m, n, p)
        f = np.array([cdf_max_eig(e, eta, t) for eta in (0.0, 0.5, 1.0, 2.0, 5.0, 20.0)])
        worst = max(worst, float(np.max(np.diff(f, axis=0))))
    return worst <= 1e-12, f"max increase {worst:.2e}"


def check_eta_continuity(tol=1e-6):
    t = np.logspace(-1, 2, 20)
    worst = 0.0
    for m, n, p in _SCAN_CASES:
        e = EnsembleParams(m, n, p)
        worst = max(worst, float(np.max(np.abs(cdf_max_eig(e, 1e-12, t) - cdf_max_eig(e, 0.0, t)))))
    return worst <= tol, f"max abs dev {worst:.2e} (tol {tol:g})"


def check_balanced_roc(tol=1e-8):
    pf = np.arange(1, 20) / 20
    worst = 0.0
    for m in (1, 3, 6):
        for p in (m, m + 2):
            for gamma in (1.0, 3.162, 10.0):
                r = roc_curve(DetectorParams(EnsembleParams(m, m, p), gamma), pf)
                worst = max(worst, float(np.max(np.abs(r.p_d - roc_balanced(m, p, gamma, pf)))))
    return worst <= tol, f"max abs dev {worst:.2e} (tol {tol:g})"


def check_threshold_round_trip(tol=1e-10):
    q = np.array([0.01, 0.1, 0.5, 0.9])
    worst = 0.0
    for m, n, p in _SCAN_CASES:
        dp = DetectorParams(EnsembleParams(m, n, p), 0.0)
        worst = max(worst, float(np.max(np.abs(false_alarm_probability(dp, threshold_for_pf(dp, q)) - q))))
    return worst <= tol, f"max abs dev {worst:.2e} (tol {tol:g})"


def check_snr_dominance():
    pf = np.arange(1, 20) / 20
    worst = 0.0
    for m, n, p in _SCAN_CASES:
        e = EnsembleParams(m, n, p)
        pd = np.array([roc_curve(DetectorParams(e, g), pf).p_d for g in (0.0, 1.0, 3.162, 10.0)])
        worst = min(worst, float(np.min(np.diff(pd, axis=0))))
    return worst >= -1e-12, f"min P_D step {worst:.2e}"


def check_density_derivative(tol=1e-5):
    worst = 0.0
    for n, p, eta in ((2, 2, 1.0), (3, 5, 2.0), (1, 4, 0.5)):
        e = EnsembleParams(1, n, p)
        for t in (0.3, 1.0, 4.0):
            h = 1e-4 * t
            deriv = (cdf_max_eig(e, eta, t + h) - cdf_max_eig(e, eta, t - h)) / (2 * h)
            worst = max(worst, abs(deriv / dist.joint_density(e, eta, [t]) - 1.0))
    return worst <= tol, f"max rel dev {worst:.2e} (tol {tol:g})"


def _ks_check(m, n, p, eta, trials, seed, threads):
    e = EnsembleParams(m, n, p)
    samples = simulate_max_eig(SimConfig(e, eta, trials, seed), threads=threads)
    d = ks_statistic(samples, lambda x: cdf_max_eig(e, eta, x))
    tol = ks_tolerance(trials)
    return d <= tol, f"KS {d:.4f} at N={trials} (tol {tol:.4f})"


def _ks_cases(level):
    if level == "quick":
        return [((1, 1, 1, 0.0), QUICK_TRIALS), ((2, 4, 4, 2.0), QUICK_TRIALS), ((2, 5, 2, 1.0), QUICK_TRIALS)]
    cases = [(c, FULL_TRIALS) for c in ((2, 4, 4, 0.0), (2, 4, 4, 2.0), (3, 5, 6, 10.0), (2, 5, 2, 1.0))]
    cases += [((5, 8, 10, float(db_to_linear(db))), FULL_TRIALS) for db in (0.0, 5.0, 10.0)]
    cases.append(((5, 8, 10, 0.0), FULL_TRIALS))
    return cases


def run_checks(level: str = "quick", threads: int | None = None, seed: int = 20240611):
    """Run the suite for ``level``; returns a list of :class:`CheckResult`."""
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}, got {level!r}")
    results = [
        _timed("alpha0 path identity", check_path_identity),
        _timed("CDF nondecreasing in t", check_monotone_t),
        _timed("CDF nonincreasing in eta", check_monotone_eta),
        _timed("eta -> 0 continuity", check_eta_continuity),
        _timed("balanced ROC identity", check_balanced_roc),
        _timed("threshold round trip", check_threshold_round_trip),
        _timed("P_D nondecreasing in SNR", check_snr_dominance),
        _timed("m=1 density = dF/dt", check_density_derivative),
    ]
    for k, ((m, n, p, eta), trials) in enumerate(_ks_cases(level)):
        name = f"KS (m,n,p)=({m},{n},{p}) eta={eta:.4g}"
        results.append(_timed(name, lambda: _ks_check(m, n, p, eta, trials, seed + k, threads)))
    return results


def format_table(results) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  status  {'time':>7}  detail"]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{r.name:<{width}}  {status:<6}  {r.seconds:6.2f}s  {r.detail}")
    n_fail = sum(not r.passed for r in results)
    lines.append(f"{len(results) - n_fail}/{len(results)} checks passed")
    return "\n".join(lines)
