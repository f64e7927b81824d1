"""Monte Carlo reference for the largest whitened eigenvalue.

Each trial draws ``W1 ~ CW_m(p, I + eta u u^H)`` and ``W2 ~ CW_m(n, I)``
and records the largest eigenvalue of ``W1 W2^{-1}``. The Wisharts are
unnormalised (no ``1/p``, ``1/n``); the sample-covariance statistic of the
detector is obtained by multiplying the draws by ``n/p`` once, see
:func:`EigSampleSet.detector_statistic`.

Trial ``k`` draws from its own Philox stream keyed by ``seed`` with ``k`` in
the counter, so results depend only on ``(seed, k)`` and not on the number
of worker threads or the order in which chunks finish.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .distribution import EnsembleParams
from .exceptions import DomainError
from .linalg import cholesky_lower, hermitian_eig_max, hermitize

__all__ = [
    "SimConfig",
    "EigSampleSet",
    "trial_generator",
    "sample_complex_gaussian",
    "sample_spiked_wishart",
    "max_whitened_eig",
    "simulate_max_eig",
    "empirical_cdf",
    "ks_statistic",
]

# Chunk boundaries are fixed by the trial count alone; threads only pick chunks.
CHUNK = 2048
UNIT_TOL = 1e-12

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class SimConfig:
    ensemble: EnsembleParams
    eta: float
    trials: int
    seed: int
    spike_direction: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if not float(self.eta) >= 0:
            raise DomainError(f"eta must be nonnegative, got {self.eta!r}")
        object.__setattr__(self, "eta", float(self.eta))
        if int(self.trials) != self.trials or self.trials < 1:
            raise DomainError(f"trials must be a positive integer, got {self.trials!r}")
        object.__setattr__(self, "trials", int(self.trials))
        object.__setattr__(self, "seed", int(self.seed) & _SEED_MASK)
        if self.spike_direction is not None:
            u = np.asarray(self.spike_direction, dtype=complex).reshape(-1)
            if u.size != self.ensemble.m:
                raise DomainError(f"spike direction must have length {self.ensemble.m}")
            if abs(np.linalg.norm(u) - 1.0) > UNIT_TOL:
                raise DomainError("spike direction must be a unit vector")
            object.__setattr__(self, "spike_direction", u)

    @property
    def direction(self) -> np.ndarray:
        if self.spike_direction is None:
            u = np.zeros(self.ensemble.m, dtype=complex)
            u[0] = 1.0
            return u
        return self.spike_direction


@dataclass(frozen=True)
class EigSampleSet:
    """Largest eigenvalues of ``W1 W2^{-1}``, one per trial, in trial order."""

    values: np.ndarray
    config: SimConfig

    def __len__(self):
        return self.values.size

    @property
    def sorted_values(self) -> np.ndarray:
        return np.sort(self.values)

    def detector_statistic(self) -> np.ndarray:
        """Largest eigenvalue of the sample-covariance ratio: ``(n/p) * values``."""
        e = self.config.ensemble
        return self.values * (e.n / e.p)


def trial_generator(seed: int, trial: int) -> np.random.Generator:
    """Independent generator for one trial (Philox keyed by ``seed``, trial index in the counter)."""
    return np.random.Generator(np.random.Philox(key=int(seed) & _SEED_MASK, counter=[0, 0, int(trial), 0]))


def sample_complex_gaussian(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """``rows x cols`` matrix of i.i.d. ``CN(0, 1)`` entries (real and imaginary parts ``N(0, 1/2)``)."""
    if rows < 1 or cols < 1:
        raise DomainError("rows and cols must be positive")
    z = rng.standard_normal((2, rows, cols))
    return (z[0] + 1j * z[1]) * np.sqrt(0.5)


def _spike(G, eta, u):
    # (I + eta u u^H)^{1/2} = I + (sqrt(1+eta) - 1) u u^H, applied as a rank-one update
    if eta == 0.0:
        return G
    c = math.expm1(0.5 * math.log1p(eta))
    proj = np.einsum("i,...ij->...j", u.conj(), G)
    return G + c * u[:, None] * proj[..., None, :]


def sample_spiked_wishart(rng: np.random.Generator, m: int, dof: int, eta: float, u=None) -> np.ndarray:
    """One draw of ``CW_m(dof, I + eta u u^H)`` as ``A A^H`` with ``A = (I + eta u u^H)^{1/2} G``."""
    if dof < m:
        raise DomainError(f"need dof >= m for a nonsingular Wishart, got dof={dof}, m={m}")
    if eta < 0:
        raise DomainError("eta must be nonnegative")
    if u is None:
        u = np.zeros(m, dtype=complex)
        u[0] = 1.0
    u = np.asarray(u, dtype=complex)
    if abs(np.linalg.norm(u) - 1.0) > UNIT_TOL:
        raise DomainError("spike direction must be a unit vector")
    A = _spike(sample_complex_gaussian(rng, m, dof), float(eta), u)
    return hermitize(A @ A.conj().T)


def max_whitened_eig(W1, W2):
    """Largest eigenvalue of ``W1 W2^{-1}`` via ``L^{-1} W1 L^{-H}``, ``W2 = L L^H``.

    Works on single matrices or stacks.
    """
    L = cholesky_lower(W2)
    X = np.linalg.solve(L, W1)                       # L^{-1} W1
    A = np.conj(np.swapaxes(np.linalg.solve(L, np.conj(np.swapaxes(X, -1, -2))), -1, -2))
    return hermitian_eig_max(hermitize(A))


def _simulate_chunk(config: SimConfig, start: int, stop: int) -> np.ndarray:
    e = config.ensemble
    m, n, p = e.m, e.n, e.p
    count = stop - start
    G1 = np.empty((count, m, p), dtype=complex)
    G2 = np.empty((count, m, n), dtype=complex)
    for k in range(count):
        G = sample_complex_gaussian(trial_generator(config.seed, start + k), m, p + n)
        G1[k] = G[:, :p]
        G2[k] = G[:, p:]
    A = _spike(G1, config.eta, config.direction)
    W1 = hermitize(A @ np.conj(np.swapaxes(A, -1, -2)))
    W2 = hermitize(G2 @ np.conj(np.swapaxes(G2, -1, -2)))
    return np.atleast_1d(max_whitened_eig(W1, W2))


def simulate_max_eig(config: SimConfig, threads: int | None = None) -> EigSampleSet:
    """Run ``config.trials`` independent trials; ``threads`` defaults to the CPU count."""
    if threads is None:
        threads = os.cpu_count() or 1
    if threads < 1:
        raise DomainError("threads must be >= 1")
    bounds = [(s, min(s + CHUNK, config.trials)) for s in range(0, config.trials, CHUNK)]
    values = np.empty(config.trials)
    if threads == 1 or len(bounds) == 1:
        for s, e in bounds:
            values[s:e] = _simulate_chunk(config, s, e)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {pool.submit(_simulate_chunk, config, s, e): (s, e) for s, e in bounds}
            for fut, (s, e) in futures.items():
                values[s:e] = fut.result()
    return EigSampleSet(values, config)


def _values(samples):
    v = samples.values if isinstance(samples, EigSampleSet) else np.asarray(samples, dtype=float)
    if v.size == 0:
        raise DomainError("empty sample set")
    return v


def empirical_cdf(samples, t):
    """Fraction of draws ``<= t`` (inclusive); ``t`` may be an array."""
    v = np.sort(_values(samples))
    counts = np.searchsorted(v, t, side="right")
    out = counts / v.size
    return float(out) if np.ndim(out) == 0 else out


def ks_statistic(samples, analytic_cdf) -> float:
    """Two-sided Kolmogorov-Smirnov distance to ``analytic_cdf``.

    ``max_i max(i/N - F(x_(i)), F(x_(i)) - (i-1)/N)`` over the sorted draws.
    ``analytic_cdf`` is called once with the full sorted array.
    """
    x = np.sort(_values(samples))
    F = np.asarray(analytic_cdf(x), dtype=float)
    if F.shape != x.shape:
        F = np.broadcast_to(F, x.shape)
    if np.any(F < 0) or np.any(F > 1) or np.any(np.isnan(F)):
        raise DomainError("analytic CDF returned values outside [0, 1]")
    N = x.size
    i = np.arange(1, N + 1)
    return float(max(np.max(i / N - F), np.max(F - (i - 1) / N)))
