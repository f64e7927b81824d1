"""Small dense linear algebra used by the simulator and the CDF.

Everything here accepts a single matrix or a stack of matrices with shape
``(..., d, d)``; stacks are what the Monte Carlo loop feeds in.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, FactorizationError
from .special import LogScaledReal

__all__ = [
    "HERMITIAN_ATOL",
    "check_hermitian",
    "hermitize",
    "cholesky_lower",
    "hermitian_eig_max",
    "ScaledSquareMatrix",
    "log_scaled_det",
]

HERMITIAN_ATOL = 1e-12


def check_hermitian(M, atol=HERMITIAN_ATOL):
    """Raise :class:`DomainError` unless ``M`` equals its conjugate transpose.

    The tolerance is absolute for matrices with entries of order one and
    scales with ``max|M|`` beyond that.
    """
    M = np.asarray(M)
    if M.ndim < 2 or M.shape[-1] != M.shape[-2]:
        raise DomainError(f"expected square matrices, got shape {M.shape}")
    resid = np.max(np.abs(M - np.conj(np.swapaxes(M, -1, -2))), initial=0.0)
    scale = max(1.0, float(np.max(np.abs(M), initial=0.0)))
    if resid > atol * scale:
        raise DomainError(f"matrix is not Hermitian (residual {resid:.3e})")
    return M


def hermitize(M):
    """Return ``(M + M^H) / 2``, removing rounding asymmetry."""
    M = np.asarray(M)
    return 0.5 * (M + np.conj(np.swapaxes(M, -1, -2)))


def cholesky_lower(M):
    """Lower Cholesky factor ``L`` with ``L @ L^H == M``.

    Raises
    ------
    FactorizationError
        If ``M`` is not positive definite.
    """
    M = check_hermitian(M)
    try:
        return np.linalg.cholesky(M)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(f"matrix is not positive definite: {exc}") from None


def hermitian_eig_max(M):
    """Largest eigenvalue of a Hermitian matrix (or of each matrix in a stack)."""
    M = check_hermitian(M)
    top = np.linalg.eigvalsh(M)[..., -1]
    return float(top) if np.ndim(top) == 0 else top


@dataclass(frozen=True)
class ScaledSquareMatrix:
    """Square matrix stored as O(1) entries times a per-row ``exp`` scale.

    Entry ``(i, j)`` of the represented matrix is
    ``scaled_entries[i, j] * exp(row_log_scales[i])``. Rows are normalised so
    that their largest absolute entry is one (all-zero rows keep scale 0).
    A leading batch dimension is allowed on both arrays.
    """

    row_log_scales: np.ndarray
    scaled_entries: np.ndarray

    @property
    def dim(self) -> int:
        return self.scaled_entries.shape[-1]

    @classmethod
    def from_log_entries(cls, log_abs, signs=None):
        """Build from entrywise log magnitudes (``-inf`` marks a zero entry)."""
        log_abs = np.asarray(log_abs, dtype=float)
        if log_abs.ndim < 2 or log_abs.shape[-1] != log_abs.shape[-2]:
            raise DomainError(f"expected square matrices, got shape {log_abs.shape}")
        scales = np.max(log_abs, axis=-1)
        scales = np.where(np.isfinite(scales), scales, 0.0)
        entries = np.exp(log_abs - scales[..., None])
        if signs is not None:
            entries = entries * np.asarray(signs)
        return cls(scales, entries)

    @classmethod
    def from_dense(cls, M):
        M = np.asarray(M, dtype=float)
        with np.errstate(divide="ignore"):
            return cls.from_log_entries(np.log(np.abs(M)), np.sign(M))

    def to_dense(self):
        return self.scaled_entries * np.exp(self.row_log_scales)[..., None]


def log_scaled_det(M: ScaledSquareMatrix):
    """Determinant of a row-scaled matrix as sign + log magnitude.

    LU with partial pivoting (LAPACK ``getrf`` through ``numpy.linalg.slogdet``)
    runs on the O(1) scaled entries; the row scales are added back in log
    space. For a stacked input returns ``(signs, log_abs)`` arrays instead of
    a :class:`LogScaledReal`.
    """
    sign, logdet = np.linalg.slogdet(M.scaled_entries)
    logdet = logdet + np.sum(M.row_log_scales, axis=-1)
    if np.ndim(sign) == 0:
        if sign == 0:
            return LogScaledReal.zero
        return LogScaledReal(int(np.sign(sign)), float(logdet))
    return np.sign(sign).astype(int), np.where(sign == 0, -np.inf, logdet)
