"""Exception types raised by the package."""

import numpy as np


class DomainError(ValueError):
    """An argument lies outside the domain of the function."""


class DegenerateInputError(DomainError):
    """Input sits on a removable singularity the closed form cannot evaluate."""


class NumericalError(ArithmeticError):
    """A computation produced a result that fails its own sanity bounds."""


class FactorizationError(np.linalg.LinAlgError):
    """Cholesky factorization hit a non-positive pivot."""
