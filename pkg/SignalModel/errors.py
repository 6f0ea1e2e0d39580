"""Exception types shared by the signal model and the approximation engines."""

from typing import Optional, Sequence

import numpy as np


class ApproxInputError(ValueError):
    """An argument is outside the range an operation accepts."""


class SequenceRangeError(IndexError):
    """An index or stage lies outside the materialized window."""


class TruncationConfigError(ValueError):
    """The generating-function truncation cannot serve the request."""


class GramDiagnosticError(ArithmeticError):
    """The Gram section is not numerically Hermitian positive definite.

    Attributes:
        eigenvalues: Eigenvalues of the (symmetrized) Gram matrix, ascending.
    """

    def __init__(self, message: str, eigenvalues: Optional[Sequence[float]] = None):
        super().__init__(message)
        self.eigenvalues = None if eigenvalues is None else np.asarray(eigenvalues, dtype=float)


__all__ = [
    "ApproxInputError",
    "SequenceRangeError",
    "TruncationConfigError",
    "GramDiagnosticError",
]
