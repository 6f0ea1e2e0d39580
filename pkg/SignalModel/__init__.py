"""SignalModel Package

This package provides the signal side of the approximation experiments:
bandlimited signals stored as spectra on a uniform frequency grid, complete
interpolating sampling sequences with their reconstruction functions, and
orthonormal measurement systems such as the Walsh functions.

Main Components:
- spectral: Frequency grid, spectra, transfer functions and evaluation
- sampler: Sampling sequences, generating function, Gram diagnostics
- measurements: Walsh system, fast Walsh-Hadamard transform, measurement functionals
- errors: Exception types shared across the packages
- data: Default experiment bank
"""

from .errors import ApproxInputError, GramDiagnosticError, SequenceRangeError, TruncationConfigError
from .measurements import MeasurementSystem, WalshSystem
from .sampler import GeneratingFunctionConfig, SamplingSequence
from .spectral import SpectralGrid, Spectrum, TransferFunction

__version__ = "1.0.0"
__all__ = [
    "SpectralGrid",
    "Spectrum",
    "TransferFunction",
    "SamplingSequence",
    "GeneratingFunctionConfig",
    "MeasurementSystem",
    "WalshSystem",
    "ApproxInputError",
    "SequenceRangeError",
    "TruncationConfigError",
    "GramDiagnosticError",
]
