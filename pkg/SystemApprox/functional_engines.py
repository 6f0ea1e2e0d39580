"""Measurement-functional approximation engines.

``functional`` sum_n c_n(f) (T theta_n)(t) over a measurement system.
``walsh-a``    sum_{k<=U} c_k(f, 0) (T theta_k)(t), Walsh system.
``walsh-b``    sum_{k<=U} c_k(f, t) (T theta_k)(0), Walsh system.

For the dyadic engines the stage N maps to the summation limit U = 2**N - 1
(classical dyadic partial sum) or U = 2**N (inclusive limit).
"""

from typing import Sequence

import numpy as np

from SignalModel.errors import ApproxInputError, SequenceRangeError
from SignalModel.measurements import MeasurementSystem, walsh_coefficients
from SignalModel.spectral import Spectrum, TransferFunction

from .base_engine import ApproxResult, BaseApproxEngine, symmetric_partial_sums


def dyadic_limit(N: int, inclusive: bool = False) -> int:
    """Summation limit U for dyadic stage N."""
    if N < 0:
        raise ApproxInputError(f"dyadic stage must be non-negative, got {N}")
    return (1 << N) if inclusive else (1 << N) - 1


class FunctionalSystemEngine(BaseApproxEngine):
    """General functional process sum_{n=first}^{N} c_n(f) (T theta_n)(t).

    Fourier-exponential systems sum symmetrically over -N..N.
    """

    name = "functional"

    def __init__(self, f: Spectrum, T: TransferFunction, system: MeasurementSystem):
        super().__init__(f, T)
        if system.grid != self.grid:
            raise ApproxInputError("measurement system and signal use different grids")
        self.system = system
        self._coefficients = system.coefficients(f.values, system.indices())

    @property
    def flags(self) -> str:
        return f"system={self.system.kind}"

    def check_stages(self, stages: Sequence[int]) -> None:
        self._require_stages(stages)
        if max(stages) > self.system.max_index:
            raise SequenceRangeError(f"stage N = {max(stages)} exceeds the system range {self.system.max_index}")

    def stage_values(self, stages: Sequence[int], t: float) -> np.ndarray:
        top = int(max(stages))
        idx = self.system.indices(top)
        responses = self.system.responses(self.T.values * np.exp(1j * self.grid.nodes * t), idx)
        terms = self._coefficients[idx - self.system.first_index] * responses
        if self.system.kind == "fourier_exponentials":
            return symmetric_partial_sums(terms, stages)
        return np.cumsum(terms)[np.asarray(stages, dtype=np.int64)]


class _WalshDyadicEngine(BaseApproxEngine):
    def __init__(self, f: Spectrum, T: TransferFunction, inclusive: bool = False):
        super().__init__(f, T)
        self.inclusive = bool(inclusive)

    @property
    def flags(self) -> str:
        return "inclusive" if self.inclusive else "classical"

    def limits(self, stages: Sequence[int]) -> np.ndarray:
        return np.array([dyadic_limit(int(N), self.inclusive) for N in stages], dtype=np.int64)

    def check_stages(self, stages: Sequence[int]) -> None:
        self._require_stages(stages)
        top = int(self.limits([max(stages)])[0])
        if top >= self.grid.M:
            raise SequenceRangeError(
                f"summation limit U = {top} needs a grid of more than {top} nodes, got M = {self.grid.M}"
            )

    def _phase(self, t: float) -> np.ndarray:
        return np.exp(1j * self.grid.nodes * t)


class WalshDyadicEngineA(_WalshDyadicEngine):
    """Measure at t = 0 and move t into the system responses."""

    name = "walsh-a"

    def __init__(self, f: Spectrum, T: TransferFunction, inclusive: bool = False):
        super().__init__(f, T, inclusive)
        self._signal_coefficients = walsh_coefficients(f.values, self.grid)

    def stage_values(self, stages: Sequence[int], t: float) -> np.ndarray:
        responses = walsh_coefficients(self.T.values * self._phase(t), self.grid)
        return np.cumsum(self._signal_coefficients * responses)[self.limits(stages)]


class WalshDyadicEngineB(_WalshDyadicEngine):
    """Measure c_k(f, t) and use the system responses at 0."""

    name = "walsh-b"

    def __init__(self, f: Spectrum, T: TransferFunction, inclusive: bool = False):
        super().__init__(f, T, inclusive)
        self._system_responses = walsh_coefficients(T.values, self.grid)

    def stage_values(self, stages: Sequence[int], t: float) -> np.ndarray:
        measured = walsh_coefficients(self.f.values * self._phase(t), self.grid)
        return np.cumsum(measured * self._system_responses)[self.limits(stages)]


def functional_system_approx(
    f: Spectrum, T: TransferFunction, system: MeasurementSystem, N: int, t: float
) -> ApproxResult:
    return FunctionalSystemEngine(f, T, system).approximate(N, t)


def walsh_dyadic_approx_A(f: Spectrum, T: TransferFunction, N: int, t: float, inclusive: bool = False) -> ApproxResult:
    return WalshDyadicEngineA(f, T, inclusive).approximate(N, t)


def walsh_dyadic_approx_B(f: Spectrum, T: TransferFunction, N: int, t: float, inclusive: bool = False) -> ApproxResult:
    return WalshDyadicEngineB(f, T, inclusive).approximate(N, t)


__all__ = [
    "dyadic_limit",
    "FunctionalSystemEngine",
    "WalshDyadicEngineA",
    "WalshDyadicEngineB",
    "functional_system_approx",
    "walsh_dyadic_approx_A",
    "walsh_dyadic_approx_B",
]
