"""Sampling-based system approximation engines.

``sampling``    sum_{|k|<=N} f(t_k) (T phi_k)(t) on a complete interpolating
                sequence.
``oversampled`` (1/a) sum_{|k|<=N} f(k/a) h(t - k/a) with oversampling factor
                a >= 1, where h is either the system kernel h_T or h_T
                smoothed by a raised-cosine transition band.
"""

import sys
from typing import Optional, Sequence

import numpy as np

from SignalModel.errors import ApproxInputError, SequenceRangeError
from SignalModel.sampler import (
    GeneratingFunctionConfig,
    SamplingSequence,
    sequence_points,
    system_responses,
)
from SignalModel.spectral import (
    Spectrum,
    TransferFunction,
    eval_lattice,
    eval_signal_many,
    transition_window,
)

from .base_engine import ApproxResult, BaseApproxEngine, symmetric_partial_sums

KERNELS = ("system", "transition")


def _print_notice(msg: str) -> None:
    try:
        print(f"[Kernel Notice] {msg}", file=sys.stderr)
    except Exception:
        pass


class SamplingSystemEngine(BaseApproxEngine):
    """Digital implementation sum_{k=-N}^{N} f(t_k) (T phi_k)(t)."""

    name = "sampling"

    def __init__(
        self,
        f: Spectrum,
        T: TransferFunction,
        seq: SamplingSequence,
        cfg: Optional[GeneratingFunctionConfig] = None,
    ):
        super().__init__(f, T)
        self.seq = seq
        self.cfg = cfg or GeneratingFunctionConfig()
        self._samples: Optional[np.ndarray] = None

    def check_stages(self, stages: Sequence[int]) -> None:
        self._require_stages(stages)
        if max(stages) > self.seq.K:
            raise SequenceRangeError(f"stage N = {max(stages)} exceeds the sequence window K = {self.seq.K}")

    def signal_samples(self) -> np.ndarray:
        """f(t_k) for k = -K..K."""
        if self._samples is None:
            if self.seq.is_equidistant:
                k = np.arange(-self.seq.K, self.seq.K + 1)
                self._samples = eval_lattice(self.f.values, self.grid, 0.0, k)
            else:
                self._samples = eval_signal_many(self.f.values, self.grid, sequence_points(self.seq))
        return self._samples

    def stage_values(self, stages: Sequence[int], t: float) -> np.ndarray:
        top = int(max(stages))
        K = self.seq.K
        samples = self.signal_samples()[K - top : K + top + 1]
        responses = system_responses(self.seq, self.T, t, top, self.cfg)
        return symmetric_partial_sums(samples * responses, stages)


class ShannonOversampledEngine(BaseApproxEngine):
    """Oversampled equidistant process (1/a) sum_{k=-N}^{N} f(k/a) h(t - k/a).

    Args:
        f: Signal spectrum.
        T: System transfer function.
        a: Oversampling factor >= 1. Integer factors use lattice FFTs.
        kernel: ``"system"`` for h_T itself, ``"transition"`` for h_T with a
            raised-cosine roll-off between pi/a and pi. The transition kernel
            reproduces signals of band <= pi/a only.
    """

    name = "oversampled"

    def __init__(self, f: Spectrum, T: TransferFunction, a: float = 1.0, kernel: str = "system"):
        super().__init__(f, T)
        a = float(a)
        if not a >= 1.0:
            raise ApproxInputError(f"oversampling factor must be >= 1, got {a}")
        if kernel not in KERNELS:
            raise ApproxInputError(f"Unknown kernel '{kernel}'. Available kernels: {list(KERNELS)}")
        self.a = a
        self.kernel = kernel
        self._integer = a.is_integer()
        window = transition_window(self.grid, a) if kernel == "transition" else 1.0
        self._kernel_values = T.values * window
        if kernel == "transition" and f.band > np.pi / a + 1e-12:
            _print_notice(f"signal band {f.band} exceeds pi/a = {np.pi / a}; the transition kernel will not reproduce it")

    @property
    def flags(self) -> str:
        return f"a={self.a!r};kernel={self.kernel}"

    def check_stages(self, stages: Sequence[int]) -> None:
        self._require_stages(stages)

    def _lattice(self, values: np.ndarray, offset: float, k: np.ndarray) -> np.ndarray:
        if self._integer:
            return eval_lattice(values, self.grid, offset, k, int(self.a))
        return eval_signal_many(values, self.grid, offset + k / self.a)

    def stage_values(self, stages: Sequence[int], t: float) -> np.ndarray:
        top = int(max(stages))
        k = np.arange(-top, top + 1)
        samples = self._lattice(self.f.values, 0.0, k)
        kernel = self._lattice(self._kernel_values, t, -k)
        return symmetric_partial_sums(samples * kernel, stages) / self.a


def sampling_system_approx(
    f: Spectrum,
    T: TransferFunction,
    seq: SamplingSequence,
    N: int,
    t: float,
    cfg: Optional[GeneratingFunctionConfig] = None,
) -> ApproxResult:
    return SamplingSystemEngine(f, T, seq, cfg).approximate(N, t)


def shannon_oversampled(
    f: Spectrum, T: TransferFunction, a: float, N: int, t: float, kernel: str = "system"
) -> ApproxResult:
    return ShannonOversampledEngine(f, T, a, kernel).approximate(N, t)


__all__ = [
    "SamplingSystemEngine",
    "ShannonOversampledEngine",
    "sampling_system_approx",
    "shannon_oversampled",
]
