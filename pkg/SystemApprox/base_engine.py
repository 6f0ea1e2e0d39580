"""Base interface for system approximation engines."""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from SignalModel.errors import ApproxInputError
from SignalModel.spectral import Spectrum, TransferFunction, apply_system, eval_signal, eval_signal_many


@dataclass(frozen=True)
class ApproxResult:
    """One approximation value against its direct reference (T f)(t).

    Attributes:
        engine: Registry name of the engine.
        N: Stage index.
        t: Evaluation time.
        value: Approximation process output.
        reference: Direct evaluation of (T f)(t) from the system spectrum.
        flags: Engine flags such as the summation limit.
        abs_error: |value - reference|.
    """

    engine: str
    N: int
    t: float
    value: complex
    reference: complex
    flags: str = ""
    abs_error: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "abs_error", float(abs(self.value - self.reference)))


def symmetric_partial_sums(terms: np.ndarray, stages: Sequence[int]) -> np.ndarray:
    """sum_{|k| <= N} terms[k] for each N, with ``terms`` indexed -R..R.

    Accumulation runs outward in +-k pairs, always in the same order.
    """
    radius = (terms.size - 1) // 2
    pairs = terms[radius + 1 :] + terms[radius - 1 :: -1][:radius]
    totals = terms[radius] + np.concatenate(([0.0], np.cumsum(pairs)))
    return totals[np.asarray(stages, dtype=np.int64)]


class BaseApproxEngine(ABC):
    """Approximation process for a fixed signal and system.

    Subclasses implement ``check_stages`` and ``stage_values``; the reference
    value (T f)(t) is shared and always taken from the system spectrum.
    """

    name = "base"

    def __init__(self, f: Spectrum, T: TransferFunction):
        self.f = f
        self.T = T
        self.grid = f.grid
        self._target = apply_system(T, f)

    @property
    def flags(self) -> str:
        return ""

    def reference(self, t: float) -> complex:
        return eval_signal(self._target, t)

    def references(self, ts: Sequence[float]) -> np.ndarray:
        return eval_signal_many(self._target.values, self.grid, ts)

    @abstractmethod
    def check_stages(self, stages: Sequence[int]) -> None:
        """Raise if any stage is outside the engine's range."""

    @abstractmethod
    def stage_values(self, stages: Sequence[int], t: float) -> np.ndarray:
        """Approximation values at time ``t`` for every stage, in order."""

    def approximate(self, N: int, t: float) -> ApproxResult:
        self.check_stages([N])
        value = complex(self.stage_values([N], t)[0])
        return ApproxResult(self.name, int(N), float(t), value, self.reference(t), self.flags)

    @staticmethod
    def _require_stages(stages: Sequence[int]) -> None:
        if len(stages) == 0:
            raise ApproxInputError("stage list must not be empty")
        if min(stages) < 0:
            raise ApproxInputError(f"stages must be non-negative, got {list(stages)}")


__all__ = ["ApproxResult", "BaseApproxEngine", "symmetric_partial_sums"]
