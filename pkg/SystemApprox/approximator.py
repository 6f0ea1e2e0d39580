import asyncio
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from SignalModel.errors import ApproxInputError
from SignalModel.spectral import Spectrum, TransferFunction

from .base_engine import BaseApproxEngine
from .functional_engines import FunctionalSystemEngine, WalshDyadicEngineA, WalshDyadicEngineB
from .reports import ExperimentReport
from .sampling_engines import SamplingSystemEngine, ShannonOversampledEngine

THREADS_ENV = "PWAPPROX_THREADS"

SCAN_COLUMNS = ["engine", "N", "t", "value_re", "value_im", "ref_re", "ref_im", "abs_error", "flags"]


def _chunked(seq: List[Any], n: int) -> Iterable[List[Any]]:
    """Yield successive chunks of size ``n`` from ``seq``.

    Args:
        seq: Input sequence to split.
        n: Chunk size (> 0).

    Yields:
        Consecutive sublists from ``seq`` of length up to ``n``.
    """
    for i in range(0, len(seq), n):
        yield seq[i : i + n]


# Engine registry; new processes subclass BaseApproxEngine and register here.
ENGINE_REGISTRY = {
    "sampling": SamplingSystemEngine,
    "oversampled": ShannonOversampledEngine,
    "functional": FunctionalSystemEngine,
    "walsh-a": WalshDyadicEngineA,
    "walsh-b": WalshDyadicEngineB,
}


def _print_notice(msg: str) -> None:
    try:
        print(f"[Worker Notice] {msg}", file=sys.stderr)
    except Exception:
        pass


def worker_count() -> int:
    """Thread count from PWAPPROX_THREADS; 1 when unset or invalid."""
    raw = os.getenv(THREADS_ENV)
    if not raw:
        return 1
    try:
        count = int(raw)
    except ValueError:
        _print_notice(f"{THREADS_ENV}={raw!r} is not an integer; using 1 thread.")
        return 1
    if count < 1:
        _print_notice(f"{THREADS_ENV}={count} is below 1; using 1 thread.")
        return 1
    return count


def _check_grid(t_grid: Sequence[float]) -> np.ndarray:
    ts = np.asarray(t_grid, dtype=float).ravel()
    if ts.size == 0:
        raise ApproxInputError("t grid must not be empty")
    if not np.all(np.isfinite(ts)):
        raise ApproxInputError("t grid values must be finite")
    if np.any(np.diff(ts) <= 0):
        raise ApproxInputError("t grid must be strictly increasing")
    return ts


@dataclass
class SystemApproximator:
    """Registry-backed runner of one approximation process over (N, t) cells.

    Attributes:
        engine: Engine identifier from ENGINE_REGISTRY.
        options: Keyword arguments passed to the engine constructor.
        threads: Worker threads for ``scan_async``; None reads PWAPPROX_THREADS.
    """

    engine: str = "sampling"
    options: Dict[str, Any] = field(default_factory=dict)
    threads: Optional[int] = None

    def __post_init__(self):
        if self.engine not in ENGINE_REGISTRY:
            raise ValueError(f"Unknown engine '{self.engine}'. Available engines: {list(ENGINE_REGISTRY.keys())}")
        if self.threads is None:
            self.threads = worker_count()

    def build(self, f: Spectrum, T: TransferFunction) -> BaseApproxEngine:
        return ENGINE_REGISTRY[self.engine](f, T, **self.options)

    @staticmethod
    def _cells(engine: BaseApproxEngine, stages: List[int], ts: np.ndarray, rows: List[int]) -> np.ndarray:
        return np.array([engine.stage_values(stages, ts[i]) for i in rows]).reshape(len(rows), len(stages))

    def _report(
        self, engine: BaseApproxEngine, stages: List[int], ts: np.ndarray, values: np.ndarray
    ) -> ExperimentReport:
        references = engine.references(ts)
        errors = np.abs(values - references[:, None])
        report = ExperimentReport("sup-error-scan", list(SCAN_COLUMNS))
        for j, N in enumerate(stages):
            i = int(np.argmax(errors[:, j]))
            report.add_row(
                engine=engine.name,
                N=int(N),
                t=float(ts[i]),
                value_re=float(values[i, j].real),
                value_im=float(values[i, j].imag),
                ref_re=float(references[i].real),
                ref_im=float(references[i].imag),
                abs_error=float(errors[i, j]),
                flags=engine.flags,
            )
        return report

    def _prepare(self, f, T, stages, t_grid) -> Tuple[BaseApproxEngine, List[int], np.ndarray]:
        stages = [int(N) for N in stages]
        ts = _check_grid(t_grid)
        engine = self.build(f, T)
        engine.check_stages(stages)
        return engine, stages, ts

    def scan(
        self, f: Spectrum, T: TransferFunction, stages: Sequence[int], t_grid: Sequence[float]
    ) -> ExperimentReport:
        """Sequential sup-over-t error per stage.

        Args:
            f: Signal spectrum.
            T: System transfer function.
            stages: Stage indices N.
            t_grid: Strictly increasing evaluation times.

        Returns:
            Report with one row per stage at the time of the largest error.
        """
        engine, stages, ts = self._prepare(f, T, stages, t_grid)
        values = self._cells(engine, stages, ts, list(range(ts.size)))
        return self._report(engine, stages, ts, values)

    async def scan_async(
        self, f: Spectrum, T: TransferFunction, stages: Sequence[int], t_grid: Sequence[float]
    ) -> ExperimentReport:
        """Async version of ``scan``: t chunks run in worker threads.

        Each chunk writes into its own preassigned rows, so the report is
        identical to the sequential one for any thread count.
        """
        engine, stages, ts = self._prepare(f, T, stages, t_grid)
        values = np.empty((ts.size, len(stages)), dtype=np.complex128)
        rows = list(range(ts.size))
        size = max(1, -(-ts.size // max(1, self.threads)))
        chunks = list(_chunked(rows, size))
        tasks = [asyncio.to_thread(self._cells, engine, stages, ts, chunk) for chunk in chunks]
        results = await asyncio.gather(*tasks)
        for chunk, block in zip(chunks, results):
            values[chunk[0] : chunk[-1] + 1] = block
        return self._report(engine, stages, ts, values)

    def run(self, f: Spectrum, T: TransferFunction, stages: Sequence[int], t_grid: Sequence[float]) -> ExperimentReport:
        """Dispatch to ``scan`` or, with more than one thread, ``scan_async``."""
        if self.threads and self.threads > 1:
            return asyncio.run(self.scan_async(f, T, stages, t_grid))
        return self.scan(f, T, stages, t_grid)


def sup_error_scan(
    engine: str,
    f: Spectrum,
    T: TransferFunction,
    stages: Sequence[int],
    t_grid: Sequence[float],
    **options: Any,
) -> ExperimentReport:
    """Max over ``t_grid`` of the engine's abs_error, for every stage.

    Raises:
        ApproxInputError: If the stage list or the t grid is empty.
    """
    return SystemApproximator(engine=engine, options=options).run(f, T, stages, t_grid)


async def sup_error_scan_async(
    engine: str,
    f: Spectrum,
    T: TransferFunction,
    stages: Sequence[int],
    t_grid: Sequence[float],
    threads: Optional[int] = None,
    **options: Any,
) -> ExperimentReport:
    return await SystemApproximator(engine=engine, options=options, threads=threads).scan_async(f, T, stages, t_grid)


__all__ = ["ENGINE_REGISTRY", "SCAN_COLUMNS", "SystemApproximator", "sup_error_scan", "sup_error_scan_async", "worker_count"]
