"""Kernel norms, extremal transfer functions and growth fits.

The approximation kernel of a sampling sequence at probe frequency w is

    K_N(w1) = sum_{k=-N}^{N} exp(i w t_k) phi^_k(w1),

and (1/2pi) int |K_N| is the operator norm that controls divergence of the
sampling process. For the integers it reduces to the Dirichlet kernel.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from SignalModel.errors import ApproxInputError, SequenceRangeError
from SignalModel.measurements import bit_reverse_permutation, walsh_synthesis
from SignalModel.sampler import (
    GeneratingFunctionConfig,
    SamplingSequence,
    combine_spectra,
    sample_matrix,
    sequence_points,
    spectrum_from_samples,
    system_responses,
)
from SignalModel.spectral import SpectralGrid, TransferFunction

FOUR_OVER_PI_SQUARED = 4.0 / np.pi**2
MIN_NODES_PER_LOBE = 8
MAX_NODES_PER_LOBE = 64
DEFAULT_NODES_PER_LOBE = 32

# Frequencies per block in the direct worst-case sum.
_NODE_BLOCK = 512


@dataclass(frozen=True)
class KernelProbe:
    sequence: str
    omega: float
    N: int
    l1_value: float


@dataclass(frozen=True)
class GrowthFit:
    """Least-squares fit values ~ slope * ln(N) + intercept.

    Attributes:
        stages: Stages used in the fit (N >= 1).
        values: Matching values.
        slope: Coefficient of ln N.
        intercept: Constant term.
        residual: RMS of the fit residuals.
    """

    stages: Tuple[int, ...]
    values: Tuple[float, ...]
    slope: float
    intercept: float
    residual: float


def _check_omega(omega: float) -> float:
    omega = float(omega)
    if not (-np.pi <= omega <= np.pi):
        raise ApproxInputError(f"probe frequency must lie in [-pi, pi], got {omega}")
    return omega


def _window(seq: SamplingSequence, N: int) -> np.ndarray:
    if N < 0:
        raise ApproxInputError(f"stage N must be non-negative, got {N}")
    if N > seq.K:
        raise SequenceRangeError(f"stage N = {N} exceeds the sequence window K = {seq.K}")
    return sequence_points(seq)[seq.K - N : seq.K + N + 1]


def kernel_spectrum(
    seq: SamplingSequence,
    omega: float,
    N: int,
    grid: SpectralGrid,
    cfg: Optional[GeneratingFunctionConfig] = None,
) -> np.ndarray:
    """Node values of K_N(w1) = sum_k exp(i w t_k) phi^_k(w1)."""
    omega = _check_omega(omega)
    weights = np.exp(1j * omega * _window(seq, N))
    return combine_spectra(seq, weights, grid, cfg)


def kernel_l1(
    seq: SamplingSequence,
    omega: float,
    N: int,
    grid: SpectralGrid,
    cfg: Optional[GeneratingFunctionConfig] = None,
) -> float:
    """(1/2pi) sum_m |K_N(w_m)| dw on the grid."""
    return float(np.sum(np.abs(kernel_spectrum(seq, omega, N, grid, cfg))) / grid.M)


def kernel_probe(
    seq: SamplingSequence,
    omega: float,
    N: int,
    grid: SpectralGrid,
    cfg: Optional[GeneratingFunctionConfig] = None,
) -> KernelProbe:
    return KernelProbe(seq.label, float(omega), int(N), kernel_l1(seq, omega, N, grid, cfg))


def kernel_l1_profile(
    seq: SamplingSequence,
    omega: float,
    N: int,
    grid: SpectralGrid,
    cfg: Optional[GeneratingFunctionConfig] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Kernel norms for every 1 <= M <= N and their running maximum.

    Returns:
        (values, running_max), both indexed by M - 1.
    """
    omega = _check_omega(omega)
    if N < 1:
        raise ApproxInputError(f"profile needs N >= 1, got {N}")
    weights = np.exp(1j * omega * _window(seq, N))
    if seq.is_equidistant:
        rows = np.eye(2 * N + 1)
    else:
        order = (cfg or GeneratingFunctionConfig()).order(seq)
        rows = sample_matrix(seq, order)[seq.K - N : seq.K + N + 1]
    coefficients = weights[N] * rows[N]
    values = np.empty(N)
    for M in range(1, N + 1):
        coefficients = coefficients + weights[N + M] * rows[N + M] + weights[N - M] * rows[N - M]
        values[M - 1] = np.sum(np.abs(spectrum_from_samples(coefficients, grid))) / grid.M
    return values, np.maximum.accumulate(values)


def _nodes_per_lobe(N: int, grid: Optional[SpectralGrid], nodes_per_lobe: Optional[int]) -> int:
    if nodes_per_lobe is not None:
        if nodes_per_lobe < 1:
            raise ApproxInputError(f"nodes_per_lobe must be >= 1, got {nodes_per_lobe}")
        return int(nodes_per_lobe)
    if grid is None:
        return DEFAULT_NODES_PER_LOBE
    # 8x the grid density, spread over the 2N+1 lobes of [-pi, pi].
    wanted = -(-8 * grid.M // (2 * N + 1))
    return int(min(MAX_NODES_PER_LOBE, max(MIN_NODES_PER_LOBE, wanted)))


def dirichlet_lebesgue(
    N: int, grid: Optional[SpectralGrid] = None, nodes_per_lobe: Optional[int] = None
) -> float:
    """Lebesgue constant (1/2pi) int |D_N| of the Dirichlet kernel.

    |D_N| is smooth between consecutive zeros 2 pi j / (2N + 1), so each lobe
    gets its own Gauss-Legendre rule.

    Args:
        N: Non-negative degree.
        grid: Optional grid; sets the node density to 8x the grid.
        nodes_per_lobe: Explicit node count per lobe.
    """
    if N < 0:
        raise ApproxInputError(f"degree N must be non-negative, got {N}")
    if N == 0:
        return 1.0
    q = _nodes_per_lobe(N, grid, nodes_per_lobe)
    x, w = leggauss(q)
    edges = np.concatenate((2.0 * np.pi * np.arange(N + 1) / (2 * N + 1), [np.pi]))
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = mid[:, None] + half[:, None] * x[None, :]
    kernel = np.sin((N + 0.5) * nodes) / np.sin(0.5 * nodes)
    return float(np.sum(np.abs(kernel) * half[:, None] * w[None, :]) / np.pi)


def walsh_dyadic_kernel_l1(
    omega: float, N: int, grid: Optional[SpectralGrid] = None, inclusive: bool = False
) -> float:
    """(1/2pi) int |sum_{k=0}^{U} theta^_k(w) theta^_k(w1)| dw1 on the grid.

    U = 2**N - 1 by default, 2**N with ``inclusive``.
    """
    grid = grid or SpectralGrid()
    if not (-np.pi <= omega <= np.pi):
        raise ApproxInputError(f"probe frequency must lie in [-pi, pi], got {omega}")
    if omega == np.pi:
        omega = -np.pi
    if N < 0:
        raise ApproxInputError(f"dyadic stage must be non-negative, got {N}")
    U = (1 << N) if inclusive else (1 << N) - 1
    if U >= grid.M:
        raise SequenceRangeError(f"summation limit U = {U} needs a grid of more than {U} nodes, got M = {grid.M}")
    level = U.bit_length()
    k = np.arange(U + 1, dtype=np.int64)
    digits = min(int(np.floor((omega + np.pi) / (2.0 * np.pi) * (1 << level))), (1 << level) - 1)
    rev = int(bit_reverse_permutation(level)[digits]) if level else 0
    parity = np.zeros(U + 1, dtype=np.int64)
    bits = k & rev
    while np.any(bits):
        parity ^= bits & 1
        bits >>= 1
    kernel = walsh_synthesis(1.0 - 2.0 * parity, grid)
    return float(np.sum(np.abs(kernel)) / grid.M)


def adversarial_transfer(
    seq: SamplingSequence,
    omega: float,
    t: float,
    N: int,
    grid: SpectralGrid,
    cfg: Optional[GeneratingFunctionConfig] = None,
) -> TransferFunction:
    """Unimodular transfer function conjugating the phase of e^{i w1 t} K_N(w1).

    Nodes where the kernel vanishes get the value 1.
    """
    z = np.exp(1j * grid.nodes * float(t)) * kernel_spectrum(seq, omega, N, grid, cfg)
    values = np.where(np.abs(z) > 0, np.exp(-1j * np.angle(z)), 1.0)
    return TransferFunction(grid, values)


def achieved_value(
    seq: SamplingSequence,
    omega: float,
    t: float,
    N: int,
    T: TransferFunction,
    cfg: Optional[GeneratingFunctionConfig] = None,
) -> float:
    """|sum_{k=-N}^{N} exp(i w t_k) (T phi_k)(t)|."""
    omega = _check_omega(omega)
    weights = np.exp(1j * omega * _window(seq, N))
    return float(abs(np.sum(weights * system_responses(seq, T, t, N, cfg))))


def worst_case_signal_value(
    T: TransferFunction,
    seq: SamplingSequence,
    N: int,
    t: float,
    sigma: float,
    cfg: Optional[GeneratingFunctionConfig] = None,
    sigma_low: float = 0.0,
) -> Tuple[float, float]:
    """Max over in-band nodes w1 of |sum_k exp(i w1 t_k) (T phi_k)(t)|.

    This is the norm of the N-th process as a functional on the unit ball of
    PW^1_sigma (band-pass when ``sigma_low`` > 0).

    Returns:
        (value, maximizing node).
    """
    if not (0.0 < sigma <= np.pi):
        raise ApproxInputError(f"sigma must lie in (0, pi], got {sigma}")
    if not (0.0 <= sigma_low < sigma):
        raise ApproxInputError(f"sigma_low must lie in [0, sigma), got {sigma_low}")
    grid = T.grid
    responses = system_responses(seq, T, t, N, cfg)
    mask = grid.band_mask(sigma, sigma_low)
    if seq.is_equidistant:
        sums = spectrum_from_samples(responses[::-1], grid)[mask]
    else:
        nodes = grid.nodes[mask]
        points = _window(seq, N)
        sums = np.empty(nodes.size, dtype=np.complex128)
        for start in range(0, nodes.size, _NODE_BLOCK):
            block = nodes[start : start + _NODE_BLOCK]
            sums[start : start + block.size] = np.exp(1j * np.outer(block, points)) @ responses
    magnitude = np.abs(sums)
    i = int(np.argmax(magnitude))
    return float(magnitude[i]), float(grid.nodes[mask][i])


def growth_fit(stages: Sequence[int], values: Sequence[float]) -> GrowthFit:
    """Fit values ~ slope * ln N + intercept over the stages with N >= 1.

    Raises:
        ApproxInputError: With fewer than 3 usable points, mismatched
            lengths, or non-positive values.
    """
    if len(stages) != len(values):
        raise ApproxInputError(f"stages and values differ in length ({len(stages)} vs {len(values)})")
    pairs = [(int(N), float(v)) for N, v in zip(stages, values) if N >= 1]
    if len(pairs) < 3:
        raise ApproxInputError(f"growth fit needs at least 3 stages with N >= 1, got {len(pairs)}")
    n = np.array([p[0] for p in pairs], dtype=float)
    v = np.array([p[1] for p in pairs])
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        raise ApproxInputError("growth fit needs finite positive values")
    design = np.column_stack((np.log(n), np.ones_like(n)))
    (slope, intercept), *_ = np.linalg.lstsq(design, v, rcond=None)
    residual = float(np.sqrt(np.mean((design @ np.array([slope, intercept]) - v) ** 2)))
    return GrowthFit(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs), float(slope), float(intercept), residual)


__all__ = [
    "FOUR_OVER_PI_SQUARED",
    "KernelProbe",
    "GrowthFit",
    "kernel_spectrum",
    "kernel_l1",
    "kernel_probe",
    "kernel_l1_profile",
    "dirichlet_lebesgue",
    "walsh_dyadic_kernel_l1",
    "adversarial_transfer",
    "achieved_value",
    "worst_case_signal_value",
    "growth_fit",
]
