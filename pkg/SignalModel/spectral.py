"""Frequency-domain representation of Paley-Wiener signals and LTI systems.

Signals and systems live on a uniform periodic grid over [-pi, pi). A signal
is stored by its spectrum f^ and evaluated with the rectangle rule

    f(t) = (1/M) * sum_m f^(w_m) * exp(i * w_m * t),

which is exact for every integrand that is a trigonometric polynomial of
degree below M/2. Systems act by pointwise multiplication with their
transfer function h^_T.
"""

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, List, Optional, Tuple, Union

import numpy as np

from .errors import ApproxInputError

DEFAULT_GRID_SIZE = 4096

# Evaluation points handled per matrix block in eval_signal_many.
_EVAL_BLOCK = 256

ArrayLike = Union[np.ndarray, Iterable[float]]


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform grid w_m = -pi + 2*pi*m/M, m = 0..M-1.

    Attributes:
        M: Node count, a power of two >= 2.
    """

    M: int = DEFAULT_GRID_SIZE

    def __post_init__(self):
        if isinstance(self.M, bool) or not isinstance(self.M, (int, np.integer)):
            raise ApproxInputError(f"grid size must be an integer, got {self.M!r}")
        if self.M < 2 or (int(self.M) & (int(self.M) - 1)) != 0:
            raise ApproxInputError(f"grid size must be a power of two >= 2, got {self.M}")
        object.__setattr__(self, "M", int(self.M))

    @cached_property
    def nodes(self) -> np.ndarray:
        w = -np.pi + (2.0 * np.pi / self.M) * np.arange(self.M)
        w.setflags(write=False)
        return w

    @property
    def spacing(self) -> float:
        return 2.0 * np.pi / self.M

    @property
    def level(self) -> int:
        """Dyadic level p with M = 2**p."""
        return self.M.bit_length() - 1

    def band_mask(self, band: float, band_low: float = 0.0) -> np.ndarray:
        """Nodes inside the half-open band [-band, band) minus (-band_low, band_low)."""
        w = self.nodes
        mask = (w >= -band) & (w < band)
        if band_low > 0.0:
            mask &= np.abs(w) >= band_low
        return mask


def _frozen_complex(values: ArrayLike, grid: SpectralGrid, what: str) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128)
    if arr.shape != (grid.M,):
        raise ApproxInputError(f"{what} needs {grid.M} node values, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ApproxInputError(f"{what} values must be finite at every node")
    arr.setflags(write=False)
    return arr


def _check_band(band: float, band_low: float) -> None:
    if not (0.0 < band <= np.pi):
        raise ApproxInputError(f"band must lie in (0, pi], got {band}")
    if not (0.0 <= band_low < band):
        raise ApproxInputError(f"inner band edge must lie in [0, band), got {band_low}")


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Signal in PW_sigma given by its Fourier-domain node values.

    Attributes:
        grid: Spectral grid the values live on.
        values: Complex value per node, zero outside the band.
        band: Outer band edge sigma in (0, pi].
        band_low: Inner band edge for band-pass signals (0 for low-pass).
    """

    grid: SpectralGrid
    values: np.ndarray
    band: float = np.pi
    band_low: float = 0.0

    def __post_init__(self):
        _check_band(self.band, self.band_low)
        arr = _frozen_complex(self.values, self.grid, "spectrum")
        outside = np.abs(self.grid.nodes) > self.band
        if self.band_low > 0.0:
            outside |= np.abs(self.grid.nodes) < self.band_low
        if np.any(arr[outside] != 0):
            raise ApproxInputError(f"spectrum has non-zero values outside its band [{self.band_low}, {self.band}]")
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "band", float(self.band))
        object.__setattr__(self, "band_low", float(self.band_low))

    def scaled(self, factor: complex) -> "Spectrum":
        return Spectrum(self.grid, self.values * factor, self.band, self.band_low)


@dataclass(frozen=True, eq=False)
class TransferFunction:
    """Stable LTI system given by bounded transfer-function node values.

    Attributes:
        grid: Spectral grid the values live on.
        values: Complex h^_T per node.
        sup_norm: Largest modulus over the nodes (the grid proxy of ||T||).
    """

    grid: SpectralGrid
    values: np.ndarray
    sup_norm: float = field(init=False)

    def __post_init__(self):
        arr = _frozen_complex(self.values, self.grid, "transfer function")
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "sup_norm", float(np.max(np.abs(arr))))


def _check_time(t: float) -> float:
    t = float(t)
    if not math.isfinite(t):
        raise ApproxInputError(f"evaluation time must be finite, got {t}")
    return t


def eval_signal(spec: Spectrum, t: float) -> complex:
    """Evaluate the signal at time ``t`` by the grid rule.

    Args:
        spec: Signal spectrum.
        t: Finite evaluation time.

    Returns:
        (1/M) * sum_m f^(w_m) exp(i w_m t).
    """
    t = _check_time(t)
    return complex(np.sum(spec.values * np.exp(1j * spec.grid.nodes * t)) / spec.grid.M)


def eval_signal_many(values: np.ndarray, grid: SpectralGrid, ts: ArrayLike) -> np.ndarray:
    """Evaluate node values at many (arbitrary) times, in fixed-size blocks.

    Args:
        values: Complex node values (spectrum or transfer function).
        grid: Grid of ``values``.
        ts: Finite evaluation times.

    Returns:
        Complex array aligned with ``ts``.
    """
    ts = np.asarray(ts, dtype=float).ravel()
    if not np.all(np.isfinite(ts)):
        raise ApproxInputError("evaluation times must be finite")
    out = np.empty(ts.size, dtype=np.complex128)
    for start in range(0, ts.size, _EVAL_BLOCK):
        block = ts[start : start + _EVAL_BLOCK]
        out[start : start + block.size] = np.exp(1j * np.outer(block, grid.nodes)) @ values
    return out / grid.M


def lattice_sum(weights: np.ndarray, n: ArrayLike, step: int = 1) -> np.ndarray:
    """Return sum_m weights[m] * exp(i w_m n / step) for integer ``n``.

    One zero-padded FFT of length step*M serves every lattice point, and the
    result is exact on the grid.

    Args:
        weights: Complex node weights, one per grid node.
        n: Integer lattice indices.
        step: Positive integer lattice refinement.
    """
    weights = np.asarray(weights, dtype=np.complex128)
    n = np.asarray(n, dtype=np.int64)
    if step < 1:
        raise ApproxInputError(f"lattice step must be a positive integer, got {step}")
    length = step * weights.size
    full = np.fft.ifft(weights, n=length) * length
    return np.exp(-1j * np.pi * n / step) * full[np.mod(n, length)]


def eval_lattice(values: np.ndarray, grid: SpectralGrid, offset: float, n: ArrayLike, step: int = 1) -> np.ndarray:
    """Evaluate node values at the times offset + n/step for integer ``n``."""
    offset = _check_time(offset)
    weights = values if offset == 0.0 else values * np.exp(1j * grid.nodes * offset)
    return lattice_sum(weights, n, step) / grid.M


def integer_samples(spec: Spectrum) -> Tuple[np.ndarray, np.ndarray]:
    """Samples f(n) for one full period n in [-M/2, M/2)."""
    n = np.arange(-spec.grid.M // 2, spec.grid.M // 2)
    return n, eval_lattice(spec.values, spec.grid, 0.0, n)


def pw1_norm(spec: Spectrum) -> float:
    """PW^1 norm (1/2pi) * integral |f^|, by the grid rule."""
    return float(np.sum(np.abs(spec.values)) / spec.grid.M)


def pw2_norm(spec: Spectrum) -> float:
    """PW^2 norm sqrt((1/2pi) * integral |f^|^2), by the grid rule."""
    return float(np.sqrt(np.sum(np.abs(spec.values) ** 2) / spec.grid.M))


def apply_system(T: TransferFunction, spec: Spectrum) -> Spectrum:
    """Apply a stable LTI system: (Tf)^ = f^ * h^_T, band unchanged.

    Raises:
        ApproxInputError: If the system and signal use different grids.
    """
    if T.grid != spec.grid:
        raise ApproxInputError(f"grid mismatch: system has M={T.grid.M}, signal has M={spec.grid.M}")
    return Spectrum(spec.grid, spec.values * T.values, spec.band, spec.band_low)


# --- Systems ---------------------------------------------------------------


def identity_transfer(grid: SpectralGrid) -> TransferFunction:
    return TransferFunction(grid, np.ones(grid.M, dtype=np.complex128))


def hilbert_transfer(grid: SpectralGrid) -> TransferFunction:
    """Hilbert transform: h^(w) = -i * sign(w), with 0 at w = 0."""
    return TransferFunction(grid, -1j * np.sign(grid.nodes))


def _check_cutoff(cutoff: float, what: str = "cutoff") -> float:
    cutoff = float(cutoff)
    if not (0.0 < cutoff <= np.pi):
        raise ApproxInputError(f"{what} must lie in (0, pi], got {cutoff}")
    return cutoff


def lowpass_transfer(grid: SpectralGrid, cutoff: float) -> TransferFunction:
    """Ideal low-pass: indicator of [-cutoff, cutoff) on the grid."""
    cutoff = _check_cutoff(cutoff)
    return TransferFunction(grid, grid.band_mask(cutoff).astype(np.complex128))


def transition_window(grid: SpectralGrid, a: float) -> np.ndarray:
    """Raised-cosine window: 1 on [-pi/a, pi/a], falling to 0 at +-pi.

    For a = 1 the window is identically 1.
    """
    if a < 1.0:
        raise ApproxInputError(f"oversampling factor must be >= 1, got {a}")
    edge = np.pi / a
    w = np.abs(grid.nodes)
    window = np.ones(grid.M)
    if a > 1.0:
        ramp = w > edge
        window[ramp] = 0.5 * (1.0 + np.cos(np.pi * (w[ramp] - edge) / (np.pi - edge)))
    return window


# --- Test spectra ----------------------------------------------------------


def constant_spectrum(grid: SpectralGrid, band: float = np.pi, band_low: float = 0.0) -> Spectrum:
    """f^ = 1 inside the band."""
    _check_band(band, band_low)
    return Spectrum(grid, grid.band_mask(band, band_low).astype(np.complex128), band, band_low)


def indicator_spectrum(grid: SpectralGrid, band: float, band_low: float = 0.0) -> Spectrum:
    return constant_spectrum(grid, band, band_low)


def triangle_spectrum(grid: SpectralGrid, band: float = np.pi) -> Spectrum:
    """f^(w) = 1 - |w|/band on the band, 0 outside."""
    _check_band(band, 0.0)
    values = np.clip(1.0 - np.abs(grid.nodes) / band, 0.0, None) * grid.band_mask(band)
    return Spectrum(grid, values.astype(np.complex128), band)


def bandlimited_random_spectrum(grid: SpectralGrid, seed: int, band: float, band_low: float = 0.0) -> Spectrum:
    """Seeded complex Gaussian node values in the band, PW^1 norm 1."""
    _check_band(band, band_low)
    rng = np.random.default_rng(seed)
    mask = grid.band_mask(band, band_low)
    values = np.zeros(grid.M, dtype=np.complex128)
    count = int(np.count_nonzero(mask))
    values[mask] = rng.standard_normal(count) + 1j * rng.standard_normal(count)
    spec = Spectrum(grid, values, band, band_low)
    return spec.scaled(1.0 / pw1_norm(spec))


def zero_spectrum(grid: SpectralGrid, band: float = np.pi) -> Spectrum:
    return Spectrum(grid, np.zeros(grid.M, dtype=np.complex128), band)


# --- CSV -------------------------------------------------------------------


def write_spectral_csv(path: str, grid: SpectralGrid, values: np.ndarray, comments: Optional[List[str]] = None) -> None:
    """Write node values as (omega, re, im) rows with full round-trip precision.

    Args:
        path: Output file path.
        grid: Grid of ``values``.
        values: Complex node values.
        comments: Optional lines written first with a ``# `` prefix.
    """
    with open(path, "w", newline="", encoding="utf-8") as f:
        for line in comments or []:
            f.write(f"# {line}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["omega", "re", "im"])
        for w, v in zip(grid.nodes, np.asarray(values, dtype=np.complex128)):
            writer.writerow([repr(float(w)), repr(float(v.real)), repr(float(v.imag))])


def read_spectral_csv(path: str) -> Tuple[SpectralGrid, np.ndarray]:
    """Read an (omega, re, im) CSV back into a grid and node values.

    Raises:
        ApproxInputError: If the header is missing or the omega column is not
            a power-of-two grid.
    """
    with open(path, "r", newline="", encoding="utf-8") as f:
        rows = [row for row in csv.reader(f) if row and not row[0].startswith("#")]
    if not rows or rows[0] != ["omega", "re", "im"]:
        raise ApproxInputError(f"{path}: expected header row 'omega,re,im'")
    data = np.array([[float(x) for x in row] for row in rows[1:]], dtype=float).reshape(-1, 3)
    grid = SpectralGrid(len(data))
    if not np.allclose(data[:, 0], grid.nodes, rtol=0.0, atol=1e-12):
        raise ApproxInputError(f"{path}: omega column does not match a grid of {grid.M} nodes")
    return grid, data[:, 1] + 1j * data[:, 2]


__all__ = [
    "DEFAULT_GRID_SIZE",
    "SpectralGrid",
    "Spectrum",
    "TransferFunction",
    "eval_signal",
    "eval_signal_many",
    "lattice_sum",
    "eval_lattice",
    "integer_samples",
    "pw1_norm",
    "pw2_norm",
    "apply_system",
    "identity_transfer",
    "hilbert_transfer",
    "lowpass_transfer",
    "transition_window",
    "constant_spectrum",
    "indicator_spectrum",
    "triangle_spectrum",
    "bandlimited_random_spectrum",
    "zero_spectrum",
    "write_spectral_csv",
    "read_spectral_csv",
]
