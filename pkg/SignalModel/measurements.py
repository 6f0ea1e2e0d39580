"""Walsh-Paley measurement functionals on [-pi, pi).

The Walsh-Paley functions are transplanted to the frequency interval by
theta^_k(w) = w_k((w + pi) / (2 pi)). On a grid of M = 2**p nodes the value at
node m is (-1)**popcount(k & bitrev_p(m)), so the whole coefficient vector of
a node array is one fast Walsh-Hadamard transform of its bit-reversed copy.
Grid cells never straddle a dyadic breakpoint, which makes every Walsh
integral on the grid exact.
"""

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import ApproxInputError, SequenceRangeError
from .spectral import SpectralGrid, Spectrum, _check_time, lattice_sum

KINDS = ("walsh", "fourier_exponentials", "custom")
ORTHONORMAL_TOLERANCE = 1e-10


def _parity(x: np.ndarray) -> np.ndarray:
    """Parity of the set bits of each non-negative integer."""
    x = np.asarray(x, dtype=np.int64).copy()
    out = np.zeros(x.shape, dtype=np.int64)
    while np.any(x):
        out ^= x & 1
        x >>= 1
    return out


@lru_cache(maxsize=16)
def bit_reverse_permutation(level: int) -> np.ndarray:
    """Index array m -> bitrev(m) on ``level`` bits."""
    idx = np.arange(1 << level, dtype=np.int64)
    rev = np.zeros_like(idx)
    for b in range(level):
        rev |= ((idx >> b) & 1) << (level - 1 - b)
    rev.setflags(write=False)
    return rev


def walsh(k: int, x: float) -> int:
    """Walsh-Paley function w_k(x), right-continuous at dyadic points.

    Args:
        k: Non-negative index with binary digits k_j.
        x: Point in [0, 1) with binary digits b_j = floor(x 2**(j+1)) mod 2.

    Returns:
        (-1) ** sum_j k_j b_j.
    """
    if k < 0:
        raise ApproxInputError(f"Walsh index must be non-negative, got {k}")
    if not (0.0 <= x < 1.0):
        raise ApproxInputError(f"Walsh argument must lie in [0, 1), got {x}")
    level = int(k).bit_length()
    digits = int(math.floor(x * (1 << level)))
    rev = int(bit_reverse_permutation(level)[digits]) if level else 0
    return -1 if bin(int(k) & rev).count("1") % 2 else 1


def theta_hat(k: int, omega: float) -> int:
    """theta^_k(w) = w_k((w + pi) / (2 pi)) for w in [-pi, pi)."""
    if not (-np.pi <= omega < np.pi):
        raise ApproxInputError(f"frequency must lie in [-pi, pi), got {omega}")
    # (w + pi) / (2 pi) rounds to 1.0 just below pi
    x = (omega + np.pi) / (2.0 * np.pi)
    return walsh(k, min(x, math.nextafter(1.0, 0.0)))


def fwht(values: np.ndarray) -> np.ndarray:
    """Unnormalized fast Walsh-Hadamard transform along the last axis.

    Output index k carries sum_m (-1)**popcount(k & m) * values[m].
    """
    a = np.array(values, dtype=np.complex128)
    n = a.shape[-1]
    if n & (n - 1):
        raise ApproxInputError(f"transform length must be a power of two, got {n}")
    lead = a.shape[:-1]
    h = 1
    while h < n:
        a = a.reshape(lead + (n // (2 * h), 2, h))
        x, y = a[..., 0, :], a[..., 1, :]
        a = np.stack((x + y, x - y), axis=-2).reshape(lead + (n,))
        h *= 2
    return a


def walsh_coefficients(values: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    """All M coefficients (1/M) sum_m values[m] theta^_k(w_m), k = 0..M-1."""
    rev = bit_reverse_permutation(grid.level)
    return fwht(np.asarray(values)[..., rev]) / grid.M


def walsh_synthesis(coefficients: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    """Node values of sum_k coefficients[k] theta^_k for k = 0..M-1."""
    coefficients = np.asarray(coefficients, dtype=np.complex128)
    padded = np.zeros(coefficients.shape[:-1] + (grid.M,), dtype=np.complex128)
    padded[..., : coefficients.shape[-1]] = coefficients
    return fwht(padded)[..., bit_reverse_permutation(grid.level)]


def walsh_rows(grid: SpectralGrid, indices: np.ndarray) -> np.ndarray:
    """theta^_k on the grid for each k in ``indices`` (rows of +-1)."""
    indices = np.asarray(indices, dtype=np.int64)
    if np.any(indices < 0) or np.any(indices >= grid.M):
        raise SequenceRangeError(f"Walsh indices must lie in [0, {grid.M}) for a grid of {grid.M} nodes")
    rev = bit_reverse_permutation(grid.level)
    return 1.0 - 2.0 * _parity(indices[:, None] & rev[None, :])


@dataclass(frozen=True)
class WalshSystem:
    """Walsh functions w_0..w_max_index at dyadic resolution ``level``."""

    max_index: int

    def __post_init__(self):
        if self.max_index < 0:
            raise ApproxInputError(f"max_index must be non-negative, got {self.max_index}")

    @property
    def level(self) -> int:
        """Smallest m with 2**m > max_index."""
        return int(self.max_index).bit_length()

    @property
    def sup_norm(self) -> float:
        return 1.0

    def values(self, grid: SpectralGrid) -> np.ndarray:
        if grid.level < self.level:
            raise SequenceRangeError(f"grid level {grid.level} is below the Walsh system level {self.level}")
        return walsh_rows(grid, np.arange(self.max_index + 1))


@dataclass(frozen=True, eq=False)
class MeasurementSystem:
    """Orthonormal family theta^_n on the grid with functionals c_n.

    Attributes:
        kind: ``"walsh"``, ``"fourier_exponentials"`` or ``"custom"``.
        grid: Spectral grid.
        max_index: Largest index (walsh: 0..max_index; fourier: -max..max).
        table: Rows theta^_0, theta^_1, ... for the custom kind.
    """

    kind: str
    grid: SpectralGrid
    max_index: int = 0
    table: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ApproxInputError(f"Unknown measurement system '{self.kind}'. Available systems: {list(KINDS)}")
        if self.kind == "walsh" and not (0 <= self.max_index < self.grid.M):
            raise SequenceRangeError(f"Walsh max_index must lie in [0, {self.grid.M}), got {self.max_index}")
        if self.kind == "fourier_exponentials" and self.max_index < 0:
            raise ApproxInputError(f"max_index must be non-negative, got {self.max_index}")
        if self.kind == "custom":
            if self.table is None:
                raise ApproxInputError("custom measurement system needs a table of node values")
            table = np.array(self.table, dtype=np.complex128)
            if table.ndim != 2 or table.shape[1] != self.grid.M:
                raise ApproxInputError(f"custom table must have shape (n, {self.grid.M}), got {table.shape}")
            table.setflags(write=False)
            object.__setattr__(self, "table", table)
            object.__setattr__(self, "max_index", table.shape[0] - 1)
            defect = self.orthonormality_defect()
            if defect > ORTHONORMAL_TOLERANCE:
                raise ApproxInputError(f"custom table is not orthonormal on the grid (defect {defect:.3e})")

    @property
    def first_index(self) -> int:
        return -self.max_index if self.kind == "fourier_exponentials" else 0

    def indices(self, N: Optional[int] = None) -> np.ndarray:
        """Indices summed up to stage N (all indices when N is None)."""
        N = self.max_index if N is None else N
        self._check_index(N)
        first = -N if self.kind == "fourier_exponentials" else 0
        return np.arange(first, N + 1)

    def _check_index(self, n: int) -> None:
        if not (self.first_index <= n <= self.max_index):
            raise SequenceRangeError(f"index {n} is outside [{self.first_index}, {self.max_index}] for {self.kind}")

    def rows(self, indices: np.ndarray) -> np.ndarray:
        indices = np.asarray(indices, dtype=np.int64)
        if self.kind == "walsh":
            return walsh_rows(self.grid, indices)
        if self.kind == "fourier_exponentials":
            return np.exp(1j * np.outer(indices, self.grid.nodes))
        return self.table[indices]

    def theta_hat_values(self, n: int) -> np.ndarray:
        self._check_index(n)
        return self.rows(np.array([n]))[0]

    def coefficients(self, values: np.ndarray, indices: np.ndarray) -> np.ndarray:
        """(1/2pi) int values * conj(theta^_n) for each n in ``indices``."""
        indices = np.asarray(indices, dtype=np.int64)
        if self.kind == "walsh":
            return walsh_coefficients(values, self.grid)[indices]
        if self.kind == "fourier_exponentials":
            return lattice_sum(values, -indices) / self.grid.M
        return self.rows(indices).conj() @ values / self.grid.M

    def responses(self, values: np.ndarray, indices: np.ndarray) -> np.ndarray:
        """(1/2pi) int values * theta^_n, i.e. (T theta_n)(t) for values = h^ e^{iwt}."""
        indices = np.asarray(indices, dtype=np.int64)
        if self.kind == "walsh":
            return walsh_coefficients(values, self.grid)[indices]
        if self.kind == "fourier_exponentials":
            return lattice_sum(values, indices) / self.grid.M
        return self.rows(indices) @ values / self.grid.M

    def sup_bound(self) -> float:
        """sup_n ||theta^_n||_inf over the nodes."""
        if self.kind == "walsh":
            return 1.0
        if self.kind == "fourier_exponentials":
            return 1.0
        return float(np.max(np.abs(self.table)))

    def orthonormality_defect(self) -> float:
        rows = self.rows(self.indices())
        gram = rows @ rows.conj().T / self.grid.M
        return float(np.max(np.abs(gram - np.eye(gram.shape[0]))))


def measure_c(spec: Spectrum, k: int, t: float) -> complex:
    """Walsh functional c_k(f, t) = (1/2pi) int f^ theta^_k e^{iwt}."""
    t = _check_time(t)
    if not (0 <= k < spec.grid.M):
        raise SequenceRangeError(f"Walsh index must lie in [0, {spec.grid.M}) for a grid of {spec.grid.M} nodes, got {k}")
    row = walsh_rows(spec.grid, np.array([k]))[0]
    return complex(np.sum(spec.values * row * np.exp(1j * spec.grid.nodes * t)) / spec.grid.M)


def measure_general(spec: Spectrum, system: MeasurementSystem, n: int) -> complex:
    """c_n(f) = (1/2pi) int f^ conj(theta^_n)."""
    if system.grid != spec.grid:
        raise ApproxInputError("measurement system and signal use different grids")
    return complex(np.sum(spec.values * np.conj(system.theta_hat_values(n))) / spec.grid.M)


def write_measurement_csv(path: str, indices: np.ndarray, values: np.ndarray) -> None:
    """Write a measurement vector as (n, re, im) rows."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["n", "re", "im"])
        for n, v in zip(indices, np.asarray(values, dtype=np.complex128)):
            writer.writerow([int(n), repr(float(v.real)), repr(float(v.imag))])


__all__ = [
    "bit_reverse_permutation",
    "walsh",
    "theta_hat",
    "fwht",
    "walsh_coefficients",
    "walsh_synthesis",
    "walsh_rows",
    "WalshSystem",
    "MeasurementSystem",
    "measure_c",
    "measure_general",
    "write_measurement_csv",
]
