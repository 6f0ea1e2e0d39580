"""Complete interpolating sampling sequences and their reconstruction functions.

A sequence is either the integers (``equidistant``) or a Kadec perturbation
t_k = k + delta_k with |delta_k| <= delta < 1/4 (``kadec``). Perturbations are
drawn for 0 < |k| <= support and vanish outside it, so the sequence is a
finite perturbation of the integers. The index window K only limits which
points and reconstruction functions are materialized; it never changes them.
The generating function

    phi(z) = z * prod_{k != 0} (1 - z/t_k)

splits into a finite product over 0 < |k| <= N_prod (N_prod >= support) and
the equidistant tail prod_{j > N_prod} (1 - z^2/j^2), which has the closed form
(N_prod!)^2 / (Gamma(N_prod + 1 - z) * Gamma(N_prod + 1 + z)).

Every reconstruction function phi_k is band-pi and vanishes at the integers
with |n| > max(K, support), so its transform is the trigonometric polynomial
sum_{|n| <= max(K, support)} phi_k(n) exp(-i n w).
"""

import csv
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy import linalg
from scipy.special import gammaln, loggamma

from .errors import ApproxInputError, GramDiagnosticError, SequenceRangeError, TruncationConfigError
from .spectral import SpectralGrid, Spectrum, TransferFunction, eval_lattice

RULES = ("equidistant", "kadec")
KADEC_LIMIT = 0.25
DEFAULT_SUPPORT = 256
MIN_PRODUCT_ORDER = 256
DEFAULT_SAMPLE_LENGTH = 512
HERMITIAN_TOLERANCE = 1e-12

# Evaluation points per block when forming product factors.
_PRODUCT_BLOCK = 64


@dataclass(frozen=True)
class SamplingSequence:
    """Ordered sampling points t_k with t_0 = 0.

    Attributes:
        rule: ``"equidistant"`` or ``"kadec"``.
        delta: Perturbation bound for the kadec rule, 0 <= delta < 1/4.
        seed: Non-negative seed of the perturbation generator.
        K: Index window; points t_k are materialized for |k| <= K.
        support: Perturbed indices 0 < |k| <= support (kadec only).
    """

    rule: str = "equidistant"
    delta: float = 0.0
    seed: int = 0
    K: int = 64
    support: int = DEFAULT_SUPPORT

    def __post_init__(self):
        if self.rule not in RULES:
            raise ApproxInputError(f"Unknown sampling rule '{self.rule}'. Available rules: {list(RULES)}")
        if not (0.0 <= self.delta < KADEC_LIMIT):
            raise ApproxInputError(f"kadec delta must lie in [0, 1/4), got {self.delta}")
        if self.seed < 0:
            raise ApproxInputError(f"seed must be non-negative, got {self.seed}")
        if self.K < 0:
            raise ApproxInputError(f"index window K must be non-negative, got {self.K}")
        if self.support < 0:
            raise ApproxInputError(f"perturbation support must be non-negative, got {self.support}")
        if self.rule == "equidistant":
            object.__setattr__(self, "delta", 0.0)
            object.__setattr__(self, "support", 0)
        object.__setattr__(self, "delta", float(self.delta))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "K", int(self.K))
        object.__setattr__(self, "support", int(self.support))

    @property
    def is_equidistant(self) -> bool:
        return self.rule == "equidistant"

    @property
    def radius(self) -> int:
        """Largest |n| with a possibly nonzero sample phi_k(n), |k| <= K."""
        return max(self.K, self.support)

    @property
    def label(self) -> str:
        if self.is_equidistant:
            return "equidistant"
        return f"kadec(delta={self.delta!r},seed={self.seed},support={self.support})"


@dataclass(frozen=True)
class GeneratingFunctionConfig:
    """Truncation of the generating-function product.

    Attributes:
        N_prod: Number of paired factors kept explicitly. ``None`` selects
            max(4 * max(K, support), 256). Evaluation is validated on
            |z| <= N_prod.
    """

    N_prod: Optional[int] = None

    def __post_init__(self):
        if self.N_prod is not None and self.N_prod < 1:
            raise TruncationConfigError(f"N_prod must be >= 1, got {self.N_prod}")

    def order(self, seq: SamplingSequence) -> int:
        """Resolve the product order for ``seq``.

        Raises:
            TruncationConfigError: If N_prod is smaller than the index window
                or the perturbation support.
        """
        order = self.N_prod if self.N_prod is not None else max(4 * seq.radius, MIN_PRODUCT_ORDER)
        if order < seq.radius:
            raise TruncationConfigError(
                f"N_prod = {order} is smaller than max(K, support) = {seq.radius} (K = {seq.K}, support = {seq.support})"
            )
        return int(order)


def _perturbation(seed: int, delta: float, k: int) -> float:
    """delta_k from a Philox stream keyed by (seed, k); delta_0 = 0."""
    if k == 0 or delta == 0.0:
        return 0.0
    key = 2 * k if k > 0 else -2 * k - 1
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, key])))
    return delta * (2.0 * rng.random() - 1.0)


@lru_cache(maxsize=32)
def _perturbations(seed: int, delta: float, support: int) -> np.ndarray:
    """delta_k for k = -support..support."""
    out = np.array([_perturbation(seed, delta, k) for k in range(-support, support + 1)])
    out.setflags(write=False)
    return out


def _points_upto(seq: SamplingSequence, R: int) -> np.ndarray:
    """t_k for k = -R..R."""
    t = np.arange(-R, R + 1, dtype=float)
    if not seq.is_equidistant and seq.delta > 0.0:
        S = min(R, seq.support)
        t[R - S : R + S + 1] += _perturbations(seq.seed, seq.delta, seq.support)[seq.support - S : seq.support + S + 1]
    return t


@lru_cache(maxsize=32)
def sequence_points(seq: SamplingSequence) -> np.ndarray:
    """All materialized points t_{-K}..t_K as a read-only array."""
    t = _points_upto(seq, seq.K)
    t.setflags(write=False)
    return t


def points(seq: SamplingSequence, k: int) -> float:
    """Return t_k.

    Raises:
        SequenceRangeError: If |k| > K.
    """
    if abs(k) > seq.K:
        raise SequenceRangeError(f"index {k} is outside the window |k| <= {seq.K}")
    return float(sequence_points(seq)[k + seq.K])


@lru_cache(maxsize=32)
def _product_nodes(seq: SamplingSequence, order: int) -> Tuple[np.ndarray, np.ndarray]:
    t = _points_upto(seq, order)
    pos = t[order + 1 :].copy()
    neg = t[order - 1 :: -1].copy()
    return pos, neg

def _check_radius(z: np.ndarray, order: int) -> None:
    if np.any(np.abs(z) > order):
        raise TruncationConfigError(
            f"|z| = {float(np.max(np.abs(z)))} exceeds the validated radius N_prod = {order}; raise N_prod"
        )


def _log_product(seq: SamplingSequence, order: int, z: np.ndarray, removed: Optional[int]) -> Tuple[np.ndarray, np.ndarray]:
    """Logarithm of phi(z) with the factor vanishing at t_removed taken out.

    ``removed`` is None for phi itself, 0 to drop the leading z, or k != 0 to
    drop (1 - z/t_k). Returns (log values, exact-zero mask).
    """
    z = np.asarray(z, dtype=np.complex128).ravel()
    _check_radius(z, order)
    pos, neg = _product_nodes(seq, order)
    logs = np.empty(z.size, dtype=np.complex128)
    zero = np.zeros(z.size, dtype=bool)
    for start in range(0, z.size, _PRODUCT_BLOCK):
        zb = z[start : start + _PRODUCT_BLOCK, None]
        a = 1.0 - zb / pos
        b = 1.0 - zb / neg
        if removed is not None and removed > 0:
            a[:, removed - 1] = 1.0
        elif removed is not None and removed < 0:
            b[:, -removed - 1] = 1.0
        pair = a * b
        hit = pair == 0
        zero[start : start + zb.shape[0]] = np.any(hit, axis=1)
        logs[start : start + zb.shape[0]] = np.sum(np.log(np.where(hit, 1.0, pair)), axis=1)
    if removed != 0:
        zero |= z == 0
        logs += np.log(np.where(z == 0, 1.0, z))
    logs += 2.0 * gammaln(order + 1.0) - loggamma(order + 1.0 - z) - loggamma(order + 1.0 + z)
    return logs, zero


def _exp_masked(logs: np.ndarray, zero: np.ndarray) -> np.ndarray:
    out = np.exp(logs)
    out[zero] = 0.0
    return out


def generating_function(seq: SamplingSequence, z: complex, cfg: Optional[GeneratingFunctionConfig] = None) -> complex:
    """Evaluate phi(z), paired finite product times the closed-form tail.

    Raises:
        TruncationConfigError: If |z| exceeds the validated radius N_prod.
    """
    order = (cfg or GeneratingFunctionConfig()).order(seq)
    logs, zero = _log_product(seq, order, np.array([z]), None)
    return complex(_exp_masked(logs, zero)[0])


def generating_derivative(seq: SamplingSequence, k: int, cfg: Optional[GeneratingFunctionConfig] = None) -> float:
    """phi'(t_k) with the vanishing factor removed analytically."""
    t_k = points(seq, k)
    if k == 0:
        return 1.0
    order = (cfg or GeneratingFunctionConfig()).order(seq)
    logs, _ = _log_product(seq, order, np.array([t_k]), k)
    return float(-np.exp(logs[0]).real / t_k)


def phi_k(seq: SamplingSequence, k: int, t: float, cfg: Optional[GeneratingFunctionConfig] = None) -> float:
    """Reconstruction function phi_k(t) = phi(t) / (phi'(t_k) (t - t_k)).

    Equidistant sequences use the closed form sinc(t - k). Otherwise the
    ratio is formed as R_k(t)/R_k(t_k) with R_k = phi stripped of its
    vanishing factor, and phi_k(t_k) = 1 exactly.
    """
    t_k = points(seq, k)
    if seq.is_equidistant:
        return float(np.sinc(t - k))
    if t == t_k:
        return 1.0
    order = (cfg or GeneratingFunctionConfig()).order(seq)
    logs, zero = _log_product(seq, order, np.array([t, t_k]), k)
    if zero[0]:
        return 0.0
    return float(np.exp(logs[0] - logs[1]).real)


@lru_cache(maxsize=16)
def sample_matrix(seq: SamplingSequence, order: int) -> np.ndarray:
    """Integer samples phi_k(n) for |k| <= K, |n| <= max(K, support).

    Rows are k = -K..K, columns n = -R..R with R = ``seq.radius``.
    """
    K, R = seq.K, seq.radius
    if seq.is_equidistant:
        out = np.eye(2 * K + 1, 2 * R + 1, R - K)
        out.setflags(write=False)
        return out
    t = sequence_points(seq)
    n = np.arange(-R, R + 1, dtype=float)
    logs, zero = _log_product(seq, order, n, None)
    phi_n = _exp_masked(logs, zero).real
    deriv = np.ones(2 * K + 1)
    diagonal = np.ones(2 * K + 1)
    for row, k in enumerate(range(-K, K + 1)):
        if k == 0:
            continue
        reduced, hit = _log_product(seq, order, np.array([t[row], float(k)]), k)
        deriv[row] = -np.exp(reduced[0]).real / t[row]
        diagonal[row] = 0.0 if hit[1] else np.exp(reduced[1] - reduced[0]).real
    diff = n[None, :] - t[:, None]
    out = phi_n[None, :] / (deriv[:, None] * np.where(diff == 0, 1.0, diff))
    # n = k: |n - t_k| <= delta, so take the ratio form instead
    out[np.arange(2 * K + 1), np.arange(2 * K + 1) + (R - K)] = diagonal
    out.setflags(write=False)
    return out


def _samples(seq: SamplingSequence, cfg: Optional[GeneratingFunctionConfig]) -> np.ndarray:
    return sample_matrix(seq, (cfg or GeneratingFunctionConfig()).order(seq))


def _check_stage(seq: SamplingSequence, N: int) -> None:
    if N < 0:
        raise ApproxInputError(f"stage N must be non-negative, got {N}")
    if N > seq.K:
        raise SequenceRangeError(f"stage N = {N} exceeds the sequence window K = {seq.K}")


def spectrum_from_samples(samples: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    """Node values of sum_n samples[n] exp(-i n w) for n centred on 0.

    ``samples`` has odd length 2R+1 along its last axis, indexed n = -R..R.
    """
    samples = np.asarray(samples, dtype=np.complex128)
    radius = (samples.shape[-1] - 1) // 2
    n = np.arange(-radius, radius + 1)
    buf = np.zeros(samples.shape[:-1] + (grid.M,), dtype=np.complex128)
    signed = samples * np.where(n % 2 == 0, 1.0, -1.0)
    if 2 * radius + 1 <= grid.M:
        buf[..., np.mod(n, grid.M)] = signed
    else:
        for col, idx in enumerate(np.mod(n, grid.M)):
            buf[..., idx] += signed[..., col]
    return np.fft.fft(buf, axis=-1)


def phi_hat_k(
    seq: SamplingSequence,
    k: int,
    grid: SpectralGrid,
    L: Optional[int] = None,
    cfg: Optional[GeneratingFunctionConfig] = None,
) -> Spectrum:
    """Fourier transform of phi_k from its integer samples |n| <= L.

    Samples vanish for |n| > max(K, support), so any L at or above that
    radius yields the same transform.

    Raises:
        TruncationConfigError: If L < max(K, support).
    """
    points(seq, k)
    L = max(DEFAULT_SAMPLE_LENGTH, seq.radius) if L is None else L
    if seq.is_equidistant:
        return Spectrum(grid, np.exp(-1j * grid.nodes * k))
    if L < seq.radius:
        raise TruncationConfigError(
            f"sample length L = {L} is below max(K, support) = {seq.radius}; samples beyond L are nonzero"
        )
    row = _samples(seq, cfg)[k + seq.K]
    return Spectrum(grid, spectrum_from_samples(row, grid))


def reconstruction_spectra(
    seq: SamplingSequence, N: int, grid: SpectralGrid, cfg: Optional[GeneratingFunctionConfig] = None
) -> np.ndarray:
    """Rows phi^_k on the grid for k = -N..N."""
    _check_stage(seq, N)
    if seq.is_equidistant:
        return np.exp(-1j * np.outer(np.arange(-N, N + 1), grid.nodes))
    rows = _samples(seq, cfg)[seq.K - N : seq.K + N + 1]
    return spectrum_from_samples(rows, grid)


def combine_spectra(
    seq: SamplingSequence,
    coefficients: np.ndarray,
    grid: SpectralGrid,
    cfg: Optional[GeneratingFunctionConfig] = None,
) -> np.ndarray:
    """Node values of sum_{k=-N..N} coefficients[k] * phi^_k, N = (len - 1)/2."""
    coefficients = np.asarray(coefficients, dtype=np.complex128)
    N = (coefficients.size - 1) // 2
    _check_stage(seq, N)
    if seq.is_equidistant:
        return spectrum_from_samples(coefficients, grid)
    rows = _samples(seq, cfg)[seq.K - N : seq.K + N + 1]
    return spectrum_from_samples(coefficients @ rows, grid)


def system_responses(
    seq: SamplingSequence,
    T: TransferFunction,
    t: float,
    N: int,
    cfg: Optional[GeneratingFunctionConfig] = None,
) -> np.ndarray:
    """(T phi_k)(t) for k = -N..N, via sum_n phi_k(n) h_T(t - n)."""
    _check_stage(seq, N)
    if seq.is_equidistant:
        k = np.arange(-N, N + 1)
        return eval_lattice(T.values, T.grid, t, -k)
    n = np.arange(-seq.radius, seq.radius + 1)
    h = eval_lattice(T.values, T.grid, t, -n)
    return _samples(seq, cfg)[seq.K - N : seq.K + N + 1] @ h


def parseval_residual(
    seq: SamplingSequence,
    k: int,
    grid: SpectralGrid,
    L: Optional[int] = None,
    cfg: Optional[GeneratingFunctionConfig] = None,
) -> float:
    """| (1/2pi) int |phi^_k|^2 - sum_{|n| <= L} |phi_k(n)|^2 | on the grid."""
    spec = phi_hat_k(seq, k, grid, L=L, cfg=cfg)
    energy = np.sum(np.abs(spec.values) ** 2) / grid.M
    if seq.is_equidistant:
        return float(abs(energy - 1.0))
    row = _samples(seq, cfg)[k + seq.K]
    return float(abs(energy - np.sum(row**2)))


def gram_matrix(
    seq: SamplingSequence, n_max: int, grid: SpectralGrid, cfg: Optional[GeneratingFunctionConfig] = None
) -> np.ndarray:
    """G_jk = (1/2pi) int phi^_j conj(phi^_k) for |j|, |k| <= n_max."""
    if n_max < 1:
        raise ApproxInputError(f"n_max must be >= 1, got {n_max}")
    rows = reconstruction_spectra(seq, n_max, grid, cfg)
    return rows @ rows.conj().T / grid.M


def gram_eigenvalues(gram: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian Gram section.

    Raises:
        GramDiagnosticError: If the matrix is not Hermitian within 1e-12 or
            not numerically positive definite.
    """
    scale = max(1.0, float(np.max(np.abs(gram))))
    asymmetry = float(np.max(np.abs(gram - gram.conj().T)))
    hermitian = 0.5 * (gram + gram.conj().T)
    eigenvalues = linalg.eigvalsh(hermitian)
    if asymmetry > HERMITIAN_TOLERANCE * scale:
        raise GramDiagnosticError(f"Gram matrix is not Hermitian (max asymmetry {asymmetry:.3e})", eigenvalues)
    if eigenvalues[0] <= 0.0:
        raise GramDiagnosticError(
            f"Gram matrix is not positive definite (smallest eigenvalue {eigenvalues[0]:.3e})", eigenvalues
        )
    return eigenvalues


def riesz_bounds_estimate(
    seq: SamplingSequence,
    n_max: int,
    cfg: Optional[GeneratingFunctionConfig] = None,
    grid: Optional[SpectralGrid] = None,
) -> Tuple[float, float]:
    """Finite-section Riesz bounds (A, B): extreme Gram eigenvalues."""
    eigenvalues = gram_eigenvalues(gram_matrix(seq, n_max, grid or SpectralGrid(), cfg))
    return float(eigenvalues[0]), float(eigenvalues[-1])


def write_gram_csv(path: str, gram: np.ndarray) -> None:
    """Write a Gram section as (j, k, re, im) rows, indices centred on 0."""
    n_max = (gram.shape[0] - 1) // 2
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["j", "k", "re", "im"])
        for j in range(-n_max, n_max + 1):
            for k in range(-n_max, n_max + 1):
                v = gram[j + n_max, k + n_max]
                writer.writerow([j, k, repr(float(v.real)), repr(float(v.imag))])


__all__ = [
    "SamplingSequence",
    "GeneratingFunctionConfig",
    "sequence_points",
    "points",
    "generating_function",
    "generating_derivative",
    "phi_k",
    "sample_matrix",
    "spectrum_from_samples",
    "phi_hat_k",
    "reconstruction_spectra",
    "combine_spectra",
    "system_responses",
    "parseval_residual",
    "gram_matrix",
    "gram_eigenvalues",
    "riesz_bounds_estimate",
    "write_gram_csv",
]
