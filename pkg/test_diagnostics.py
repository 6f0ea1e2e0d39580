"""Tests for kernel norms, Lebesgue constants, extremal systems and growth fits."""

import math

import numpy as np
import pytest

from SignalModel.errors import ApproxInputError, SequenceRangeError
from SignalModel.sampler import SamplingSequence
from SignalModel.spectral import SpectralGrid, identity_transfer
from SystemApprox.diagnostics import (
    FOUR_OVER_PI_SQUARED,
    achieved_value,
    adversarial_transfer,
    dirichlet_lebesgue,
    growth_fit,
    kernel_l1,
    kernel_l1_profile,
    kernel_probe,
    walsh_dyadic_kernel_l1,
    worst_case_signal_value,
)

EQUI = SamplingSequence("equidistant", K=512)
KADEC = SamplingSequence("kadec", delta=0.1, seed=1, K=128)


def lebesgue_oracle(N):
    """(1/pi) sum over the lobes of |F(b) - F(a)|, F(x) = x + 2 sum_k sin(kx)/k."""
    k = np.arange(1, N + 1)

    def F(x):
        return x + 2.0 * np.sum(np.sin(k * x) / k)

    edges = [2.0 * np.pi * j / (2 * N + 1) for j in range(N + 1)] + [np.pi]
    return sum(abs(F(b) - F(a)) for a, b in zip(edges[:-1], edges[1:])) / np.pi


def test_lebesgue_small_values():
    assert dirichlet_lebesgue(0) == 1.0
    assert dirichlet_lebesgue(1) == pytest.approx(1.0 / 3.0 + 2.0 * math.sqrt(3.0) / math.pi, rel=1e-12)


@pytest.mark.parametrize("N", [1, 2, 3, 5, 8, 13, 16, 31, 32, 64])
def test_lebesgue_matches_oracle(N):
    assert dirichlet_lebesgue(N, SpectralGrid(4096)) == pytest.approx(lebesgue_oracle(N), rel=1e-6)


def test_lebesgue_strictly_increasing():
    grid = SpectralGrid(4096)
    stages = [0, 1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096]
    values = [dirichlet_lebesgue(N, grid) for N in stages]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_lebesgue_log_growth_rate():
    """Growth per unit of ln N approaches 4/pi^2."""
    grid = SpectralGrid(4096)
    stages = [256, 512, 1024, 2048, 4096]
    values = [dirichlet_lebesgue(N, grid) for N in stages]
    fit = growth_fit(stages, values)
    assert fit.slope == pytest.approx(FOUR_OVER_PI_SQUARED, rel=0.1)
    increment = (values[3] - values[2]) / (math.log(2048) - math.log(1024))
    assert increment == pytest.approx(FOUR_OVER_PI_SQUARED, rel=0.1)


def test_lebesgue_rejects_negative_degree():
    with pytest.raises(ApproxInputError):
        dirichlet_lebesgue(-1)


@pytest.mark.parametrize("N", [4, 8, 16])
def test_equidistant_kernel_is_dirichlet(N):
    """For the integers at omega = 0 the kernel is the Dirichlet kernel."""
    grid = SpectralGrid(1 << 20)
    assert kernel_l1(EQUI, 0.0, N, grid) == pytest.approx(dirichlet_lebesgue(N), abs=1e-8)


def test_kernel_at_stage_zero():
    assert kernel_l1(EQUI, 0.0, 0, SpectralGrid(256)) == pytest.approx(1.0, abs=1e-12)


def test_kernel_probe_and_range():
    grid = SpectralGrid(256)
    probe = kernel_probe(EQUI, 0.5, 4, grid)
    assert probe.sequence == "equidistant"
    assert probe.l1_value == pytest.approx(kernel_l1(EQUI, 0.5, 4, grid))
    with pytest.raises(ApproxInputError):
        kernel_l1(EQUI, 4.0, 4, grid)
    with pytest.raises(SequenceRangeError):
        kernel_l1(KADEC, 0.0, 129, grid)


@pytest.mark.parametrize("seq", [EQUI, KADEC])
def test_kernel_profile(seq):
    grid = SpectralGrid(1024)
    values, running = kernel_l1_profile(seq, 1.0, 12, grid)
    assert values.shape == running.shape == (12,)
    assert np.all(np.diff(running) >= 0)
    for M in (1, 6, 12):
        assert values[M - 1] == pytest.approx(kernel_l1(seq, 1.0, M, grid), rel=1e-12)


@pytest.mark.parametrize("N", range(11))
def test_walsh_dyadic_kernel_is_one(N):
    grid = SpectralGrid(4096)
    for omega in np.linspace(-np.pi, np.pi, 16, endpoint=False) + 0.1:
        assert walsh_dyadic_kernel_l1(omega, N, grid) == pytest.approx(1.0, abs=1e-12)


def test_walsh_dyadic_kernel_inclusive_limit():
    grid = SpectralGrid(4096)
    for N in (1, 3, 6):
        assert walsh_dyadic_kernel_l1(0.7, N, grid, inclusive=True) == pytest.approx(2.0 - 2.0**-N, abs=1e-12)


def test_walsh_dyadic_kernel_range():
    with pytest.raises(SequenceRangeError):
        walsh_dyadic_kernel_l1(0.0, 7, SpectralGrid(64))
    with pytest.raises(ApproxInputError):
        walsh_dyadic_kernel_l1(4.0, 2, SpectralGrid(64))


def test_walsh_dyadic_kernel_at_the_band_edges():
    """pi is identified with -pi; the last double below pi sits in the last cell."""
    grid = SpectralGrid(64)
    for N in (0, 2, 3, 5):
        assert walsh_dyadic_kernel_l1(np.pi, N, grid) == walsh_dyadic_kernel_l1(-np.pi, N, grid)
        assert walsh_dyadic_kernel_l1(np.nextafter(np.pi, 0.0), N, grid) == pytest.approx(1.0, abs=1e-12)
    assert walsh_dyadic_kernel_l1(np.pi, 3, grid, inclusive=True) == pytest.approx(2.0 - 2.0**-3, abs=1e-12)


def test_adversarial_transfer_is_unimodular():
    T = adversarial_transfer(KADEC, 1.0, 0.3, 16, SpectralGrid(1024))
    assert np.allclose(np.abs(T.values), 1.0, atol=1e-12)
    assert T.sup_norm == pytest.approx(1.0)


@pytest.mark.parametrize("seq", [EQUI, KADEC])
def test_extremality(seq):
    """The adversarial system attains the kernel norm."""
    grid = SpectralGrid(4096)
    for omega in (0.0, 1.0, 2.0):
        for t in (0.0, 0.3):
            for N in (8, 32, 128):
                T = adversarial_transfer(seq, omega, t, N, grid)
                norm = kernel_l1(seq, omega, N, grid)
                assert achieved_value(seq, omega, t, N, T) == pytest.approx(norm, rel=1e-6)


def test_worst_case_identity_is_one():
    """With T = I at t = 0 only the k = 0 response survives."""
    grid = SpectralGrid(1024)
    value, _ = worst_case_signal_value(identity_transfer(grid), SamplingSequence(K=32), 16, 0.0, np.pi)
    assert value == pytest.approx(1.0, abs=1e-12)


def test_worst_case_band_checks():
    T = identity_transfer(SpectralGrid(64))
    seq = SamplingSequence(K=8)
    with pytest.raises(ApproxInputError):
        worst_case_signal_value(T, seq, 4, 0.0, 0.0)
    with pytest.raises(ApproxInputError):
        worst_case_signal_value(T, seq, 4, 0.0, 1.0, sigma_low=1.0)


def test_worst_case_bandpass_argmax_in_band():
    grid = SpectralGrid(1024)
    T = adversarial_transfer(EQUI, 0.0, 0.0, 64, grid)
    _, argmax = worst_case_signal_value(T, EQUI, 32, 0.0, 2.0, sigma_low=1.0)
    assert 1.0 <= abs(argmax) <= 2.0


def test_divergence_witness():
    """Worst-case values grow like log N for the adversarial system."""
    grid = SpectralGrid(4096)
    T = adversarial_transfer(EQUI, 0.0, 0.0, 512, grid)
    stages = [16, 32, 64, 128, 256, 512]
    values = [worst_case_signal_value(T, EQUI, N, 0.0, np.pi)[0] for N in stages]
    assert all(b > a for a, b in zip(values, values[1:]))
    assert growth_fit(stages, values).slope > 0.2


def test_growth_fit_exact_line():
    stages = [0, 2, 4, 8, 16]
    values = [99.0] + [2.0 * math.log(N) + 3.0 for N in stages[1:]]
    fit = growth_fit(stages, values)
    assert fit.stages == (2, 4, 8, 16)
    assert fit.slope == pytest.approx(2.0)
    assert fit.intercept == pytest.approx(3.0)
    assert fit.residual < 1e-12


def test_growth_fit_needs_three_points():
    with pytest.raises(ApproxInputError):
        growth_fit([0, 4, 8], [1.0, 2.0, 3.0])
    with pytest.raises(ApproxInputError):
        growth_fit([2, 4, 8], [1.0, -2.0, 3.0])
