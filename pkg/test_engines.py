"""Tests for the approximation engines and the sup-error scans."""

import asyncio

import numpy as np
import pytest

from SignalModel.errors import ApproxInputError, SequenceRangeError
from SignalModel.measurements import MeasurementSystem
from SignalModel.sampler import SamplingSequence, phi_hat_k
from SignalModel.spectral import (
    SpectralGrid,
    Spectrum,
    apply_system,
    bandlimited_random_spectrum,
    constant_spectrum,
    eval_signal,
    hilbert_transfer,
    identity_transfer,
    lowpass_transfer,
    triangle_spectrum,
    zero_spectrum,
)
from SystemApprox.approximator import SystemApproximator, sup_error_scan, sup_error_scan_async, worker_count
from SystemApprox.base_engine import ApproxResult, symmetric_partial_sums
from SystemApprox.diagnostics import growth_fit, worst_case_signal_value
from SystemApprox.functional_engines import (
    FunctionalSystemEngine,
    WalshDyadicEngineA,
    WalshDyadicEngineB,
    dyadic_limit,
    functional_system_approx,
    walsh_dyadic_approx_A,
    walsh_dyadic_approx_B,
)
from SystemApprox.sampling_engines import (
    SamplingSystemEngine,
    ShannonOversampledEngine,
    sampling_system_approx,
    shannon_oversampled,
)

T_GRID = np.linspace(-8.0, 8.0, 65)


def _sup_errors(report):
    return report.column("abs_error")


def test_approx_result_error():
    result = ApproxResult("sampling", 3, 0.0, 1.0 + 1.0j, 1.0)
    assert result.abs_error == 1.0


def test_symmetric_partial_sums():
    terms = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    assert list(symmetric_partial_sums(terms, [0, 1, 2])) == [3.0, 9.0, 15.0]


def test_sampling_reproduces_full_band_sinc():
    """f(k) = delta_k0, so every stage returns f(t) itself."""
    grid = SpectralGrid(1024)
    f = constant_spectrum(grid)
    seq = SamplingSequence("equidistant", K=16)
    for t in (0.0, 0.37, -5.2):
        assert sampling_system_approx(f, identity_transfer(grid), seq, 4, t).abs_error < 1e-12


def test_sampling_exact_at_integers_inside_window():
    grid = SpectralGrid(1024)
    f = bandlimited_random_spectrum(grid, seed=1, band=np.pi)
    seq = SamplingSequence("equidistant", K=16)
    engine = SamplingSystemEngine(f, identity_transfer(grid), seq)
    for t in (-8.0, 0.0, 3.0):
        assert engine.approximate(10, t).abs_error < 1e-12


def test_sampling_kadec_converges():
    grid = SpectralGrid(2048)
    f = triangle_spectrum(grid)
    seq = SamplingSequence("kadec", delta=0.1, seed=1, K=64)
    errors = _sup_errors(sup_error_scan("sampling", f, identity_transfer(grid), [4, 64], T_GRID, seq=seq))
    assert errors[1] < 0.05
    assert errors[1] < errors[0]


def test_sampling_stage_beyond_window():
    grid = SpectralGrid(256)
    engine = SamplingSystemEngine(triangle_spectrum(grid), identity_transfer(grid), SamplingSequence(K=8))
    with pytest.raises(SequenceRangeError):
        engine.approximate(9, 0.0)


def test_oversampled_a1_matches_sampling():
    grid = SpectralGrid(1024)
    f = bandlimited_random_spectrum(grid, seed=4, band=np.pi)
    T = lowpass_transfer(grid, 2.0)
    seq = SamplingSequence("equidistant", K=32)
    for t in (0.0, 1.3):
        a = shannon_oversampled(f, T, 1.0, 32, t)
        b = sampling_system_approx(f, T, seq, 32, t)
        assert a.value == pytest.approx(b.value, abs=1e-12)


def test_oversampling_benefit():
    """Band pi/2 signal: a = 2 with the transition kernel beats a = 1."""
    grid = SpectralGrid(4096)
    f = bandlimited_random_spectrum(grid, seed=11, band=np.pi / 2)
    T = identity_transfer(grid)
    base = _sup_errors(sup_error_scan("oversampled", f, T, [128], T_GRID, a=1.0))[0]
    over = _sup_errors(sup_error_scan("oversampled", f, T, [128], T_GRID, a=2.0, kernel="transition"))[0]
    assert over < base


def test_oversampled_non_integer_factor():
    grid = SpectralGrid(512)
    f = bandlimited_random_spectrum(grid, seed=4, band=np.pi / 2)
    result = ShannonOversampledEngine(f, identity_transfer(grid), a=1.5).approximate(16, 0.2)
    assert np.isfinite(result.value)
    assert result.flags == "a=1.5;kernel=system"


def test_oversampled_rejects_bad_options():
    grid = SpectralGrid(64)
    f = triangle_spectrum(grid)
    with pytest.raises(ApproxInputError):
        ShannonOversampledEngine(f, identity_transfer(grid), a=0.5)
    with pytest.raises(ApproxInputError):
        ShannonOversampledEngine(f, identity_transfer(grid), kernel="lanczos")


def test_functional_fourier_matches_sampling():
    """Fourier exponentials turn the functional process into the sampling series."""
    grid = SpectralGrid(1024)
    f = bandlimited_random_spectrum(grid, seed=6, band=np.pi)
    T = hilbert_transfer(grid)
    system = MeasurementSystem("fourier_exponentials", grid, 20)
    functional = FunctionalSystemEngine(f, T, system)
    sampling = SamplingSystemEngine(f, T, SamplingSequence(K=20))
    for t in (0.0, 0.45, -3.1):
        assert np.allclose(functional.stage_values([0, 5, 20], t), sampling.stage_values([0, 5, 20], t), atol=1e-12)


def test_functional_stage_beyond_system():
    grid = SpectralGrid(256)
    engine = FunctionalSystemEngine(triangle_spectrum(grid), identity_transfer(grid), MeasurementSystem("walsh", grid, 15))
    with pytest.raises(SequenceRangeError):
        engine.check_stages([16])


def test_dyadic_limit():
    assert dyadic_limit(3) == 7
    assert dyadic_limit(3, inclusive=True) == 8
    with pytest.raises(ApproxInputError):
        dyadic_limit(-1)


def test_walsh_limit_beyond_grid():
    grid = SpectralGrid(64)
    f = triangle_spectrum(grid)
    T = hilbert_transfer(grid)
    WalshDyadicEngineA(f, T).check_stages([6])
    with pytest.raises(SequenceRangeError):
        WalshDyadicEngineA(f, T).check_stages([7])
    with pytest.raises(SequenceRangeError):
        WalshDyadicEngineB(f, T, inclusive=True).check_stages([6])


def test_walsh_engines_agree_at_zero():
    grid = SpectralGrid(1024)
    f = triangle_spectrum(grid)
    T = hilbert_transfer(grid)
    for N in (2, 5, 8):
        a = walsh_dyadic_approx_A(f, T, N, 0.0)
        b = walsh_dyadic_approx_B(f, T, N, 0.0)
        assert a.value == b.value
        assert a.flags == "classical"


def test_walsh_dyadic_convergence():
    """Triangle spectrum through the Hilbert transform: small, decreasing sup error."""
    grid = SpectralGrid(4096)
    f = triangle_spectrum(grid)
    T = hilbert_transfer(grid)
    stages = [5, 6, 7, 8, 9, 10]
    for engine in ("walsh-a", "walsh-b"):
        errors = _sup_errors(sup_error_scan(engine, f, T, stages, T_GRID))
        assert errors[-1] < 1e-2
        rises = [(e0, e1) for e0, e1 in zip(errors, errors[1:]) if e1 >= e0]
        assert len(rises) <= 1
        assert all(e1 < 1.05 * e0 for e0, e1 in rises)


def test_unknown_engine():
    with pytest.raises(ValueError, match="Available engines"):
        SystemApproximator(engine="chebyshev")


def test_scan_rejects_bad_inputs():
    grid = SpectralGrid(64)
    f = triangle_spectrum(grid)
    T = identity_transfer(grid)
    runner = SystemApproximator("oversampled", threads=1)
    with pytest.raises(ApproxInputError):
        runner.scan(f, T, [], T_GRID)
    with pytest.raises(ApproxInputError):
        runner.scan(f, T, [2], [1.0, 0.0])
    with pytest.raises(ApproxInputError):
        runner.scan(f, T, [2], [])


def test_async_scan_matches_sequential():
    grid = SpectralGrid(512)
    f = bandlimited_random_spectrum(grid, seed=2, band=np.pi / 2)
    T = hilbert_transfer(grid)
    seq = SamplingSequence(K=32)
    sequential = SystemApproximator("sampling", {"seq": seq}, threads=1).scan(f, T, [4, 16, 32], T_GRID)
    threaded = asyncio.run(sup_error_scan_async("sampling", f, T, [4, 16, 32], T_GRID, threads=3, seq=seq))
    assert threaded.to_csv() == sequential.to_csv()


def test_worker_count(monkeypatch):
    monkeypatch.delenv("PWAPPROX_THREADS", raising=False)
    assert worker_count() == 1
    monkeypatch.setenv("PWAPPROX_THREADS", "4")
    assert worker_count() == 4
    monkeypatch.setenv("PWAPPROX_THREADS", "many")
    assert worker_count() == 1
    monkeypatch.setenv("PWAPPROX_THREADS", "0")
    assert worker_count() == 1


def _all_engine_values(f, T, t):
    grid = f.grid
    kadec = SamplingSequence("kadec", delta=0.1, seed=1, K=16)
    walsh = MeasurementSystem("walsh", grid, 63)
    return np.array(
        [
            sampling_system_approx(f, T, SamplingSequence(K=16), 12, t).value,
            sampling_system_approx(f, T, kadec, 12, t).value,
            shannon_oversampled(f, T, 2.0, 24, t).value,
            functional_system_approx(f, T, walsh, 40, t).value,
            walsh_dyadic_approx_A(f, T, 5, t).value,
            walsh_dyadic_approx_B(f, T, 5, t, inclusive=True).value,
        ]
    )


def test_engines_are_linear_in_the_signal():
    grid = SpectralGrid(1024)
    f = bandlimited_random_spectrum(grid, seed=11, band=np.pi / 2)
    g = triangle_spectrum(grid, band=np.pi / 2)
    alpha, beta = 1.5 + 0.5j, -0.75
    combined = Spectrum(grid, alpha * f.values + beta * g.values, np.pi / 2)
    T = hilbert_transfer(grid)
    for t in (0.0, 0.8):
        lhs = _all_engine_values(combined, T, t)
        rhs = alpha * _all_engine_values(f, T, t) + beta * _all_engine_values(g, T, t)
        assert np.allclose(lhs, rhs, rtol=0.0, atol=1e-12)


def test_engines_vanish_on_the_zero_signal():
    grid = SpectralGrid(1024)
    for T in (identity_transfer(grid), hilbert_transfer(grid)):
        for t in (0.0, -2.3):
            assert np.all(_all_engine_values(zero_spectrum(grid), T, t) == 0)


def test_first_stage_is_a_single_term():
    """Stage 0 keeps only f(0) (T phi_0)(t), or f(0) (T theta_0)(t) for the dyadic engines."""
    grid = SpectralGrid(1024)
    f = bandlimited_random_spectrum(grid, seed=13, band=np.pi)
    T = lowpass_transfer(grid, 2.2)
    f0 = eval_signal(f, 0.0)
    kadec = SamplingSequence("kadec", delta=0.1, seed=1, K=8)
    for t in (0.0, 1.7):
        for seq in (SamplingSequence(K=8), kadec):
            response = eval_signal(apply_system(T, phi_hat_k(seq, 0, grid)), t)
            assert sampling_system_approx(f, T, seq, 0, t).value == pytest.approx(f0 * response, abs=1e-12)
        h_t = eval_signal(Spectrum(grid, T.values), t)
        assert walsh_dyadic_approx_A(f, T, 0, t).value == pytest.approx(f0 * h_t, abs=1e-12)


def test_dyadic_engine_is_a_projection():
    """Classical limit: (1/2pi) int f^ P_N(h^ e^{iwt}) with P_N the level-N cell average."""
    grid = SpectralGrid(1024)
    f = bandlimited_random_spectrum(grid, seed=5, band=np.pi)
    T = hilbert_transfer(grid)
    for N in (0, 3, 6):
        for t in (0.0, 0.9, -2.4):
            target = (T.values * np.exp(1j * grid.nodes * t)).reshape(1 << N, -1)
            projected = np.repeat(target.mean(axis=1), grid.M >> N)
            expected = np.sum(f.values * projected) / grid.M
            assert walsh_dyadic_approx_A(f, T, N, t).value == pytest.approx(expected, abs=1e-12)


def test_hilbert_sampling_series_has_growing_norm():
    """Near the window edge the Hilbert sampling process norm grows like log N."""
    grid = SpectralGrid(4096)
    H = hilbert_transfer(grid)
    seq = SamplingSequence(K=128)
    stages = [8, 16, 32, 64, 128]
    values = [worst_case_signal_value(H, seq, N, N + 0.5, np.pi)[0] for N in stages]
    assert all(b > a for a, b in zip(values, values[1:]))
    assert values[-1] - values[0] > 0.5
    assert growth_fit(stages, values).slope > 0.2
