"""Tests for sampling sequences, reconstruction functions and Gram diagnostics."""

import numpy as np
import pytest

from SignalModel.errors import ApproxInputError, GramDiagnosticError, SequenceRangeError, TruncationConfigError
from SignalModel.sampler import (
    GeneratingFunctionConfig,
    SamplingSequence,
    gram_eigenvalues,
    gram_matrix,
    generating_derivative,
    generating_function,
    parseval_residual,
    phi_hat_k,
    phi_k,
    points,
    reconstruction_spectra,
    riesz_bounds_estimate,
    sample_matrix,
    sequence_points,
    write_gram_csv,
)
from SignalModel.spectral import SpectralGrid

KADEC = SamplingSequence("kadec", delta=0.1, seed=1, K=64)
EQUI = SamplingSequence("equidistant", K=64)


def test_sequence_validation():
    with pytest.raises(ApproxInputError):
        SamplingSequence("random")
    with pytest.raises(ApproxInputError):
        SamplingSequence("kadec", delta=0.25)
    with pytest.raises(ApproxInputError):
        SamplingSequence("kadec", delta=0.1, seed=-1)


def test_equidistant_ignores_delta():
    assert SamplingSequence("equidistant", delta=0.2).delta == 0.0


def test_kadec_points():
    """t_0 = 0, |t_k - k| <= delta, strictly increasing."""
    t = sequence_points(KADEC)
    k = np.arange(-KADEC.K, KADEC.K + 1)
    assert points(KADEC, 0) == 0.0
    assert np.all(np.abs(t - k) <= 0.1)
    assert np.all(np.diff(t) > 0)
    assert np.any(t != k)


def test_points_are_seeded():
    same = SamplingSequence("kadec", delta=0.1, seed=1, K=64)
    other = SamplingSequence("kadec", delta=0.1, seed=2, K=64)
    assert points(same, 5) == points(KADEC, 5)
    assert not np.array_equal(sequence_points(other), sequence_points(KADEC))


def test_points_outside_window():
    with pytest.raises(SequenceRangeError):
        points(KADEC, 65)


def test_sequence_support_validation():
    with pytest.raises(ApproxInputError):
        SamplingSequence("kadec", delta=0.1, support=-1)
    assert SamplingSequence("equidistant", support=40).support == 0
    assert KADEC.radius == 256
    assert SamplingSequence("kadec", delta=0.1, K=300, support=16).radius == 300


def test_perturbations_stop_at_the_support():
    seq = SamplingSequence("kadec", delta=0.2, seed=3, K=40, support=24)
    t = sequence_points(seq)
    k = np.arange(-40, 41)
    outside = np.abs(k) > 24
    assert np.array_equal(t[outside], k[outside].astype(float))
    assert np.all(t[~outside & (k != 0)] != k[~outside & (k != 0)])


def test_window_does_not_change_the_sequence():
    """Points, phi, phi_k and Riesz bounds depend on (delta, seed, support) only."""
    small = SamplingSequence("kadec", delta=0.1, seed=1, K=16)
    large = SamplingSequence("kadec", delta=0.1, seed=1, K=64)
    assert np.array_equal(sequence_points(small), sequence_points(large)[48:81])
    assert phi_k(small, 0, 0.5) == pytest.approx(phi_k(large, 0, 0.5), rel=1e-12)
    assert generating_function(small, 0.37) == pytest.approx(generating_function(large, 0.37), rel=1e-12)
    grid = SpectralGrid(2048)
    assert np.allclose(phi_hat_k(small, 5, grid).values, phi_hat_k(large, 5, grid).values, atol=1e-12)
    a = riesz_bounds_estimate(small, 16, grid=grid)
    b = riesz_bounds_estimate(large, 16, grid=grid)
    assert a == pytest.approx(b, rel=1e-10)


def test_generating_function_integers():
    """For the integers phi(z) = sin(pi z) / pi."""
    for z in (0.5, 2.3, -7.75):
        assert generating_function(EQUI, z) == pytest.approx(np.sin(np.pi * z) / np.pi, rel=1e-10)


def test_generating_derivative_integers():
    for k in (-3, 0, 4):
        assert generating_derivative(EQUI, k) == pytest.approx((-1.0) ** k, rel=1e-10)


def test_generating_function_validated_radius():
    with pytest.raises(TruncationConfigError):
        generating_function(EQUI, 300.0)


def test_truncation_order_below_window():
    with pytest.raises(TruncationConfigError):
        GeneratingFunctionConfig(N_prod=10).order(KADEC)
    with pytest.raises(TruncationConfigError):
        GeneratingFunctionConfig(N_prod=100).order(KADEC)
    assert GeneratingFunctionConfig().order(KADEC) == 1024
    assert GeneratingFunctionConfig().order(EQUI) == 256


@pytest.mark.parametrize("seq", [SamplingSequence("equidistant", K=16), SamplingSequence("kadec", delta=0.1, seed=1, K=16)])
def test_interpolation_property(seq):
    """phi_k(t_l) = delta_kl for |k|, |l| <= 16."""
    t = sequence_points(seq)
    for k in range(-16, 17):
        values = np.array([phi_k(seq, k, t[l + 16]) for l in range(-16, 17)])
        expected = (np.arange(-16, 17) == k).astype(float)
        assert np.allclose(values, expected, atol=1e-8)


def test_sample_matrix_matches_phi_k():
    S = sample_matrix(KADEC, GeneratingFunctionConfig().order(KADEC))
    assert S.shape == (129, 513)
    for k in (-20, -1, 0, 3, 64):
        for n in (-256, -64, -5, 0, 3, 7, 64, 200):
            assert S[k + 64, n + 256] == pytest.approx(phi_k(KADEC, k, float(n)), rel=1e-9, abs=1e-12)


def test_phi_hat_equidistant_is_exponential():
    grid = SpectralGrid(256)
    spec = phi_hat_k(EQUI, 3, grid)
    assert np.allclose(spec.values, np.exp(-3j * grid.nodes))


def test_phi_hat_sample_length():
    grid = SpectralGrid(256)
    with pytest.raises(TruncationConfigError):
        phi_hat_k(KADEC, 0, grid, L=255)
    assert np.array_equal(phi_hat_k(KADEC, 2, grid, L=256).values, phi_hat_k(KADEC, 2, grid).values)


def test_parseval_residual():
    grid = SpectralGrid(1024)
    for k in (-10, 0, 7):
        assert parseval_residual(KADEC, k, grid) < 1e-10
        assert parseval_residual(EQUI, k, grid) < 1e-12


def test_reconstruction_spectra_stage_range():
    with pytest.raises(SequenceRangeError):
        reconstruction_spectra(KADEC, 65, SpectralGrid(256))


def test_riesz_bounds_equidistant():
    lower, upper = riesz_bounds_estimate(EQUI, 16, grid=SpectralGrid(4096))
    assert lower == pytest.approx(1.0, abs=1e-8)
    assert upper == pytest.approx(1.0, abs=1e-8)


def test_riesz_bounds_kadec():
    """Lower bound stays away from zero for delta = 0.1."""
    lower, upper = riesz_bounds_estimate(KADEC, 16, grid=SpectralGrid(4096))
    assert lower >= 0.1
    assert upper >= lower


def test_gram_eigenvalues_rejects_non_hermitian():
    with pytest.raises(GramDiagnosticError):
        gram_eigenvalues(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_gram_eigenvalues_rejects_indefinite():
    with pytest.raises(GramDiagnosticError) as exc:
        gram_eigenvalues(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert exc.value.eigenvalues[0] == pytest.approx(-1.0)


def test_write_gram_csv(tmp_path):
    path = tmp_path / "gram.csv"
    write_gram_csv(str(path), gram_matrix(EQUI, 1, SpectralGrid(64)))
    lines = path.read_text().splitlines()
    assert lines[0] == "j,k,re,im"
    assert len(lines) == 1 + 9
    j, k, re, im = lines[1].split(",")
    assert (j, k) == ("-1", "-1")
    assert float(re) == pytest.approx(1.0)


def test_generating_function_vanishes_at_the_points():
    for seq in (KADEC, EQUI):
        for t_k in sequence_points(seq):
            assert abs(generating_function(seq, t_k)) < 1e-10


def test_generating_function_truncation_stability():
    """Doubling N_prod leaves phi and phi_k unchanged on the validated disc."""
    base = GeneratingFunctionConfig()
    doubled = GeneratingFunctionConfig(N_prod=2 * base.order(KADEC))
    for z in (0.37, -2.5, 11.2, 0.5 + 0.75j, 180.3):
        assert generating_function(KADEC, z, doubled) == pytest.approx(generating_function(KADEC, z, base), rel=1e-8)
    for k, t in ((0, 0.5), (3, -1.7), (-12, 40.25)):
        assert phi_k(KADEC, k, t, doubled) == pytest.approx(phi_k(KADEC, k, t, base), rel=1e-8, abs=1e-14)
    grid = SpectralGrid(1024)
    assert np.allclose(phi_hat_k(KADEC, 4, grid, cfg=doubled).values, phi_hat_k(KADEC, 4, grid, cfg=base).values, atol=1e-10)


def test_parseval_residual_at_longer_sample_length():
    grid = SpectralGrid(2048)
    for L in (256, 512, 900):
        assert parseval_residual(KADEC, 9, grid, L=L) < 1e-10


def test_riesz_lower_bound_degrades_with_delta():
    grid = SpectralGrid(4096)
    mild, _ = riesz_bounds_estimate(SamplingSequence("kadec", delta=0.1, seed=1, K=16), 16, grid=grid)
    strong, _ = riesz_bounds_estimate(SamplingSequence("kadec", delta=0.24, seed=1, K=16), 16, grid=grid)
    assert 0.0 < strong < mild


def test_kadec_gram_section_is_hermitian():
    gram = gram_matrix(KADEC, 16, SpectralGrid(2048))
    assert np.max(np.abs(gram - gram.conj().T)) <= 1e-12
    eigenvalues = gram_eigenvalues(gram)
    assert np.all(np.isreal(eigenvalues))
    assert eigenvalues[0] > 0.0
