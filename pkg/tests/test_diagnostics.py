"""Spectral diagnostics: IPR, decay fits, spectral measure, spacings."""

import math

import numpy as np
import pytest

from andertree.diagnostics import (
    SpectralDecomposition,
    eigen_metrics,
    spacing_statistics,
    spectral_measure,
    spectrum_full,
    spectrum_values,
    stieltjes_residual,
)
from andertree.green import SpectralPoint
from andertree.hamiltonian import DisorderSpec, LaplacianKind, assemble, sample_potential
from andertree.tree import TreeParams, build_ball, build_segment


def test_three_site_spectrum():
    seg = build_segment(3)
    h = assemble(seg, LaplacianKind.ADJACENCY, np.zeros(3), 1.0)
    dec = spectrum_full(h)
    assert np.allclose(dec.eigenvalues, [-math.sqrt(2), 0.0, math.sqrt(2)], atol=1e-12)
    assert np.allclose(dec.eigenvectors.T @ dec.eigenvectors, np.eye(3), atol=1e-12)
    assert np.allclose(spectrum_values(h), dec.eigenvalues)


def test_spectrum_cap_directs_to_values():
    big = build_ball(TreeParams(2, 1.0, 12))  # 8191 vertices
    h = assemble(big, LaplacianKind.ADJACENCY, np.zeros(big.n), 1.0)
    with pytest.raises(ValueError, match="spectrum_values"):
        spectrum_full(h)


def test_synthetic_decay_fit_is_exact():
    ball = build_ball(TreeParams(2, 2.0, 14))
    center = 40
    d = ball.distances_from(center).astype(np.float64)
    psi = np.exp(-0.5 * d)
    psi /= np.linalg.norm(psi)
    vecs = np.zeros((ball.n, 1))
    vecs[:, 0] = psi
    m = eigen_metrics(SpectralDecomposition(np.array([0.7]), vecs), ball)[0]
    assert m.center == center
    assert m.energy == 0.7
    # shell maxima of exp(-r/2) lie exactly on a log-line of slope -1/2
    assert m.decay_rate == pytest.approx(0.5, abs=1e-9)
    assert m.r_squared == pytest.approx(1.0, abs=1e-12)
    assert m.amplitude == pytest.approx(psi.max(), rel=1e-9)


def test_delta_vector_metrics():
    ball = build_ball(TreeParams(2, 2.0, 6))
    vecs = np.zeros((ball.n, 1))
    vecs[3, 0] = 1.0
    m = eigen_metrics(SpectralDecomposition(np.array([0.0]), vecs), ball)[0]
    assert m.ipr == 1.0
    assert m.center == 3
    assert math.isnan(m.decay_rate)  # a single occupied shell fits nothing


def test_uniform_vector_ipr():
    ball = build_ball(TreeParams(2, 2.0, 6))
    vecs = np.full((ball.n, 1), 1.0 / math.sqrt(ball.n))
    m = eigen_metrics(SpectralDecomposition(np.array([0.0]), vecs), ball)[0]
    assert m.ipr == pytest.approx(1.0 / ball.n, rel=1e-12)


def test_eigen_metrics_size_mismatch():
    ball = build_ball(TreeParams(2, 2.0, 6))
    dec = SpectralDecomposition(np.zeros(3), np.eye(3))
    with pytest.raises(ValueError, match="ball has"):
        eigen_metrics(dec, ball)


def test_spectral_measure_weights():
    ball = build_ball(TreeParams(2, 2.0, 6))
    spec = DisorderSpec("uniform", (-0.5, 0.5), 4.0, 9)
    h = assemble(ball, LaplacianKind.GRAPH, sample_potential(spec, ball, 0), spec.lam)
    dec = spectrum_full(h)
    for x in (0, 7, ball.n - 1):
        atoms = spectral_measure(dec, x)
        assert atoms.shape == (ball.n, 2)
        assert atoms[:, 1].sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(atoms[:, 1] >= 0.0)
        assert np.array_equal(atoms[:, 0], dec.eigenvalues)
    with pytest.raises(ValueError, match="outside"):
        spectral_measure(dec, ball.n)


def test_stieltjes_residual_small():
    ball = build_ball(TreeParams(2, 2.0, 10))
    spec = DisorderSpec("uniform", (-0.5, 0.5), 3.0, 2)
    h = assemble(ball, LaplacianKind.ADJACENCY, sample_potential(spec, ball, 0), spec.lam)
    dec = spectrum_full(h)
    for x, z in ((0, SpectralPoint(0.0, 1.0)), (5, SpectralPoint(0.5, 1e-2))):
        assert stieltjes_residual(h, dec, x, z) < 1e-10


def test_spacing_picket_fence():
    # equal spacings unfold to 1 (up to the 1/20 kernel weight, which is
    # not an exact double), and the KS distance to the unit exponential
    # is then 1 - 1/e
    stats = spacing_statistics(np.arange(60.0))
    assert np.allclose(stats.spacings, 1.0, rtol=0.0, atol=1e-12)
    assert stats.ks_distance == pytest.approx(1.0 - math.exp(-1.0), abs=1e-12)
    assert stats.window == 21


def test_spacing_poisson_like():
    rng = np.random.default_rng(5)
    stats = spacing_statistics(rng.uniform(0.0, 1000.0, 5000))
    assert stats.spacings.mean() == pytest.approx(1.0, abs=1e-12)
    assert stats.ks_distance < 0.05


def test_spacing_unsorted_input_accepted():
    rng = np.random.default_rng(6)
    e = rng.uniform(0.0, 10.0, 200)
    assert spacing_statistics(e).ks_distance == spacing_statistics(np.sort(e)).ks_distance


def test_spacing_validation():
    with pytest.raises(ValueError, match="at least 50"):
        spacing_statistics(np.arange(49.0))
    with pytest.raises(ValueError, match="degenerate"):
        spacing_statistics(np.zeros(60))


def test_localized_ball_has_high_ipr():
    """Strong disorder on a small ball: localized states, Poissonian gaps."""
    ball = build_ball(TreeParams(2, 2.0, 30))  # 341 vertices
    spec = DisorderSpec("uniform", (-0.5, 0.5), 8.0, 77)
    h = assemble(ball, LaplacianKind.GRAPH, sample_potential(spec, ball, 0), spec.lam)
    dec = spectrum_full(h)
    metrics = eigen_metrics(dec, ball)
    med = float(np.median([m.ipr for m in metrics]))
    assert med > 0.1
    assert stieltjes_residual(h, dec, 0, SpectralPoint(0.0, 1.0)) < 1e-9
