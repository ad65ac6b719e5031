"""Finite-volume spectral diagnostics for localization.

Dense eigen-decomposition plus the standard localization readouts:
inverse participation ratios, per-eigenvector exponential decay fits on
shell maxima, discrete spectral measures with a Stieltjes cross-check
against the resolvent, and nearest-neighbor level-spacing statistics
with local unfolding.  Everything here is a desk-scale diagnostic; the
dense solver is the only backend on purpose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .green import SpectralPoint, green_entry
from .hamiltonian import HamiltonianMatrix
from .moments import _linefit
from .tree import TreeBall

__all__ = [
    "SpectralDecomposition",
    "LocalizationMetrics",
    "SpacingStatistics",
    "spectrum_full",
    "spectrum_values",
    "eigen_metrics",
    "spectral_measure",
    "stieltjes_residual",
    "spacing_statistics",
]

_EIG_CAP = 6000
UNFOLD_WINDOW = 21  # consecutive levels per local mean spacing


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ascending eigenvalues with orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return int(self.eigenvalues.shape[0])


@dataclass(frozen=True)
class LocalizationMetrics:
    index: int
    energy: float
    ipr: float
    center: int
    decay_rate: float  # nan when fewer than two nonzero shells around center
    amplitude: float
    r_squared: float


@dataclass(frozen=True)
class SpacingStatistics:
    spacings: np.ndarray  # unfolded, mean exactly 1
    ks_distance: float
    window: int = UNFOLD_WINDOW


def spectrum_full(h: HamiltonianMatrix) -> SpectralDecomposition:
    """Full symmetric eigen-decomposition; refuses above 6000 vertices."""
    if h.n > _EIG_CAP:
        raise ValueError(
            f"spectrum_full is dense and capped at {_EIG_CAP} vertices "
            f"(n = {h.n}); use spectrum_values for eigenvalues only"
        )
    vals, vecs = np.linalg.eigh(h.to_dense())
    return SpectralDecomposition(eigenvalues=vals, eigenvectors=vecs)


def spectrum_values(h: HamiltonianMatrix) -> np.ndarray:
    """Ascending eigenvalues without vectors (cheaper, larger cap)."""
    return np.linalg.eigvalsh(h.to_dense())


def eigen_metrics(dec: SpectralDecomposition, ball: TreeBall) -> list[LocalizationMetrics]:
    """IPR, center, and shell-maximum decay fit for every eigenvector.

    The decay fit regresses log shell-max |psi| on distance from the
    vector's center; shell maxima sidestep sign changes that would put
    zeros into the log.  Vectors supported on fewer than two shells get
    nan for the fitted quantities.
    """
    vecs = dec.eigenvectors
    if vecs.shape[0] != ball.n:
        raise ValueError(
            f"decomposition on {vecs.shape[0]} vertices, ball has {ball.n}"
        )
    absv = np.abs(vecs)
    iprs = (vecs**4).sum(axis=0)
    centers = absv.argmax(axis=0)
    out = []
    for n in range(dec.n):
        center = int(centers[n])
        dist = ball.distances_from(center)
        nshell = int(dist.max()) + 1
        shell_max = np.zeros(nshell)
        np.maximum.at(shell_max, dist, absv[:, n])
        keep = shell_max > 0.0
        rate, amp, r2 = math.nan, math.nan, math.nan
        if keep.sum() >= 2:
            r = np.nonzero(keep)[0].astype(np.float64)
            logy = np.log(shell_max[keep])
            try:
                slope, intercept, fit_r2 = _linefit(r, logy)
            except ValueError:
                pass
            else:
                rate, amp, r2 = -slope, math.exp(intercept), fit_r2
        out.append(
            LocalizationMetrics(
                index=n,
                energy=float(dec.eigenvalues[n]),
                ipr=float(iprs[n]),
                center=center,
                decay_rate=float(rate),
                amplitude=float(amp),
                r_squared=float(r2),
            )
        )
    return out


def spectral_measure(dec: SpectralDecomposition, x: int) -> np.ndarray:
    """Finite-volume spectral measure of delta_x: rows (E_n, |psi_n(x)|^2)."""
    if not 0 <= x < dec.eigenvectors.shape[0]:
        raise ValueError(f"vertex {x} outside decomposition of size {dec.n}")
    weights = dec.eigenvectors[x, :] ** 2
    return np.column_stack((dec.eigenvalues, weights))


def stieltjes_residual(
    h: HamiltonianMatrix, dec: SpectralDecomposition, x: int, z: SpectralPoint
) -> float:
    """|sum_n w_n/(E_n - z) - G(x,x;z)|, the resolvent cross-check."""
    atoms = spectral_measure(dec, x)
    transform = complex((atoms[:, 1] / (atoms[:, 0] - z.z)).sum())
    return abs(transform - green_entry(h, x, x, z))


def spacing_statistics(eigenvalues: np.ndarray) -> SpacingStatistics:
    """Unfolded nearest-neighbor spacings and KS distance to exp(1).

    Unfolding divides each raw spacing by the local mean spacing over
    UNFOLD_WINDOW consecutive levels (spacing array reflect-padded at the
    edges), then rescales so the mean is exactly 1.  Localized spectra
    should look Poissonian: unfolded spacings close to a unit exponential.
    """
    e = np.sort(np.asarray(eigenvalues, dtype=np.float64))
    if e.shape[0] < 50:
        raise ValueError(f"need at least 50 eigenvalues, got {e.shape[0]}")
    s = np.diff(e)
    if not s.any():
        raise ValueError("degenerate spectrum: all eigenvalues equal")
    kernel = UNFOLD_WINDOW - 1  # spacings spanned by a 21-level window
    half = kernel // 2
    padded = np.pad(s, (half, kernel - 1 - half), mode="reflect")
    local = np.convolve(padded, np.full(kernel, 1.0 / kernel), "valid")
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(local > 0.0, s / local, 0.0)
    u /= u.mean()
    ks = float(stats.kstest(u, "expon").statistic)
    return SpacingStatistics(spacings=u, ks_distance=ks)
