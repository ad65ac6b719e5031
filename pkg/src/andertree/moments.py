"""Monte Carlo fractional moments of Green functions.

Estimates <|G(x0, v; z)|^s> for s in (0, 1) over disorder realizations,
fits exponential decay in distance, scans the corner entry of growing
one-dimensional segments (the a priori chain bound), and probes the
conditional site bound for uniformity in eta.

Determinism contract: realization m draws its potential from the Philox
substream keyed (master_seed, m), every realization's contribution is
stored by index, and the reduction runs in index order, so results are
bit-identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .green import SpectralPoint, resolvent_column
from .hamiltonian import (
    GEOMETRY_STREAM,
    DisorderSpec,
    LaplacianKind,
    assemble,
    restrict_dirichlet,
    sample_potential,
)
from .tree import Region, TreeBall, TreeParams, ball_size_exact, build_ball, build_segment

__all__ = [
    "MomentRequest",
    "MomentEstimate",
    "DecayFit",
    "EtaProbe",
    "fractional_moment",
    "fit_decay",
    "minami_scan",
    "bound_probe",
]


@dataclass(frozen=True)
class MomentRequest:
    """One fractional-moment experiment."""

    params: TreeParams
    kind: LaplacianKind
    disorder: DisorderSpec
    source: int
    targets: tuple
    z: SpectralPoint
    s: float
    samples: int

    def __post_init__(self):
        if not 0 < self.s < 1:
            raise ValueError(f"s must lie in (0, 1), got {self.s}")
        if len(self.targets) == 0:
            raise ValueError("targets must be nonempty")
        if self.samples < 1:
            raise ValueError(f"samples must be >= 1, got {self.samples}")
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        object.__setattr__(self, "kind", LaplacianKind(self.kind))


@dataclass(frozen=True)
class MomentEstimate:
    target: int
    distance: int
    mean: float
    stderr: float
    samples: int


@dataclass(frozen=True)
class DecayFit:
    """Least-squares fit of log(mean) against distance: mean ~ A exp(-q d)."""

    q: float
    prefactor: float
    r_squared: float
    window: tuple
    n_used: int
    n_excluded: int
    flag: str | None = None


@dataclass(frozen=True)
class EtaProbe:
    eta: float
    max_mean: float
    max_stderr: float
    estimates: tuple  # (x, y, mean, stderr) per probed pair


def _one_pass_stats(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Welford mean/variance over axis 0, reduced strictly in index order."""
    m = values.shape[0]
    mean = np.zeros(values.shape[1], dtype=np.float64)
    m2 = np.zeros(values.shape[1], dtype=np.float64)
    for i in range(m):
        delta = values[i] - mean
        mean += delta / (i + 1)
        m2 += delta * (values[i] - mean)
    if m < 2:
        return mean, np.zeros_like(mean)
    stderr = np.sqrt(m2 / (m - 1) / m)
    return mean, stderr


def fractional_moment(
    req: MomentRequest, workers: int = 1, ball: TreeBall | None = None
) -> list[MomentEstimate]:
    """Estimate <|G(source, v; z)|^s> for every target v.

    One resolvent column per realization serves all targets (G is
    symmetric).  With workers > 1, realization blocks run on a thread
    pool; each block writes its own rows of the value table, so the
    estimates do not depend on the worker count.
    """
    if ball is None:
        ball = build_ball(req.params)
    for t in req.targets:
        if not 0 <= t < ball.n:
            raise ValueError(f"target {t} outside ball of {ball.n} vertices")
    if not 0 <= req.source < ball.n:
        raise ValueError(f"source {req.source} outside ball of {ball.n} vertices")
    dist = ball.distances_from(req.source)
    targets = np.asarray(req.targets, dtype=np.int64)
    m = req.samples
    values = np.empty((m, targets.shape[0]), dtype=np.float64)

    def run_block(lo: int, hi: int):
        for i in range(lo, hi):
            v = sample_potential(req.disorder, ball, i)
            h = assemble(ball, req.kind, v, req.disorder.lam)
            col = resolvent_column(h, req.source, req.z)
            values[i] = np.abs(col[targets]) ** req.s

    workers = max(1, int(workers))
    if workers == 1 or m < 2 * workers:
        run_block(0, m)
    else:
        bounds = np.linspace(0, m, workers + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(run_block, int(bounds[j]), int(bounds[j + 1]))
                for j in range(workers)
            ]
            for f in futures:
                f.result()

    mean, stderr = _one_pass_stats(values)
    return [
        MomentEstimate(int(t), int(dist[t]), float(mean[j]), float(stderr[j]), m)
        for j, t in enumerate(targets)
    ]


def fit_decay(estimates: Sequence[MomentEstimate]) -> DecayFit:
    """Fit log(mean) = log(A) - q * distance by least squares.

    Estimates with nonpositive means are excluded (their count is
    reported); fewer than 3 usable points is an error.  A constant or
    growing profile comes back flagged "no decay" with r_squared 0.
    """
    pts = [(e.distance, e.mean) for e in estimates if e.mean > 0]
    n_excluded = len(estimates) - len(pts)
    if len(pts) < 3:
        raise ValueError(
            f"fit_decay needs at least 3 estimates with positive means, got {len(pts)}"
        )
    d = np.array([p[0] for p in pts], dtype=np.float64)
    y = np.log(np.array([p[1] for p in pts], dtype=np.float64))
    slope, intercept, r2 = _linefit(d, y)
    q = -slope
    flag = None
    if q <= 0 or r2 == 0.0:
        flag = "no decay"
    return DecayFit(
        q=float(q),
        prefactor=float(math.exp(intercept)),
        r_squared=float(r2),
        window=(float(d.min()), float(d.max())),
        n_used=len(pts),
        n_excluded=n_excluded,
        flag=flag,
    )


def _linefit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    xm = x.mean()
    ym = y.mean()
    sxx = float(((x - xm) ** 2).sum())
    if sxx == 0.0:
        raise ValueError("fit needs at least two distinct distances")
    slope = float(((x - xm) * (y - ym)).sum()) / sxx
    intercept = ym - slope * xm
    resid = y - (intercept + slope * x)
    sst = float(((y - ym) ** 2).sum())
    if sst == 0.0:
        return slope, intercept, 0.0
    r2 = 1.0 - float((resid**2).sum()) / sst
    return slope, intercept, r2


def minami_scan(
    length: int,
    disorder: DisorderSpec,
    s: float,
    z: SpectralPoint,
    samples: int,
) -> tuple[list[MomentEstimate], DecayFit | None]:
    """Corner-moment scan <|G_{[0..n]}(0, n; z)|^s> on a chain, n = 1..length.

    The segment operator uses the graph-Laplacian convention (constant
    diagonal -2 from the two-sided chain); the adjacency form differs
    only by the energy shift E -> E + 2.  Each realization draws one
    potential on [0..length] and all its sub-segment corner entries come
    from a single determinant recursion.  Returns the per-n estimates and
    the decay fit (None when fewer than 3 points are available).
    """
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    if not 0 < s < 1:
        raise ValueError(f"s must lie in (0, 1), got {s}")
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    seg = build_segment(length + 1)
    dz = np.empty((samples, length + 1), dtype=np.complex128)
    for i in range(samples):
        v = sample_potential(disorder, seg, i)
        dz[i] = (disorder.lam * v - 2.0) - z.z
    pows = _kernels.segment_corner_pows(dz, s)
    mean, stderr = _one_pass_stats(pows)
    estimates = [
        MomentEstimate(n, n, float(mean[n - 1]), float(stderr[n - 1]), samples)
        for n in range(1, length + 1)
    ]
    fit = fit_decay(estimates) if length >= 3 else None
    return estimates, fit


def bound_probe(
    region_size: int,
    disorder: DisorderSpec,
    s: float,
    energy: float,
    etas: Sequence[float],
    samples: int,
    pairs: int = 4,
    ambient: TreeParams | None = None,
) -> list[EtaProbe]:
    """Probe <|G_Omega(x, y; z)|^s> on a random region as eta decreases.

    A connected region of region_size vertices and a handful of (x, y)
    pairs inside it are drawn once from the reserved geometry substream;
    the same disorder realizations are reused at every eta, so the
    returned per-eta maxima are directly comparable.  region_size 1 is the
    analytic single-site case (x = y, mean bounded by the density bound).
    """
    if region_size < 1:
        raise ValueError(f"region_size must be >= 1, got {region_size}")
    if not 0 < s < 1:
        raise ValueError(f"s must lie in (0, 1), got {s}")
    etas = [float(e) for e in etas]
    if not etas or any(e <= 0 for e in etas):
        raise ValueError("etas must be a nonempty list of positive values")
    if any(b >= a for a, b in zip(etas, etas[1:])):
        raise ValueError(f"etas must be strictly descending, got {etas}")
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")

    if ambient is None:
        r = 4
        while ball_size_exact(TreeParams(2, 2.0, r), r) < 4 * region_size + 8:
            r += 2
        ambient = TreeParams(2, 2.0, r)
    ball = build_ball(ambient)
    if region_size > ball.n:
        raise ValueError(f"region_size {region_size} exceeds the ambient ball ({ball.n})")

    g = np.random.Generator(
        np.random.Philox(key=np.array([disorder.master_seed, GEOMETRY_STREAM], dtype=np.uint64))
    )
    region = _grow_region(ball, region_size, g)
    members = region.ids
    y = int(members[g.integers(0, len(members))])
    xs = sorted({int(members[g.integers(0, len(members))]) for _ in range(max(1, pairs))})

    pots = [sample_potential(disorder, ball, i) for i in range(samples)]
    out = []
    for eta in etas:
        z = SpectralPoint(energy, eta)
        vals = np.empty((samples, len(xs)), dtype=np.float64)
        for i in range(samples):
            h = restrict_dirichlet(assemble(ball, LaplacianKind.ADJACENCY, pots[i], disorder.lam), region)
            col = resolvent_column(h, y, z)
            vals[i] = np.abs(col[xs]) ** s
        mean, stderr = _one_pass_stats(vals)
        j = int(np.argmax(mean))
        out.append(
            EtaProbe(
                eta=eta,
                max_mean=float(mean[j]),
                max_stderr=float(stderr[j]),
                estimates=tuple(
                    (int(x), y, float(mean[i]), float(stderr[i])) for i, x in enumerate(xs)
                ),
            )
        )
    return out


def _grow_region(ball: TreeBall, size: int, g: np.random.Generator) -> Region:
    """A connected region grown by random adjacent accretion."""
    start = int(g.integers(0, ball.n))
    members = {start}
    frontier = [int(v) for v in ball.neighbors(start) if v not in members]
    while len(members) < size and frontier:
        i = int(g.integers(0, len(frontier)))
        v = frontier.pop(i)
        if v in members:
            continue
        members.add(v)
        frontier.extend(int(u) for u in ball.neighbors(v) if u not in members)
    if len(members) < size:
        raise ValueError(f"could not grow a region of {size} vertices in this ball")
    return Region.from_ids(sorted(members))
