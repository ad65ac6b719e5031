"""Built-in acceptance suite: ten pass/fail criteria with time budgets.

Each criterion checks one load-bearing contract at a stated tolerance
and must finish inside its budget (a pass that blows the budget is
reported as a failure).  quick=True shrinks sample counts for a fast
sanity pass: counting radius 120, 30 oracle and identity instances,
300 fuzz instances, M = 400/500/1200 for the Monte Carlo runs, the
smaller diagnostic ball, and M = 120 for the determinism rerun.  The
full run keeps every count at its stated value.
"""

from __future__ import annotations

import contextlib
import io
import math
import os
import tempfile
import time
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .diagnostics import eigen_metrics, spectrum_full, stieltjes_residual
from .green import SpectralPoint, check_resolvent_identity, dense_oracle, resolvent_column
from .hamiltonian import DisorderSpec, LaplacianKind, assemble, sample_potential
from .moments import MomentRequest, bound_probe, fit_decay, fractional_moment, minami_scan
from .segmentation import random_instance, segment_path, verify_segmentation
from .tree import TreeParams, ball_size_exact, build_ball, dimension_estimate, leftmost_ray

__all__ = ["CriterionResult", "run_all"]

_COUNT_FAMILIES = ((2, 2.0), (2, 1.5), (3, 2.0), (4, 3.0))


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float
    budget: float


def _workers() -> int:
    try:
        n = len(os.sched_getaffinity(0))
    except AttributeError:
        n = os.cpu_count() or 1
    return min(8, n)


def _warm_kernels() -> None:
    """Trigger kernel compilation outside any criterion's clock."""
    ball = build_ball(TreeParams(2, 2.0, 6))
    ball.distances_from(0)
    h = assemble(ball, LaplacianKind.ADJACENCY, np.zeros(ball.n), 1.0)
    resolvent_column(h, 0, SpectralPoint(0.0, 1.0))
    minami_scan(3, DisorderSpec("uniform", (-0.5, 0.5), 1.0, 1), 0.5,
                SpectralPoint(0.0, 1.0), 2)


def _crit_counting(quick: bool):
    rmax = 120 if quick else 300
    checked = 0
    for k, gamma in _COUNT_FAMILIES:
        params = TreeParams(k, gamma, rmax)
        ball = build_ball(params)
        bfs = ball.distances_from(0)
        counts = np.bincount(bfs, minlength=rmax + 1).cumsum()
        for r in range(rmax + 1):
            if int(counts[r]) != ball_size_exact(params, r):
                return False, (
                    f"(k,gamma)=({k},{gamma}) r={r}: closed form "
                    f"{ball_size_exact(params, r)} != BFS count {int(counts[r])}"
                )
            checked += 1
    return True, f"{checked} (family, radius) pairs agree exactly"


def _crit_dimension(quick: bool):
    params = TreeParams(2, 2.0, 0)
    dims = [dimension_estimate(params, 10**p) for p in (3, 4, 5, 6)]
    if not all(a < b for a, b in zip(dims, dims[1:])):
        return False, f"sequence not increasing: {[round(d, 4) for d in dims]}"
    if abs(dims[-1] - 2.0) > 0.1:
        return False, f"dimension at r=1e6 is {dims[-1]:.4f}, off 2.0 by > 0.1"
    return True, f"1e3..1e6 -> {[round(d, 4) for d in dims]}, final within 0.1 of 2"


def _radius_for_size(k: int, gamma: float, cap: int) -> int:
    params = TreeParams(k, gamma, 0)
    r = 1
    while ball_size_exact(params, r + 1) <= cap:
        r += 1
    return r


def _crit_green_oracle(quick: bool):
    n_inst = 30 if quick else 100
    rng = np.random.default_rng(313)
    kinds = (LaplacianKind.ADJACENCY, LaplacianKind.GRAPH)
    dists = ("uniform", "gaussian", "cauchy")
    worst = 0.0
    sizes = []
    for i in range(n_inst):
        k = int(rng.integers(2, 4))
        gamma = round(float(rng.uniform(1.3, 3.0)), 2)
        cap = 2000 if i < n_inst // 5 else int(rng.integers(60, 900))
        r_hi = _radius_for_size(k, gamma, cap)
        r = int(rng.integers(2, r_hi + 1)) if i >= n_inst // 5 else r_hi
        ball = build_ball(TreeParams(k, gamma, r))
        spec = DisorderSpec(dists[i % 3], (-0.5, 0.5) if i % 3 != 1 else (0.0, 1.0),
                            float(rng.uniform(0.5, 5.0)), int(rng.integers(0, 2**32)))
        h = assemble(ball, kinds[i % 2], sample_potential(spec, ball, 0), spec.lam)
        z = SpectralPoint(float(rng.uniform(-2, 2)), float(10 ** rng.uniform(-3, 0)))
        y = int(rng.integers(0, ball.n))
        fast = resolvent_column(h, y, z)
        dense = dense_oracle(h, z)[:, y]
        worst = max(worst, float(np.abs(fast - dense).max()))
        sizes.append(ball.n)
    ok = worst <= 1e-8
    return ok, (f"{n_inst} instances (n up to {max(sizes)}), "
                f"max |fast - dense| = {worst:.2e} (tol 1e-8)")


def _crit_resolvent_identity(quick: bool):
    n_inst = 30 if quick else 100
    rng = np.random.default_rng(414)
    kinds = (LaplacianKind.ADJACENCY, LaplacianKind.GRAPH)
    worst = 0.0
    for i in range(n_inst):
        k = int(rng.integers(2, 4))
        gamma = round(float(rng.uniform(1.5, 3.0)), 2)
        r_hi = _radius_for_size(k, gamma, 1200)
        ball = build_ball(TreeParams(k, gamma, r_hi))
        ray = leftmost_ray(ball, 0)
        top = len(ray) - 1
        a = int(rng.integers(0, top - 7))
        b = int(rng.integers(a, top - 6))
        c = int(rng.integers(b + 3, top + 1))
        x, y, w = int(ray[a]), int(ray[b]), int(ray[c])
        spec = DisorderSpec("uniform", (-0.5, 0.5),
                            float(rng.uniform(0.5, 4.0)), int(rng.integers(0, 2**32)))
        h = assemble(ball, kinds[i % 2], sample_potential(spec, ball, 0), spec.lam)
        z = SpectralPoint(float(rng.uniform(-2, 2)), float(10 ** rng.uniform(-2, 0)))
        worst = max(worst, check_resolvent_identity(h, x, y, w, z))
    ok = worst <= 1e-9
    return ok, f"{n_inst} admissible instances, max residual = {worst:.2e} (tol 1e-9)"


def _crit_segmentation(quick: bool):
    n_inst = 300 if quick else 1000
    rng = np.random.default_rng(11)
    lengths = []
    for _ in range(n_inst):
        ball, x1, v, L0 = random_instance(rng)
        res = segment_path(ball, x1, v, L0)
        report = verify_segmentation(ball, res, v)
        if not report.passed:
            bad = [c.name for c in report.checks if not c.passed]
            return False, f"properties {bad} failed on (n={ball.n}, x1={x1}, v={v}, L0={L0})"
        lengths.append(res.l)
    return True, (f"{n_inst} instances pass all four properties "
                  f"(l in [{min(lengths)}, {max(lengths)}])")


def _crit_moment_decay(quick: bool):
    samples = 400 if quick else 2000
    params = TreeParams(2, 2.0, 62)
    ball = build_ball(params)
    ray = leftmost_ray(ball, 0, 60)
    targets = tuple(int(ray[d]) for d in range(4, 61, 4))
    req = MomentRequest(
        params=params, kind=LaplacianKind.GRAPH,
        disorder=DisorderSpec("uniform", (-0.5, 0.5), 3.0, 20260816),
        source=0, targets=targets, z=SpectralPoint(0.0, 1e-3), s=0.5,
        samples=samples,
    )
    fit = fit_decay(fractional_moment(req, workers=_workers(), ball=ball))
    ok = fit.q > 0.05 and fit.r_squared >= 0.9
    return ok, (f"M={samples}: q = {fit.q:.4f} (gate 0.05), r^2 = {fit.r_squared:.3f} "
                f"(gate 0.9); reference ln2/(6*5) = {math.log(2) / 30:.4f}")


def _crit_minami(quick: bool):
    samples = 500 if quick else 2000
    estimates, fit = minami_scan(
        60, DisorderSpec("uniform", (-0.5, 0.5), 2.0, 20260817), 0.5,
        SpectralPoint(0.0, 1e-3), samples,
    )
    if fit is None:
        return False, "scan returned no fit"
    ok = fit.q > 0 and fit.r_squared >= 0.9
    return ok, (f"M={samples}, length 60: m = {fit.q:.4f} (gate 0), "
                f"r^2 = {fit.r_squared:.3f} (gate 0.9)")


def _crit_eta_bound(quick: bool):
    samples = 1200 if quick else 5000
    etas = (1e-1, 1e-2, 1e-3, 1e-4)
    spec = DisorderSpec("uniform", (-0.5, 0.5), 1.0, 20260818)
    probes = bound_probe(40, spec, 0.5, 0.0, etas, samples, pairs=4)
    by_eta = {p.eta: p for p in probes}
    ratio = by_eta[1e-4].max_mean / by_eta[1e-1].max_mean
    single = bound_probe(1, spec, 0.5, 0.0, etas, samples, pairs=1)
    gate = 2.0 * math.sqrt(2.0)
    worst_excess = max(p.max_mean - (gate + 3.0 * p.max_stderr) for p in single)
    ok = ratio <= 5.0 and worst_excess <= 0.0
    single_max = max(p.max_mean for p in single)
    return ok, (f"M={samples}: eta 1e-4 vs 1e-1 ratio = {ratio:.2f} (gate 5); "
                f"single-site max = {single_max:.3f} vs 2*sqrt(2) = {gate:.3f} + 3se")


def _crit_localization(quick: bool):
    radius = 62 if quick else 88
    params = TreeParams(2, 2.0, radius)
    ball = build_ball(params)
    spec = DisorderSpec("uniform", (-0.5, 0.5), 5.0, 20260819)
    h = assemble(ball, LaplacianKind.GRAPH, sample_potential(spec, ball, 0), spec.lam)
    dec = spectrum_full(h)
    iprs = np.array([m.ipr for m in eigen_metrics(dec, ball)])
    residual = stieltjes_residual(h, dec, 0, SpectralPoint(0.0, 1.0))
    med = float(np.median(iprs))
    ok = med >= 0.01 and residual <= 1e-8
    return ok, (f"n={ball.n}: median IPR = {med:.4f} (gate 0.01), "
                f"Stieltjes residual = {residual:.2e} (tol 1e-8)")


def _crit_determinism(quick: bool):
    from .cli import main as cli_main

    samples = 120 if quick else 500
    with tempfile.TemporaryDirectory() as tmp:
        paths = [os.path.join(tmp, f"run{i}.jsonl") for i in (1, 2)]
        outputs = []
        for workers, out in zip((1, 8), paths):
            # the CLI prints records to stdout; keep the verify report clean
            with contextlib.redirect_stdout(io.StringIO()), \
                 contextlib.redirect_stderr(io.StringIO()):
                code = cli_main([
                    "moments", "--k", "2", "--gamma", "2", "--radius", "30",
                    "--distance", "24", "--step", "4", "--samples", str(samples),
                    "--master-seed", "99", "--workers", str(workers),
                    "--output", out,
                ])
            if code != 0:
                return False, f"moments run with workers={workers} exited {code}"
            with open(out, "rb") as fh:
                outputs.append(fh.read())
    if outputs[0] != outputs[1]:
        return False, "records differ between workers=1 and workers=8"
    return True, f"workers 1 vs 8: {len(outputs[0])} record bytes identical"


_CRITERIA = (
    (1, "counting", 10.0, _crit_counting),
    (2, "dimension", 1.0, _crit_dimension),
    (3, "green-oracle", 60.0, _crit_green_oracle),
    (4, "resolvent-identity", 60.0, _crit_resolvent_identity),
    (5, "segmentation", 30.0, _crit_segmentation),
    (6, "moment-decay", 600.0, _crit_moment_decay),
    (7, "minami", 300.0, _crit_minami),
    (8, "eta-bound", 300.0, _crit_eta_bound),
    (9, "localization", 300.0, _crit_localization),
    (10, "determinism", 120.0, _crit_determinism),
)


def run_criterion(number: int, quick: bool = False) -> CriterionResult:
    entry = next((c for c in _CRITERIA if c[0] == number), None)
    if entry is None:
        raise ValueError(f"no criterion {number}")
    _, name, budget, fn = entry
    t0 = time.perf_counter()
    try:
        passed, detail = fn(quick)
    except Exception as e:  # a crash is a failure, not a crash of the suite
        passed, detail = False, f"raised {type(e).__name__}: {e}"
    seconds = time.perf_counter() - t0
    if passed and seconds > budget:
        passed = False
        detail += f"; exceeded budget ({seconds:.1f}s > {budget:.0f}s)"
    return CriterionResult(number=number, name=name, passed=passed,
                           detail=detail, seconds=seconds, budget=budget)


def run_all(quick: bool = False) -> list[CriterionResult]:
    _warm_kernels()
    return [run_criterion(number, quick) for number, _, _, _ in _CRITERIA]
