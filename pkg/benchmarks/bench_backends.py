#!/usr/bin/env python3
"""Time the numba kernel lane against the pure-numpy lane.

Each row runs one kernel on identical inputs under both lanes and
reports the best-of-N wall time plus the speedup.  The first numba call
of each kernel is discarded (JIT compile).  Run from an environment with
the package installed:

    python3 benchmarks/bench_backends.py
    python3 benchmarks/bench_backends.py --radius 1500 --repeat 7
"""

import argparse
import time

import numpy as np

from andertree import _kernels
from andertree.green import SpectralPoint, resolvent_column
from andertree.hamiltonian import (
    DisorderSpec,
    LaplacianKind,
    assemble,
    sample_potential,
)
from andertree.moments import MomentRequest, fractional_moment
from andertree.tree import TreeParams, build_ball


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def build_cases(radius, samples):
    params = TreeParams(k=2, gamma=2.0, radius=radius)
    ball = build_ball(params)
    spec = DisorderSpec("uniform", (-1.0, 1.0), lam=3.0, master_seed=17)
    h = assemble(ball, LaplacianKind.GRAPH, sample_potential(spec, ball, 0), spec.lam)
    z = SpectralPoint(0.0, 1e-2)

    # batch of chain diagonals, the shape minami_scan feeds the kernel
    rng = np.random.default_rng(17)
    seg_dz = (
        3.0 * rng.uniform(-1.0, 1.0, size=(256, 801)) - 2.0 - (0.1 + 1e-2j)
    ).astype(np.complex128)

    # end-to-end row on a fixed modest ball so --radius only scales the
    # kernel rows
    req = MomentRequest(
        params=TreeParams(2, 2.0, 62),
        kind=LaplacianKind.ADJACENCY,
        disorder=spec,
        source=0,
        targets=(5, 20, 60),
        z=z,
        s=0.5,
        samples=samples,
    )

    cases = [
        (f"tree_solve (resolvent column, n={ball.n})",
         lambda: resolvent_column(h, 0, z)),
        (f"bfs_distances (shell distances, n={ball.n})",
         lambda: ball.distances_from(0)),
        ("segment_corner_pows (256 chains of 800)",
         lambda: _kernels.segment_corner_pows(seg_dz, 0.5)),
        (f"fractional_moment (end to end, M={samples})",
         lambda: fractional_moment(req)),
    ]
    return cases


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--radius", type=int, default=700,
                    help="ball radius for the solve/BFS rows (default 700)")
    ap.add_argument("--repeat", type=int, default=5,
                    help="timed repetitions per row, best one kept (default 5)")
    ap.add_argument("--samples", type=int, default=40,
                    help="realizations for the end-to-end row (default 40)")
    args = ap.parse_args()

    lanes = _kernels.available_backends()
    if "numba" not in lanes:
        print("numba lane unavailable; nothing to compare")
        return

    cases = build_cases(args.radius, args.samples)
    results = {}
    for lane in ("numpy", "numba"):
        _kernels.use_backend(lane)
        for name, fn in cases:
            fn()  # warm: JIT compile on numba, caches on both
            results[(lane, name)] = best_of(fn, args.repeat)
    _kernels.use_backend("numba")

    width = max(len(name) for name, _ in cases)
    print(f"{'kernel':<{width}}  {'numpy':>10}  {'numba':>10}  {'speedup':>8}")
    for name, _ in cases:
        t_np = results[("numpy", name)]
        t_nb = results[("numba", name)]
        print(f"{name:<{width}}  {t_np * 1e3:>8.2f}ms  {t_nb * 1e3:>8.2f}ms"
              f"  {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
