"""Command-line front end.

Subcommands cover the whole surface: ball geometry (`tree`), resolvent
entries (`green`), fractional-moment decay scans (`moments`), the 1D
segment scan (`minami`), the small-eta boundedness probe (`probe`),
path segmentation with its property report (`segment`), dense spectral
diagnostics (`spectrum`), and the built-in verification suite
(`verify`).

Result records are JSON lines {record_type, config, payload} on stdout,
duplicated to --output (or $ANDERTREE_OUTDIR/<subcommand>.jsonl) when
set.  Records embed the resolved physics config and nothing about the
execution (workers, backend, timestamps live in a .meta.json sidecar),
so reruns with the same config and seed are byte-identical regardless
of parallelism.  Human-oriented progress lines go to stderr.  Exit
codes: 0 success, 1 verification failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time

import numpy as np

from . import _kernels
from .config import (
    KNOWN_KEYS,
    ConfigError,
    ExperimentConfig,
    parse_config_file,
    resolve_config,
)
from .diagnostics import eigen_metrics, spacing_statistics, spectrum_full, stieltjes_residual
from .green import SpectralPoint, green_entry, resolvent_column
from .hamiltonian import DisorderSpec, LaplacianKind, assemble, sample_potential
from .moments import MomentRequest, bound_probe, fit_decay, fractional_moment, minami_scan
from .segmentation import PreconditionError, segment_path, verify_segmentation
from .tree import (
    BallSizeError,
    TreeParams,
    ball_size_exact,
    build_ball,
    dimension_estimate,
    junction_radii_upto,
    leftmost_ray,
)

__all__ = ["main"]

_SUBCOMMANDS = ("tree", "green", "moments", "minami", "probe", "segment", "spectrum", "verify")


def _dumps(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def _say(*parts) -> None:
    print(*parts, file=sys.stderr)


def _params(cfg: ExperimentConfig) -> TreeParams:
    return TreeParams(cfg.k, cfg.gamma, cfg.radius)


def _disorder(cfg: ExperimentConfig) -> DisorderSpec:
    return DisorderSpec(cfg.distribution, cfg.dist_params, cfg.lam, cfg.master_seed)


def _kind(cfg: ExperimentConfig) -> LaplacianKind:
    return LaplacianKind(cfg.laplacian)


def _z(cfg: ExperimentConfig) -> SpectralPoint:
    return SpectralPoint(cfg.energy, cfg.eta)


def _resolve_targets(cfg: ExperimentConfig, ball) -> list[int]:
    if cfg.targets == "ray":
        ray = leftmost_ray(ball, cfg.source, cfg.distance)
        if len(ray) <= cfg.distance:
            raise ConfigError(
                f"ray from vertex {cfg.source} ends after {len(ray) - 1} steps; "
                f"increase radius or lower distance {cfg.distance}"
            )
        return [int(ray[d]) for d in range(cfg.step, cfg.distance + 1, cfg.step)]
    bad = [t for t in cfg.targets if t >= ball.n]
    if bad:
        raise ConfigError(f"targets {bad} outside ball of {ball.n} vertices")
    return list(cfg.targets)


def _physics(cfg: ExperimentConfig, *keys: str) -> dict:
    """Resolved config subset embedded in records (execution facts excluded)."""
    values = {
        "k": cfg.k, "gamma": cfg.gamma, "radius": cfg.radius,
        "laplacian": cfg.laplacian, "distribution": cfg.distribution,
        "dist_params": list(cfg.dist_params), "lambda": cfg.lam, "s": cfg.s,
        "energy": cfg.energy, "eta": cfg.eta, "samples": cfg.samples,
        "master_seed": cfg.master_seed, "realization": cfg.realization,
        "source": cfg.source, "distance": cfg.distance, "step": cfg.step,
        "length": cfg.length, "region_size": cfg.region_size,
        "etas": list(cfg.etas), "pairs": cfg.pairs,
        "x1": cfg.x1, "v": cfg.v, "L0": cfg.L0,
    }
    return {key: values[key] for key in keys}


def _fit_payload(fit) -> dict | None:
    if fit is None:
        return None
    return {
        "q": fit.q, "prefactor": fit.prefactor, "r_squared": fit.r_squared,
        "window": list(fit.window), "n_used": fit.n_used,
        "n_excluded": fit.n_excluded, "flag": fit.flag,
    }


# --- subcommand handlers: cfg -> (records, csv header+rows or None) ---------


def cmd_tree(cfg: ExperimentConfig):
    params = _params(cfg)
    vertices = ball_size_exact(params)
    depths = junction_radii_upto(params, cfg.radius)
    dim = None
    if cfg.gamma > 1.0 and cfg.radius >= 2:
        dim = dimension_estimate(params)
    record = {
        "record_type": "tree",
        "config": _physics(cfg, "k", "gamma", "radius"),
        "payload": {
            "vertices": vertices,
            "junction_depths": depths,
            "dimension_estimate": dim,
        },
    }
    _say(f"ball({cfg.k},{cfg.gamma}) radius {cfg.radius}: {vertices} vertices, "
         f"{len(depths)} junction shells, dimension {dim}")
    rows = [(n, d) for n, d in enumerate(depths)]
    return [record], (("junction_index", "depth"), rows)


def cmd_green(cfg: ExperimentConfig):
    ball = build_ball(_params(cfg))
    targets = _resolve_targets(cfg, ball)
    if cfg.source >= ball.n:
        raise ConfigError(f"source {cfg.source} outside ball of {ball.n} vertices")
    potential = sample_potential(_disorder(cfg), ball, cfg.realization)
    h = assemble(ball, _kind(cfg), potential, cfg.lam)
    col = resolvent_column(h, cfg.source, _z(cfg))
    dist = ball.distances_from(cfg.source)
    entries = [
        {
            "target": t,
            "distance": int(dist[t]),
            "re": float(col[t].real),
            "im": float(col[t].imag),
            "abs": float(abs(col[t])),
        }
        for t in targets
    ]
    config = _physics(cfg, "k", "gamma", "radius", "laplacian", "distribution",
                      "dist_params", "lambda", "energy", "eta", "master_seed",
                      "realization", "source")
    config["targets"] = targets
    record = {"record_type": "green", "config": config,
              "payload": {"entries": entries}}
    _say(f"{len(entries)} resolvent entries from vertex {cfg.source} "
         f"at z = {cfg.energy} + {cfg.eta}i")
    rows = [(e["target"], e["distance"], e["re"], e["im"], e["abs"]) for e in entries]
    return [record], (("target", "distance", "re", "im", "abs"), rows)


def cmd_moments(cfg: ExperimentConfig):
    params = _params(cfg)
    ball = build_ball(params)
    targets = _resolve_targets(cfg, ball)
    if cfg.source >= ball.n:
        raise ConfigError(f"source {cfg.source} outside ball of {ball.n} vertices")
    req = MomentRequest(
        params=params, kind=_kind(cfg), disorder=_disorder(cfg),
        source=cfg.source, targets=tuple(targets), z=_z(cfg), s=cfg.s,
        samples=cfg.samples,
    )
    estimates = fractional_moment(req, workers=cfg.workers, ball=ball)
    try:
        fit = fit_decay(estimates)
    except ValueError:
        fit = None
    reference_q = math.log(2.0) / (6.0 * cfg.L0)
    config = _physics(cfg, "k", "gamma", "radius", "laplacian", "distribution",
                      "dist_params", "lambda", "s", "energy", "eta", "samples",
                      "master_seed", "source", "L0")
    config["targets"] = targets
    record = {
        "record_type": "moments",
        "config": config,
        "payload": {
            "estimates": [
                {"target": e.target, "distance": e.distance,
                 "mean": e.mean, "stderr": e.stderr}
                for e in estimates
            ],
            "fit": _fit_payload(fit),
            "reference_q": reference_q,
        },
    }
    if fit is not None:
        _say(f"fitted q = {fit.q:.4f} (r^2 = {fit.r_squared:.3f}) over "
             f"{fit.n_used} points; reference ln2/(6*L0) = {reference_q:.4f}")
    else:
        _say("too few usable points for a decay fit")
    rows = [(e.target, e.distance, e.mean, e.stderr) for e in estimates]
    return [record], (("target", "distance", "mean", "stderr"), rows)


def cmd_minami(cfg: ExperimentConfig):
    estimates, fit = minami_scan(cfg.length, _disorder(cfg), cfg.s, _z(cfg), cfg.samples)
    config = _physics(cfg, "length", "distribution", "dist_params", "lambda",
                      "s", "energy", "eta", "samples", "master_seed")
    record = {
        "record_type": "minami",
        "config": config,
        "payload": {
            "points": [
                {"n": e.target, "distance": e.distance,
                 "mean": e.mean, "stderr": e.stderr}
                for e in estimates
            ],
            "fit": _fit_payload(fit),
        },
    }
    if fit is not None:
        _say(f"fitted m = {fit.q:.4f} (r^2 = {fit.r_squared:.3f}) on segment length {cfg.length}")
    else:
        _say(f"scan of length {cfg.length} done; too short for a decay fit")
    rows = [(e.target, e.distance, e.mean, e.stderr) for e in estimates]
    return [record], (("n", "distance", "mean", "stderr"), rows)


def cmd_probe(cfg: ExperimentConfig):
    probes = bound_probe(cfg.region_size, _disorder(cfg), cfg.s, cfg.energy,
                         cfg.etas, cfg.samples, pairs=cfg.pairs)
    config = _physics(cfg, "region_size", "distribution", "dist_params",
                      "lambda", "s", "energy", "etas", "pairs", "samples",
                      "master_seed")
    record = {
        "record_type": "probe",
        "config": config,
        "payload": {
            "rows": [
                {"eta": p.eta, "max_mean": p.max_mean, "max_stderr": p.max_stderr}
                for p in probes
            ],
        },
    }
    for p in probes:
        _say(f"eta = {p.eta:g}: max moment {p.max_mean:.4f} +- {p.max_stderr:.4f}")
    rows = [(p.eta, p.max_mean, p.max_stderr) for p in probes]
    return [record], (("eta", "max_mean", "max_stderr"), rows)


def cmd_segment(cfg: ExperimentConfig):
    if cfg.x1 is None or cfg.v is None:
        raise ConfigError("segment requires x1 and v (vertex ids on the ball)")
    ball = build_ball(_params(cfg))
    for name, vertex in (("x1", cfg.x1), ("v", cfg.v)):
        if not 0 <= vertex < ball.n:
            raise ConfigError(f"{name} = {vertex} outside ball of {ball.n} vertices")
    res = segment_path(ball, cfg.x1, cfg.v, cfg.L0)
    report = verify_segmentation(ball, res, cfg.v)
    config = _physics(cfg, "k", "gamma", "radius", "x1", "v", "L0")
    record = {
        "record_type": "segment",
        "config": config,
        "payload": {
            "pairs": [list(p) for p in res.pairs],
            "offsets": [list(o) for o in res.offsets],
            "l": res.l,
            "properties": [
                {"name": c.name, "passed": c.passed, "witnesses": list(c.witnesses)}
                for c in report.checks
            ],
            "passed": report.passed,
        },
    }
    _say(f"{res.l} pieces from {cfg.x1} to {cfg.v} at L0 = {cfg.L0}:")
    for (xj, vj), (a, b) in zip(res.pairs, res.offsets):
        _say(f"  (x_j, v_j) = ({xj}, {vj})  offsets ({a}, {b})")
    for line in report.lines():
        _say("  " + line)
    rows = [
        (j + 1, xj, vj, a, b)
        for j, ((xj, vj), (a, b)) in enumerate(zip(res.pairs, res.offsets))
    ]
    return [record], (("j", "x_j", "v_j", "offset_x", "offset_v"), rows)


def cmd_spectrum(cfg: ExperimentConfig):
    ball = build_ball(_params(cfg))
    if cfg.source >= ball.n:
        raise ConfigError(f"source {cfg.source} outside ball of {ball.n} vertices")
    potential = sample_potential(_disorder(cfg), ball, cfg.realization)
    h = assemble(ball, _kind(cfg), potential, cfg.lam)
    dec = spectrum_full(h)
    metrics = eigen_metrics(dec, ball)
    iprs = np.array([m.ipr for m in metrics])
    residual = stieltjes_residual(h, dec, cfg.source, _z(cfg))
    ks = None
    if dec.n >= 50:
        ks = spacing_statistics(dec.eigenvalues).ks_distance
    config = _physics(cfg, "k", "gamma", "radius", "laplacian", "distribution",
                      "dist_params", "lambda", "energy", "eta", "master_seed",
                      "realization", "source")
    record = {
        "record_type": "spectrum",
        "config": config,
        "payload": {
            "n": dec.n,
            "trace": float(dec.eigenvalues.sum()),
            "median_ipr": float(np.median(iprs)),
            "mean_ipr": float(iprs.mean()),
            "min_ipr": float(iprs.min()),
            "max_ipr": float(iprs.max()),
            "ks_distance": ks,
            "stieltjes_residual": residual,
        },
    }
    _say(f"{dec.n} levels: median IPR {np.median(iprs):.4f}, "
         f"KS-to-exponential {ks if ks is None else round(ks, 4)}, "
         f"Stieltjes residual {residual:.2e}")
    rows = [
        (m.index, m.energy, m.ipr, m.decay_rate, m.r_squared)
        for m in metrics
    ]
    return [record], (("index", "energy", "ipr", "decay_rate", "r_squared"), rows)


_HANDLERS = {
    "tree": cmd_tree,
    "green": cmd_green,
    "moments": cmd_moments,
    "minami": cmd_minami,
    "probe": cmd_probe,
    "segment": cmd_segment,
    "spectrum": cmd_spectrum,
}


def _emit(subcommand: str, cfg: ExperimentConfig, records: list[dict],
          csv_data, argv: list[str]) -> None:
    text = "".join(_dumps(r) + "\n" for r in records)
    sys.stdout.write(text)
    out = cfg.output
    if out is None and os.environ.get("ANDERTREE_OUTDIR"):
        out = os.path.join(os.environ["ANDERTREE_OUTDIR"], f"{subcommand}.jsonl")
    if out:
        os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
        meta = {
            "subcommand": subcommand,
            "argv": argv,
            "workers": cfg.workers,
            "backend": _kernels.current_backend(),
            "written_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        }
        with open(out + ".meta.json", "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
        _say(f"records -> {out}")
    if cfg.csv and csv_data is not None:
        header, rows = csv_data
        os.makedirs(os.path.dirname(os.path.abspath(cfg.csv)), exist_ok=True)
        with open(cfg.csv, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
        _say(f"csv -> {cfg.csv}")


def cmd_verify(quick: bool, cfg: ExperimentConfig, argv: list[str]) -> int:
    from .acceptance import run_all

    results = run_all(quick=quick)
    records = []
    for r in results:
        mark = "pass" if r.passed else "FAIL"
        print(f"[{mark}] {r.number:2d} {r.name}: {r.detail} "
              f"({r.seconds:.1f}s / budget {r.budget:.0f}s)")
        records.append({
            "record_type": "verify",
            "config": {"quick": quick},
            "payload": {
                "number": r.number, "name": r.name, "passed": r.passed,
                "detail": r.detail, "seconds": round(r.seconds, 3),
                "budget": r.budget,
            },
        })
    total = sum(r.seconds for r in results)
    failed = [r.number for r in results if not r.passed]
    if cfg.output:
        _emit("verify", cfg, records, None, argv)
    if failed:
        print(f"{len(failed)} criteria failed: {failed} ({total:.0f}s total)")
        return 1
    print(f"all {len(results)} criteria passed ({total:.0f}s total)")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="key = value config file")
    for key in KNOWN_KEYS:
        common.add_argument("--" + key.replace("_", "-"), dest=f"kv_{key}",
                            metavar="V", help=argparse.SUPPRESS)
    parser = argparse.ArgumentParser(
        prog="andertree",
        description="Anderson localization experiments on sparse trees",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    helps = {
        "tree": "ball statistics and dimension estimate",
        "green": "resolvent entries for one disorder realization",
        "moments": "fractional-moment scan and decay fit",
        "minami": "1D segment moment scan",
        "probe": "small-eta boundedness probe",
        "segment": "path segmentation and property report",
        "spectrum": "dense spectral diagnostics",
        "verify": "run the acceptance suite",
    }
    for name in _SUBCOMMANDS:
        p = sub.add_parser(name, parents=[common], help=helps[name])
        if name == "verify":
            p.add_argument("--quick", action="store_true",
                           help="reduced sample counts (documented in README)")
    return parser


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        code = e.code
        return 0 if code in (0, None) else 2
    try:
        file_values = parse_config_file(args.config) if args.config else {}
        flag_values = {
            key: getattr(args, f"kv_{key}")
            for key in KNOWN_KEYS
            if getattr(args, f"kv_{key}", None) is not None
        }
        cfg = resolve_config(file_values, flag_values)
        if args.subcommand == "verify":
            return cmd_verify(args.quick, cfg, list(argv))
        records, csv_data = _HANDLERS[args.subcommand](cfg)
        _emit(args.subcommand, cfg, records, csv_data, list(argv))
        return 0
    except (ConfigError, PreconditionError, BallSizeError) as e:
        _say(f"error: {e}")
        return 2
    except ValueError as e:
        _say(f"error: {e}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
