"""Experiment configuration: flat key = value files plus flag overrides.

The file format is intentionally dumb: UTF-8 lines of `key = value`,
`#` starts a comment, arrays are comma-separated.  Flags and file keys
share one vocabulary and one validation pass; flags win.  Every
constraint of the underlying modules is re-checked here so a bad config
dies at parse time with a usable message instead of deep in a run.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

__all__ = ["ConfigError", "ExperimentConfig", "parse_config_file", "resolve_config", "KNOWN_KEYS"]


class ConfigError(ValueError):
    """Bad configuration; the CLI maps this to exit code 2."""


_DISTRIBUTIONS = ("uniform", "gaussian", "cauchy")

# every key accepted in a config file or as a --flag
KNOWN_KEYS = (
    "k", "gamma", "radius",
    "laplacian", "distribution", "dist_params",
    "lambda", "s", "energy", "eta", "samples", "master_seed", "realization",
    "source", "targets", "distance", "step",
    "length",
    "region_size", "etas", "pairs",
    "x1", "v", "L0",
    "output", "csv", "workers",
)


@dataclass(frozen=True)
class ExperimentConfig:
    k: int = 2
    gamma: float = 2.0
    radius: int = 62
    laplacian: str = "adjacency"
    distribution: str = "uniform"
    dist_params: tuple = (-0.5, 0.5)
    lam: float = 3.0
    s: float = 0.5
    energy: float = 0.0
    eta: float = 1e-3
    samples: int = 200
    master_seed: int = 2026
    realization: int = 0
    source: int = 0
    targets: str | tuple = "ray"  # "ray" or explicit id tuple
    distance: int = 60
    step: int = 4
    length: int = 60
    region_size: int = 40
    etas: tuple = (1e-1, 1e-2, 1e-3, 1e-4)
    pairs: int = 4
    x1: int | None = None
    v: int | None = None
    L0: int = 5
    output: str | None = None
    csv: str | None = None
    workers: int = field(default_factory=lambda: _default_workers())


def _default_workers() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def parse_config_file(path: str) -> dict[str, str]:
    """Read key = value lines; unknown keys are rejected immediately."""
    out: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def _to_int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {value!r}") from None


def _to_float(key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {value!r}") from None


def _to_floats(key: str, value: str) -> tuple:
    return tuple(_to_float(key, part.strip()) for part in value.split(",") if part.strip())


def resolve_config(file_values: dict[str, str], flag_values: dict[str, str]) -> ExperimentConfig:
    """Merge file and flag values (flags win) and validate everything."""
    for key in flag_values:
        if key not in KNOWN_KEYS:
            raise ConfigError(f"unknown key {key!r}")
    raw = dict(file_values)
    raw.update(flag_values)

    kw: dict = {}
    if "k" in raw:
        kw["k"] = _to_int("k", raw["k"])
    if "gamma" in raw:
        kw["gamma"] = _to_float("gamma", raw["gamma"])
    if "radius" in raw:
        kw["radius"] = _to_int("radius", raw["radius"])
    if "laplacian" in raw:
        kw["laplacian"] = raw["laplacian"].strip().lower()
    if "distribution" in raw:
        kw["distribution"] = raw["distribution"].strip().lower()
    if "dist_params" in raw:
        kw["dist_params"] = _to_floats("dist_params", raw["dist_params"])
    if "lambda" in raw:
        kw["lam"] = _to_float("lambda", raw["lambda"])
    for key in ("s", "energy", "eta"):
        if key in raw:
            kw[key] = _to_float(key, raw[key])
    for key in ("samples", "master_seed", "realization", "source", "distance",
                "step", "length", "region_size", "pairs", "x1", "v", "L0", "workers"):
        if key in raw:
            kw[key] = _to_int(key, raw[key])
    if "etas" in raw:
        kw["etas"] = _to_floats("etas", raw["etas"])
    if "targets" in raw:
        t = raw["targets"].strip()
        if t.lower() == "ray":
            kw["targets"] = "ray"
        else:
            kw["targets"] = tuple(_to_int("targets", p.strip()) for p in t.split(",") if p.strip())
            if not kw["targets"]:
                raise ConfigError("targets must be 'ray' or a comma-separated id list")
    for key in ("output", "csv"):
        if key in raw:
            kw[key] = raw[key].strip() or None

    cfg = ExperimentConfig(**kw)
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    if cfg.k < 2:
        raise ConfigError(f"k must be >= 2, got {cfg.k}")
    if not cfg.gamma >= 1.0:
        raise ConfigError(f"gamma must be >= 1, got {cfg.gamma}")
    if cfg.radius < 0:
        raise ConfigError(f"radius must be >= 0, got {cfg.radius}")
    if cfg.laplacian not in ("adjacency", "graph"):
        raise ConfigError(f"laplacian must be adjacency or graph, got {cfg.laplacian!r}")
    if cfg.distribution == "bernoulli":
        raise ConfigError(
            "bernoulli disorder has no bounded density, which the fractional-moment "
            "bounds require; localization for it on these trees is an open problem"
        )
    if cfg.distribution not in _DISTRIBUTIONS:
        raise ConfigError(
            f"distribution must be one of {', '.join(_DISTRIBUTIONS)}, got {cfg.distribution!r}"
        )
    if len(cfg.dist_params) != 2:
        raise ConfigError(f"dist_params needs exactly 2 values, got {len(cfg.dist_params)}")
    if not cfg.lam > 0:
        raise ConfigError(f"lambda must be > 0, got {cfg.lam}")
    if not 0.0 < cfg.s < 1.0:
        raise ConfigError(f"s must lie in the open interval (0, 1), got {cfg.s}")
    if not cfg.eta > 0:
        raise ConfigError(f"eta must be > 0, got {cfg.eta}")
    if cfg.samples < 1:
        raise ConfigError(f"samples must be >= 1, got {cfg.samples}")
    if not 0 <= cfg.master_seed < 2**64:
        raise ConfigError(f"master_seed must fit in 64 bits, got {cfg.master_seed}")
    if cfg.realization < 0:
        raise ConfigError(f"realization must be >= 0, got {cfg.realization}")
    if cfg.source < 0:
        raise ConfigError(f"source must be a vertex id >= 0, got {cfg.source}")
    if cfg.distance < 1:
        raise ConfigError(f"distance must be >= 1, got {cfg.distance}")
    if cfg.step < 1:
        raise ConfigError(f"step must be >= 1, got {cfg.step}")
    if cfg.length < 1:
        raise ConfigError(f"length must be >= 1, got {cfg.length}")
    if cfg.region_size < 1:
        raise ConfigError(f"region_size must be >= 1, got {cfg.region_size}")
    if not cfg.etas:
        raise ConfigError("etas must be a nonempty descending list of positive values")
    if any(not e > 0 for e in cfg.etas):
        raise ConfigError(f"etas must all be > 0, got {cfg.etas}")
    if any(a <= b for a, b in zip(cfg.etas, cfg.etas[1:])):
        raise ConfigError(f"etas must be strictly descending, got {cfg.etas}")
    if cfg.pairs < 1:
        raise ConfigError(f"pairs must be >= 1, got {cfg.pairs}")
    if cfg.L0 < 5:
        raise ConfigError(f"L0 must be >= 5, got {cfg.L0}")
    if cfg.workers < 1:
        raise ConfigError(f"workers must be >= 1, got {cfg.workers}")
    if isinstance(cfg.targets, tuple) and any(t < 0 for t in cfg.targets):
        raise ConfigError(f"target ids must be >= 0, got {cfg.targets}")
