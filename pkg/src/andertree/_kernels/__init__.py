"""Backend dispatch for the numeric kernels.

Two interchangeable lanes implement the same kernel contracts: a numba
@njit lane (default when numba imports) and a pure-numpy lane.  The
environment variable ANDERTREE_BACKEND selects the lane at import time
("numba" or "numpy"); use_backend() switches at runtime, which the tests
and the benchmark use to compare both.
"""

from __future__ import annotations

import os

from . import numpy_backend

try:
    from . import numba_backend
except ImportError:  # pragma: no cover - sandboxed fallback
    numba_backend = None

_BACKENDS = {"numpy": numpy_backend}
if numba_backend is not None:
    _BACKENDS["numba"] = numba_backend

_active = None


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def use_backend(name: str):
    """Select the kernel lane by name; returns the module for convenience."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(
            f"unknown backend {name!r}; available: {', '.join(available_backends())}"
        )
    _active = _BACKENDS[name]
    return _active


def current_backend() -> str:
    return _active.NAME


def _resolve_initial():
    env = os.environ.get("ANDERTREE_BACKEND", "").strip().lower()
    if env:
        if env not in _BACKENDS:
            raise ValueError(
                f"ANDERTREE_BACKEND={env!r} not available; choose from "
                f"{', '.join(available_backends())}"
            )
        return env
    return "numba" if "numba" in _BACKENDS else "numpy"


use_backend(_resolve_initial())


def tree_solve(parent, shell_start, active, dz, rhs):
    return _active.tree_solve(parent, shell_start, active, dz, rhs)


def bfs_distances(parent, child_start, child_count, src):
    return _active.bfs_distances(parent, child_start, child_count, src)


def segment_corner_pows(dz, s):
    return _active.segment_corner_pows(dz, s)
