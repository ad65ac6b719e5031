"""Finite balls of a sparse-tree family interpolating between a chain and a
regular tree.

The family is parametrized by a branching number ``k >= 2`` and a stretch
factor ``gamma >= 1``.  Starting from a root, a vertex carries ``k`` forward
edges exactly when its depth is one of the junction radii

    R_0 = 0,   R_N = sum_{j=1}^{N} floor(gamma**j),

and a single forward edge otherwise.  ``gamma = 1`` makes every vertex a
junction (the regular rooted tree with forward degree ``k``); large ``gamma``
produces long one-dimensional stretches between consecutive junction shells,
and the volume exponent of balls tends to ``1 + log k / log gamma``.

A :class:`TreeBall` materializes the ball of a given radius with BFS vertex
ids (root 0, children in creation order), stored as flat numpy arrays so the
numeric kernels can run on them directly.  Region bookkeeping (edge boundaries,
fattenings, boundary vertices) lives here too, since it is pure geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "DEFAULT_VERTEX_CAP",
    "BallSizeError",
    "TreeParams",
    "TreeBall",
    "Region",
    "PathSegment",
    "shell_radius",
    "junction_radii_upto",
    "ball_size_exact",
    "dimension_estimate",
    "build_ball",
    "build_segment",
    "path",
    "junction_distance",
    "theta",
    "expand",
    "boundary_vertices",
    "leftmost_ray",
]

# Balls beyond this many vertices are refused by build_ball; the closed-form
# counts remain available at any radius.
DEFAULT_VERTEX_CAP = 5_000_000

# floor(gamma**j) snaps to the nearest integer when within this distance,
# so that float pow noise cannot shift a junction shell.
_INTEGER_GUARD = 1e-9


class BallSizeError(RuntimeError):
    """Raised when a requested ball would exceed the vertex cap."""

    def __init__(self, projected: int, cap: int):
        self.projected = projected
        self.cap = cap
        super().__init__(
            f"ball would contain {projected} vertices, above the cap of {cap}; "
            f"use ball_size_exact/dimension_estimate for counts at this radius "
            f"or raise max_vertices explicitly"
        )


def _stretch_length(gamma: float, j: int) -> int:
    """floor(gamma**j), guarded against float pow landing just under an integer."""
    if float(gamma).is_integer():
        return int(gamma) ** j
    x = float(gamma) ** j
    r = round(x)
    if abs(x - r) <= _INTEGER_GUARD:
        return int(r)
    return int(math.floor(x))


@dataclass(frozen=True)
class TreeParams:
    """Parameters of one tree ball: branching k, stretch gamma, radius."""

    k: int
    gamma: float
    radius: int

    def __post_init__(self):
        if not isinstance(self.k, (int, np.integer)) or isinstance(self.k, bool):
            raise ValueError(f"k must be an integer, got {self.k!r}")
        if self.k < 2:
            raise ValueError(f"k must be >= 2, got {self.k}")
        if not self.gamma >= 1.0:
            raise ValueError(f"gamma must be >= 1, got {self.gamma}")
        if not isinstance(self.radius, (int, np.integer)) or isinstance(self.radius, bool):
            raise ValueError(f"radius must be an integer, got {self.radius!r}")
        if self.radius < 0:
            raise ValueError(f"radius must be >= 0, got {self.radius}")


def shell_radius(params: TreeParams, n: int) -> int:
    """Distance R_n from the root to the n-th junction shell (n >= 1)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return sum(_stretch_length(params.gamma, j) for j in range(1, n + 1))


def junction_radii_upto(params: TreeParams, r: int) -> list[int]:
    """All junction depths in [0, r]: 0 together with every R_N <= r."""
    if r < 0:
        raise ValueError(f"r must be >= 0, got {r}")
    radii = [0]
    total, j = 0, 1
    while True:
        total += _stretch_length(params.gamma, j)
        if total > r:
            break
        radii.append(total)
        j += 1
    return radii


def ball_size_exact(params: TreeParams, r: int | None = None) -> int:
    """Exact vertex count of the radius-r ball, as a python int.

    The shell at depth d holds k**m(d) vertices where m(d) counts the
    junction radii <= d-1; the sum is taken interval-by-interval between
    consecutive junction depths, so the cost is the number of junction
    shells, not r.
    """
    if r is None:
        r = params.radius
    if r < 0:
        raise ValueError(f"r must be >= 0, got {r}")
    total = 1  # root shell
    shell = 1
    d = 0  # last depth accounted for
    next_j = 0  # junction depth whose children are the next to multiply
    j = 0
    while d < r:
        # children of depth next_j start at next_j + 1 with shell * k vertices
        shell *= params.k
        j += 1
        step = _stretch_length(params.gamma, j)
        upper = min(next_j + step, r)
        total += shell * (upper - next_j)
        d = upper
        next_j += step
    return total


def dimension_estimate(params: TreeParams, r: int | None = None) -> float:
    """log(ball size) / log(r), the finite-radius volume exponent.

    Converges to 1 + log k / log gamma as r grows; defined for gamma > 1
    and r >= 2 only.
    """
    if r is None:
        r = params.radius
    if params.gamma == 1.0:
        raise ValueError("dimension_estimate requires gamma > 1 (gamma = 1 grows exponentially)")
    if r < 2:
        raise ValueError(f"r must be >= 2, got {r}")
    return math.log(ball_size_exact(params, r)) / math.log(r)


@dataclass
class TreeBall:
    """A materialized ball with BFS ids and flat-array structure.

    Arrays
    ------
    parent      : int64[n]  parent id, -1 at the root
    depth       : int64[n]  distance from the root
    is_junction : bool[n]   vertex carries k forward edges in the full tree
    full_degree : int64[n]  degree in the infinite graph (not the ball)
    shell_start : int64[max_depth + 2]  shell d occupies ids
                  [shell_start[d], shell_start[d + 1])
    """

    params: TreeParams | None
    parent: np.ndarray
    depth: np.ndarray
    is_junction: np.ndarray
    full_degree: np.ndarray
    shell_start: np.ndarray
    _child_start: np.ndarray | None = field(default=None, repr=False)
    _child_count: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return int(self.parent.shape[0])

    @property
    def max_depth(self) -> int:
        return int(self.shell_start.shape[0]) - 2

    def _ensure_children(self):
        if self._child_start is not None:
            return
        n = self.n
        start = np.zeros(n, dtype=np.int64)
        count = np.zeros(n, dtype=np.int64)
        ss = self.shell_start
        for d in range(self.max_depth):
            s, e = int(ss[d]), int(ss[d + 1])
            if s == e:
                continue
            ns, ne = int(ss[d + 1]), int(ss[d + 2])
            c = (ne - ns) // (e - s)
            idx = np.arange(s, e, dtype=np.int64)
            start[idx] = ns + (idx - s) * c
            count[idx] = c
        self._child_start = start
        self._child_count = count

    def children(self, x: int) -> np.ndarray:
        self._ensure_children()
        s = int(self._child_start[x])
        return np.arange(s, s + int(self._child_count[x]), dtype=np.int64)

    def neighbors(self, x: int) -> np.ndarray:
        p = int(self.parent[x])
        ch = self.children(x)
        if p < 0:
            return ch
        return np.concatenate(([p], ch))

    def distances_from(self, src: int) -> np.ndarray:
        """Graph distance from src to every vertex of the ball."""
        if not 0 <= src < self.n:
            raise ValueError(f"vertex {src} outside ball of {self.n} vertices")
        self._ensure_children()
        from . import _kernels

        return _kernels.bfs_distances(
            self.parent, self._child_start, self._child_count, int(src)
        )


def build_ball(params: TreeParams, max_vertices: int = DEFAULT_VERTEX_CAP) -> TreeBall:
    """Materialize the ball of radius params.radius with BFS ids.

    Construction is deterministic: the root gets id 0, each shell is laid
    out in parent order with a vertex's children consecutive.  Refuses to
    build beyond max_vertices (the projected size comes from the closed
    form, so the refusal itself is cheap).
    """
    r = params.radius
    n = ball_size_exact(params, r)
    if n > max_vertices:
        raise BallSizeError(n, max_vertices)

    jdepths = set(junction_radii_upto(params, r))
    parent = np.empty(n, dtype=np.int64)
    depth = np.empty(n, dtype=np.int64)
    shell_start = np.empty(r + 2, dtype=np.int64)
    parent[0] = -1
    depth[0] = 0
    shell_start[0] = 0
    shell_start[1] = 1
    prev = np.array([0], dtype=np.int64)
    pos = 1
    for d in range(1, r + 1):
        c = params.k if (d - 1) in jdepths else 1
        m = prev.shape[0] * c
        ids = np.arange(pos, pos + m, dtype=np.int64)
        parent[ids] = np.repeat(prev, c)
        depth[ids] = d
        pos += m
        shell_start[d + 1] = pos
        prev = ids

    is_junction = np.zeros(n, dtype=bool)
    for jd in jdepths:
        if jd <= r:
            is_junction[shell_start[jd] : shell_start[jd + 1]] = True
    full_degree = np.where(is_junction, params.k + 1, 2).astype(np.int64)
    full_degree[0] = params.k  # root has no backward edge
    return TreeBall(params, parent, depth, is_junction, full_degree, shell_start)


def build_segment(n_vertices: int) -> TreeBall:
    """A path graph 0 - 1 - ... - (n-1) viewed as a degenerate ball.

    Used for one-dimensional scans: ids run along the segment, no vertex is
    a junction, and full_degree is 2 everywhere (the segment is a piece of
    the two-sided chain, so both endpoints keep their off-segment edge in
    the infinite graph).
    """
    if n_vertices < 1:
        raise ValueError(f"n_vertices must be >= 1, got {n_vertices}")
    n = int(n_vertices)
    ids = np.arange(n, dtype=np.int64)
    return TreeBall(
        params=None,
        parent=ids - 1,
        depth=ids.copy(),
        is_junction=np.zeros(n, dtype=bool),
        full_degree=np.full(n, 2, dtype=np.int64),
        shell_start=np.arange(n + 1, dtype=np.int64),
    )


@dataclass(frozen=True)
class Region:
    """A subset of ball vertices, stored as a sorted unique id array."""

    ids: np.ndarray

    @classmethod
    def from_ids(cls, ids: Iterable[int]) -> "Region":
        arr = np.unique(np.asarray(list(ids) if not isinstance(ids, np.ndarray) else ids, dtype=np.int64))
        return cls(arr)

    def __len__(self) -> int:
        return int(self.ids.shape[0])

    def __contains__(self, x: int) -> bool:
        i = np.searchsorted(self.ids, x)
        return i < len(self.ids) and self.ids[i] == x

    def mask(self, n: int) -> np.ndarray:
        m = np.zeros(n, dtype=bool)
        m[self.ids] = True
        return m


@dataclass(frozen=True)
class PathSegment:
    """The unique path between two ball vertices, as an ordered id array."""

    ids: np.ndarray

    @property
    def distance(self) -> int:
        return int(self.ids.shape[0]) - 1

    def as_region(self) -> Region:
        return Region.from_ids(self.ids)


def _check_vertex(ball: TreeBall, x: int, name: str = "vertex"):
    if not 0 <= x < ball.n:
        raise ValueError(f"{name} {x} outside ball of {ball.n} vertices")


def path(ball: TreeBall, x: int, y: int) -> PathSegment:
    """Ordered vertex ids from x to y (inclusive) along the unique tree path."""
    _check_vertex(ball, x, "x")
    _check_vertex(ball, y, "y")
    up_x = [int(x)]
    up_y = [int(y)]
    a, b = int(x), int(y)
    da, db = int(ball.depth[a]), int(ball.depth[b])
    while da > db:
        a = int(ball.parent[a])
        da -= 1
        up_x.append(a)
    while db > da:
        b = int(ball.parent[b])
        db -= 1
        up_y.append(b)
    while a != b:
        a = int(ball.parent[a])
        b = int(ball.parent[b])
        up_x.append(a)
        up_y.append(b)
    ids = up_x + up_y[-2::-1]  # drop the duplicated meeting vertex
    return PathSegment(np.asarray(ids, dtype=np.int64))


def junction_distance(ball: TreeBall, x: int, v: int) -> int | float:
    """Distance from x to the nearest junction on the path to v, counting x.

    Returns 0 when x itself is a junction and math.inf when the path
    carries no junction at all.
    """
    p = path(ball, x, v)
    flags = ball.is_junction[p.ids]
    hits = np.nonzero(flags)[0]
    if hits.shape[0] == 0:
        return math.inf
    return int(hits[0])


def _region_mask(ball: TreeBall, omega: Region) -> np.ndarray:
    if len(omega) and (omega.ids[0] < 0 or omega.ids[-1] >= ball.n):
        raise ValueError("region contains ids outside the ambient ball")
    return omega.mask(ball.n)


def theta(ball: TreeBall, omega: Region) -> list[tuple[int, int]]:
    """Ordered boundary bonds (x, x') with x in omega, x' outside, adjacent.

    Only bonds of the ambient ball are materialized, so a region touching
    the ball surface has no bonds across that surface.  Pairs are sorted.
    """
    m = _region_mask(ball, omega)
    c = np.arange(1, ball.n, dtype=np.int64)
    p = ball.parent[c]
    out_pairs = []
    down = (m[p]) & (~m[c])  # member parent -> outside child
    up = (~m[p]) & (m[c])  # member child -> outside parent
    for pp, cc in zip(p[down], c[down]):
        out_pairs.append((int(pp), int(cc)))
    for pp, cc in zip(p[up], c[up]):
        out_pairs.append((int(cc), int(pp)))
    out_pairs.sort()
    return out_pairs


def expand(ball: TreeBall, omega: Region, steps: int) -> Region:
    """All vertices within the given distance (1 or 2) of the region."""
    if steps not in (1, 2):
        raise ValueError(f"steps must be 1 or 2, got {steps}")
    m = _region_mask(ball, omega)
    ball._ensure_children()
    for _ in range(steps):
        ids = np.nonzero(m)[0]
        par = ball.parent[ids]
        nm = m.copy()
        nm[par[par >= 0]] = True
        starts = ball._child_start[ids]
        counts = ball._child_count[ids]
        total = int(counts.sum())
        if total:
            offs = np.repeat(starts, counts) + _ragged_arange(counts)
            nm[offs] = True
        m = nm
    return Region(np.nonzero(m)[0].astype(np.int64))


def _ragged_arange(counts: np.ndarray) -> np.ndarray:
    """Concatenation of arange(c) for each c in counts."""
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    ends = np.cumsum(counts)
    out = np.arange(total, dtype=np.int64)
    out -= np.repeat(ends - counts, counts)
    return out


def boundary_vertices(ball: TreeBall, omega: Region) -> np.ndarray:
    """Members of omega adjacent (within the ball) to at least one non-member."""
    m = _region_mask(ball, omega)
    b = np.zeros(ball.n, dtype=bool)
    c = np.arange(1, ball.n, dtype=np.int64)
    p = ball.parent[c]
    down = m[p] & ~m[c]
    up = m[c] & ~m[p]
    b[p[down]] = True
    b[c[up]] = True
    return np.nonzero(b)[0].astype(np.int64)


def leftmost_ray(ball: TreeBall, source: int = 0, max_distance: int | None = None) -> np.ndarray:
    """Ids along the first-child chain from source; entry d sits at distance d."""
    _check_vertex(ball, source, "source")
    ball._ensure_children()
    out = [int(source)]
    x = int(source)
    while ball._child_count[x] > 0:
        if max_distance is not None and len(out) > max_distance:
            break
        x = int(ball._child_start[x])
        out.append(x)
    if max_distance is not None:
        out = out[: max_distance + 1]
    return np.asarray(out, dtype=np.int64)
