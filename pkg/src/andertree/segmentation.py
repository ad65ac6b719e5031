"""Segmentation of a tree path into junction-aware pieces.

Given endpoints x1 and v whose path is long enough and whose junctions
are sparse enough, the construction emits pairs (x_j, v_j) marching from
x1 toward v: v_j sits L0 past x_j when the nearest junction ahead is at
least 3 L0 away, and 5 L0 past otherwise; x_{j+1} sits 3 past v_j; the
march stops by sending the last v_j to v once at most 7 L0 steps remain.

The four properties the construction is meant to deliver: every x_j is
at least L0 from the next junction ahead, each piece holds at most one
junction and never ends within L0 of it, every piece is at least L0
long, and l * (5 L0 + 3) >= d(x1, v).  The last two of these need more
than the bare preconditions: a junction may sit closer than L0 before v
(breaking the margin on the final piece), and a 5 L0 first step straight
into a long final piece can undercut the count.  random_instance
therefore samples geometries with the nearest junction at least 3 L0
past x1 and every junction at least L0 short of v, which provably makes
all four properties hold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tree import (
    TreeBall,
    TreeParams,
    ball_size_exact,
    build_ball,
    junction_radii_upto,
    leftmost_ray,
    path,
    shell_radius,
)

__all__ = [
    "MIN_L0",
    "PreconditionError",
    "SegmentationResult",
    "PropertyCheck",
    "SegmentationReport",
    "segment_path",
    "verify_segmentation",
    "random_instance",
]

MIN_L0 = 5


class PreconditionError(ValueError):
    """A segmentation precondition failed; carries the condition and value."""

    def __init__(self, condition: str, value, message: str):
        self.condition = condition
        self.value = value
        super().__init__(message)


@dataclass(frozen=True)
class SegmentationResult:
    """Pairs (x_j, v_j) as vertex ids, plus their offsets along the path."""

    source: int
    target: int
    L0: int
    pairs: tuple  # ((x_1, v_1), ..., (x_l, v_l)) vertex ids
    offsets: tuple  # same pairs as distances from x_1 along the path

    @property
    def l(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class PropertyCheck:
    name: str
    passed: bool
    witnesses: tuple = ()


@dataclass(frozen=True)
class SegmentationReport:
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            mark = "pass" if c.passed else "FAIL"
            line = f"[{mark}] {c.name}"
            for w in c.witnesses:
                line += f"\n       {w}"
            out.append(line)
        return out


def _junction_offsets(ball: TreeBall, ids: np.ndarray) -> list[int]:
    return [int(i) for i in np.nonzero(ball.is_junction[ids])[0]]


def _march(d: int, junction_offsets: list[int], L0: int) -> list[tuple[int, int]]:
    """Run the marching rules on offsets along a path of length d.

    junction_offsets are the distances from the start to each junction on
    the path, ascending.  No floor on L0 here beyond L0 >= 1, so the rules
    can be exercised directly at small L0; segment_path applies MIN_L0.
    """
    if L0 < 1:
        raise ValueError(f"L0 must be >= 1, got {L0}")
    if d <= 7 * L0:
        raise ValueError(f"path length {d} must exceed 7*L0 = {7 * L0}")

    def jdist(off: int) -> float:
        for j in junction_offsets:
            if j >= off:
                return j - off
        return math.inf

    pairs = []
    a = 0
    while True:
        step = L0 if jdist(a) >= 3 * L0 else 5 * L0
        pairs.append((a, a + step))
        nxt = a + step + 3
        if d - nxt <= 7 * L0:
            pairs.append((nxt, d))
            return pairs
        a = nxt


def segment_path(ball: TreeBall, x1: int, v: int, L0: int) -> SegmentationResult:
    """Segment the path from x1 to v; raises PreconditionError when the
    geometry does not admit the construction."""
    if L0 < MIN_L0:
        raise PreconditionError("L0", L0, f"L0 must be >= {MIN_L0}, got {L0}")
    walk = path(ball, x1, v)
    d = walk.distance
    if d <= 7 * L0:
        raise PreconditionError(
            "path_length", d, f"d(x1, v) = {d} must exceed 7*L0 = {7 * L0}"
        )
    joff = _junction_offsets(ball, walk.ids)
    j1 = joff[0] if joff else math.inf
    if not j1 > L0:
        raise PreconditionError(
            "junction_clearance",
            j1,
            f"nearest junction toward v is {j1} steps from x1, must exceed L0 = {L0}",
        )
    for a, b in zip(joff, joff[1:]):
        if b - a <= 8 * L0:
            raise PreconditionError(
                "junction_gap",
                b - a,
                f"consecutive junctions on the path are {b - a} apart, must exceed 8*L0 = {8 * L0}",
            )

    pairs = _march(d, joff, L0)
    for a, b in pairs:
        inside = [j for j in joff if a <= j <= b]
        if len(inside) > 1:  # gap > 8*L0 and piece <= 7*L0 forbid this
            raise AssertionError(
                f"piece at offsets ({a}, {b}) contains junctions {inside}"
            )

    ids = walk.ids
    id_pairs = tuple((int(ids[a]), int(ids[b])) for a, b in pairs)
    return SegmentationResult(
        source=int(x1), target=int(v), L0=int(L0),
        pairs=id_pairs, offsets=tuple(pairs),
    )


def verify_segmentation(ball: TreeBall, res: SegmentationResult, v: int) -> SegmentationReport:
    """Check the four segmentation properties of res against the path to v.

    Checks, each reported pass/fail with witnesses:
      start_clearance  distance from each x_j to the next junction >= L0
      junction_margin  each piece holds at most one junction, >= L0 before v_j
      piece_length     d(x_j, v_j) >= L0
      piece_count      l * (5 L0 + 3) >= d(x1, v)

    A failing property is reported, not raised; only a result whose pairs
    do not lie on the path to v at all is rejected as a ValueError.
    """
    if not res.pairs:
        raise ValueError("empty segmentation result")
    x1 = res.pairs[0][0]
    if res.pairs[-1][1] != v:
        raise ValueError(
            f"result ends at vertex {res.pairs[-1][1]}, not at v = {v}"
        )
    walk = path(ball, x1, v)
    d = walk.distance
    L0 = res.L0
    pos = {int(x): i for i, x in enumerate(walk.ids)}
    for xj, vj in res.pairs:
        if xj not in pos or vj not in pos:
            raise ValueError(f"pair ({xj}, {vj}) does not lie on the path to v")
    joff = _junction_offsets(ball, walk.ids)

    def jdist(off: int) -> float:
        for j in joff:
            if j >= off:
                return j - off
        return math.inf

    w1, w2, w3 = [], [], []
    for xj, vj in res.pairs:
        a, b = pos[xj], pos[vj]
        jd = jdist(a)
        if not jd >= L0:
            w1.append(f"x_j = {xj} (offset {a}): junction distance {jd} < L0 = {L0}")
        inside = [j for j in joff if a <= j <= b]
        if len(inside) > 1:
            w2.append(
                f"piece ({xj}, {vj}) at offsets ({a}, {b}) contains "
                f"{len(inside)} junctions at offsets {inside}"
            )
        elif inside and not b - inside[0] >= L0:
            w2.append(
                f"piece ({xj}, {vj}) at offsets ({a}, {b}): junction at offset "
                f"{inside[0]} is {b - inside[0]} before v_j, needs >= L0 = {L0}"
            )
        if not b - a >= L0:
            w3.append(f"piece ({xj}, {vj}) at offsets ({a}, {b}) has length {b - a} < L0 = {L0}")
    l = res.l
    count_ok = l * (5 * L0 + 3) >= d
    count_w = () if count_ok else (
        f"l = {l} pieces: l*(5*L0+3) = {l * (5 * L0 + 3)} < d = {d}",
    )

    checks = (
        PropertyCheck("start_clearance", not w1, tuple(w1)),
        PropertyCheck("junction_margin", not w2, tuple(w2)),
        PropertyCheck("piece_length", not w3, tuple(w3)),
        PropertyCheck("piece_count", count_ok, count_w),
    )
    return SegmentationReport(checks)


# ---------------------------------------------------------------------------
# Random precondition-satisfying instances for property fuzzing.

_BALL_CACHE: dict = {}
_CACHE_CAP = 16


def _cached_ball(k: int, gamma: float, radius: int) -> TreeBall:
    key = (k, round(gamma, 6), radius)
    ball = _BALL_CACHE.get(key)
    if ball is None:
        ball = build_ball(TreeParams(k, gamma, radius))
        if len(_BALL_CACHE) >= _CACHE_CAP:
            _BALL_CACHE.pop(next(iter(_BALL_CACHE)))
        _BALL_CACHE[key] = ball
    return ball


def _max_radius_within(k: int, gamma: float, budget: int, cap: int) -> int:
    probe = TreeParams(k, gamma, 0)
    if ball_size_exact(probe, cap) <= budget:
        return cap
    lo, hi = 0, cap  # size(lo) <= budget < size(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ball_size_exact(probe, mid) <= budget:
            lo = mid
        else:
            hi = mid
    return lo


def _pattern_menu(radii: list[int], r_star: int, L0: int) -> list[tuple[str, int]]:
    """Feasible (kind, junction-index) placements for one path instance.

    kinds: 'ray' junction-free inside one stretch; 'onej' straight through
    one junction; 'lca' both endpoints hanging under one junction on
    sibling branches; 'twoj' straight through two junctions (needs the
    gap > 8 L0).  radii must extend one junction past r_star.
    """
    menu = []
    m = len(radii) - 2  # last junction index usable as a stretch floor
    for N in range(m + 1):
        RN = radii[N]
        ceil_n = min(radii[N + 1] - 1, r_star)
        if ceil_n - (RN + 1) >= 7 * L0 + 1:
            menu.append(("ray", N))
        leg_hi = ceil_n - RN
        if leg_hi >= 3 * L0 and 2 * leg_hi >= 7 * L0 + 1 and N >= 1:
            menu.append(("lca", N))
        if N >= 1:
            c_hi = radii[N] - radii[N - 1] - 1
            if c_hi >= 3 * L0 and leg_hi >= L0 and c_hi + leg_hi >= 7 * L0 + 1:
                menu.append(("onej", N))
            if N + 2 <= len(radii) - 1 and radii[N + 1] <= r_star:
                gap = radii[N + 1] - radii[N]
                e_hi = min(radii[N + 2] - 1, r_star) - radii[N + 1]
                if gap >= 8 * L0 + 1 and c_hi >= 3 * L0 and e_hi >= L0:
                    menu.append(("twoj", N))
    return menu


def random_instance(
    rng: np.random.Generator,
    budget: int = 200_000,
    max_radius: int = 2048,
) -> tuple[TreeBall, int, int, int]:
    """Draw (ball, x1, v, L0) satisfying every segment_path precondition.

    k is uniform on {2,3,4} and gamma uniform on [1.3, 3], redrawn when the
    combination cannot host any admissible path inside the vertex budget
    (small gamma with large k needs deep shells whose width blows past any
    reasonable budget).  L0 is then uniform over the feasible part of
    [5, 12].  Instances additionally keep the nearest junction >= 3 L0
    past x1 and every junction >= L0 short of v, the regime in which the
    four verified properties provably hold.
    """
    for _ in range(256):
        k = int(rng.integers(2, 5))
        gamma = round(float(rng.uniform(1.3, 3.0)), 2)
        r_star = _max_radius_within(k, gamma, budget, max_radius)
        params = TreeParams(k, gamma, 0)
        radii = junction_radii_upto(params, r_star)
        radii.append(shell_radius(params, len(radii)))
        menus = {}
        for L0 in range(MIN_L0, 13):
            menu = _pattern_menu(radii, r_star, L0)
            if menu:
                menus[L0] = menu
        if menus:
            break
    else:
        raise RuntimeError("no feasible geometry found in 256 draws")

    L0 = int(rng.choice(list(menus)))
    kind, N = menus[L0][int(rng.integers(len(menus[L0])))]
    RN = radii[N]
    ceil_n = min(radii[N + 1] - 1, r_star)

    if kind == "twoj":
        r_canon = min(radii[N + 2] - 1, r_star)
        c_hi = radii[N] - radii[N - 1] - 1
        e_hi = r_canon - radii[N + 1]
        c = int(rng.integers(3 * L0, c_hi + 1))
        e = int(rng.integers(L0, e_hi + 1))
        lo_depth, hi_depth = RN - c, radii[N + 1] + e
    else:
        r_canon = ceil_n
        if kind == "ray":
            span = ceil_n - (RN + 1)
            dlen = int(rng.integers(7 * L0 + 1, span + 1))
            p = int(rng.integers(RN + 1, ceil_n - dlen + 1))
            lo_depth, hi_depth = p, p + dlen
        elif kind == "onej":
            c_hi = radii[N] - radii[N - 1] - 1
            e_hi = ceil_n - RN
            c_lo = max(3 * L0, 7 * L0 + 1 - e_hi)
            c = int(rng.integers(c_lo, c_hi + 1))
            e = int(rng.integers(max(L0, 7 * L0 + 1 - c), e_hi + 1))
            lo_depth, hi_depth = RN - c, RN + e
        else:  # lca
            leg_hi = ceil_n - RN
            a_lo = max(3 * L0, 7 * L0 + 1 - leg_hi)
            a = int(rng.integers(a_lo, leg_hi + 1))
            b = int(rng.integers(max(L0, 7 * L0 + 1 - a), leg_hi + 1))
            ball = _cached_ball(k, gamma, r_canon)
            ray = leftmost_ray(ball, 0, RN + a)
            junction = int(ray[RN])
            x1 = int(ray[RN + a])
            sibling = int(ball.children(junction)[1])
            leg = leftmost_ray(ball, sibling, b - 1)
            return ball, x1, int(leg[b - 1]), L0

    ball = _cached_ball(k, gamma, r_canon)
    ray = leftmost_ray(ball, 0, hi_depth)
    return ball, int(ray[lo_depth]), int(ray[hi_depth]), L0
