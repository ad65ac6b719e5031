"""Resolvent entries of tree Hamiltonians.

The solver eliminates leaves first, which is fill-in free on a forest, so
one resolvent column costs O(n).  A dense LU route (dense_oracle) exists
for cross-checking at small sizes, and check_resolvent_identity evaluates
the two-hop expansion of a Green entry through the edge boundaries of a
path region and its 2-fattening, returning the residual against the
directly computed entry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .hamiltonian import HamiltonianMatrix, hopping_difference, restrict_dirichlet
from .tree import Region, expand, path, theta

__all__ = [
    "ETA_FLOOR",
    "SpectralPoint",
    "resolvent_column",
    "green_entry",
    "dense_oracle",
    "check_resolvent_identity",
]

# Smaller imaginary parts make the linear systems too ill-conditioned for
# the advertised tolerances, so they are refused outright.
ETA_FLOOR = 1e-8

_DENSE_ORACLE_CAP = 2000


@dataclass(frozen=True)
class SpectralPoint:
    """z = energy + i eta with eta > 0."""

    energy: float
    eta: float

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"eta must be > 0, got {self.eta}")
        if self.eta < ETA_FLOOR:
            raise ValueError(
                f"eta = {self.eta} is below the floor {ETA_FLOOR}; resolvents this "
                f"close to the real axis are not supported"
            )

    @property
    def z(self) -> complex:
        return complex(self.energy, self.eta)


def resolvent_column(h: HamiltonianMatrix, y: int, z: SpectralPoint) -> np.ndarray:
    """The column G(., y; z) of (H - z)^{-1}, in O(n).

    Works on any restriction of H: bonds switched off simply decouple, and
    components not containing y come out exactly zero.
    """
    if not 0 <= y < h.n:
        raise ValueError(f"vertex {y} outside ball of {h.n} vertices")
    dz = h.diag - z.z
    rhs = np.zeros(h.n, dtype=np.complex128)
    rhs[y] = 1.0
    active = h.bond_active.astype(np.float64)
    return _kernels.tree_solve(h.ball.parent, h.ball.shell_start, active, dz, rhs)


def green_entry(h: HamiltonianMatrix, x: int, y: int, z: SpectralPoint) -> complex:
    """G(x, y; z) via one solve."""
    if not 0 <= x < h.n:
        raise ValueError(f"vertex {x} outside ball of {h.n} vertices")
    return complex(resolvent_column(h, y, z)[x])


def dense_oracle(h: HamiltonianMatrix, z: SpectralPoint) -> np.ndarray:
    """Full (H - z)^{-1} by dense LU; guarded to small sizes."""
    if h.n > _DENSE_ORACLE_CAP:
        raise ValueError(
            f"dense_oracle is limited to {_DENSE_ORACLE_CAP} vertices (n = {h.n})"
        )
    a = h.to_dense().astype(np.complex128)
    np.fill_diagonal(a, np.diagonal(a) - z.z)
    return np.linalg.inv(a)


def check_resolvent_identity(
    h: HamiltonianMatrix, x: int, y: int, w: int, z: SpectralPoint
) -> float:
    """Residual of the two-hop resolvent expansion for G(x, w; z).

    With L the path region from x to y and L2 its 2-fattening, the entry
    G(x, w) equals the double sum over boundary bonds (u, u') of L and
    (v, v') of L2 of

        G_L(x, u) * G(u', v) * G_L2(v', w),

    all bond weights being 1.  Preconditions: y must lie on the path from
    x to w, and w must lie outside L2; violations raise ValueError naming
    the failed condition.
    """
    for name, vert in (("x", x), ("y", y), ("w", w)):
        if not 0 <= vert < h.n:
            raise ValueError(f"{name} = {vert} outside ball of {h.n} vertices")
    ball = h.ball
    walk = path(ball, x, w)
    if y not in set(int(i) for i in walk.ids):
        raise ValueError(f"precondition failed: y = {y} is not on the path from x = {x} to w = {w}")
    region = path(ball, x, y).as_region()
    fat = expand(ball, region, 2)
    if w in fat:
        raise ValueError(
            f"precondition failed: w = {w} lies inside the 2-fattening of the path from x to y"
        )

    t1 = hopping_difference(h, region)
    t2 = hopping_difference(h, fat)
    # keep the orientation (inside, outside) of each boundary bond
    m1 = region.mask(h.n)
    b1 = [(int(r), int(c)) for r, c in zip(t1.row, t1.col) if m1[r]]
    m2 = fat.mask(h.n)
    b2 = [(int(r), int(c)) for r, c in zip(t2.row, t2.col) if m2[r]]

    lhs = complex(resolvent_column(h, w, z)[x])
    if not b1 or not b2:
        return abs(lhs - 0.0)

    g_l = resolvent_column(restrict_dirichlet(h, region), x, z)
    g_l2 = resolvent_column(restrict_dirichlet(h, fat), w, z)
    mid_cols = {}
    for v, _vp in b2:
        if v not in mid_cols:
            mid_cols[v] = resolvent_column(h, v, z)
    rhs = 0.0 + 0.0j
    for u, up in b1:
        gxu = g_l[u]
        for v, vp in b2:
            rhs += gxu * mid_cols[v][up] * g_l2[vp]
    return abs(lhs - rhs)
