"""Random Hamiltonians H = Delta + lambda V on tree balls, and their
restrictions.

Two Laplacian conventions are supported.  The adjacency kind has matrix
elements 1 between neighbors and an empty diagonal; the graph kind adds
-deg(x) on the diagonal, where deg is the degree of x in the *infinite*
graph, not in the finite ball, so truncating at the ball surface changes
no diagonal entry.

Restrictions never touch the diagonal: restrict_dirichlet deletes exactly
the bonds crossing the region boundary (the operator becomes block
diagonal between the region and its complement), restrict_outside keeps
only bonds with both endpoints inside the region.  hopping_difference is
the off-diagonal remainder H - H_dirichlet, supported exactly on the
crossing bonds that are present in H.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .tree import Region, TreeBall

__all__ = [
    "LaplacianKind",
    "DisorderSpec",
    "HamiltonianMatrix",
    "GEOMETRY_STREAM",
    "sample_potential",
    "assemble",
    "restrict_dirichlet",
    "restrict_outside",
    "hopping_difference",
]

_DISTRIBUTIONS = ("uniform", "gaussian", "cauchy")

# Philox key word reserved for geometry draws (regions, probe pairs);
# realization substreams use key words 0 .. 2**63 - 1.
GEOMETRY_STREAM = 2**64 - 1

_DENSE_CAP = 8192


class LaplacianKind(str, enum.Enum):
    ADJACENCY = "adjacency"
    GRAPH = "graph"


@dataclass(frozen=True)
class DisorderSpec:
    """Distribution of the site potential V, the coupling, and the RNG seed.

    distribution is one of "uniform" (params = (a, b)), "gaussian"
    (params = (mean, sd)) or "cauchy" (params = (location, scale)).
    Heavier tails than cauchy are not offered; two-point (bernoulli)
    disorder is rejected because it has no bounded density, and
    localization for it on these trees is an open problem.
    """

    distribution: str
    params: tuple
    lam: float
    master_seed: int

    def __post_init__(self):
        if self.distribution == "bernoulli":
            raise ValueError(
                "bernoulli disorder is not supported: it has no bounded density, "
                "and localization for two-point disorder on these trees is open; "
                "use uniform, gaussian, or cauchy"
            )
        if self.distribution not in _DISTRIBUTIONS:
            raise ValueError(
                f"unknown distribution {self.distribution!r}; "
                f"choose from {', '.join(_DISTRIBUTIONS)}"
            )
        if len(self.params) != 2:
            raise ValueError(f"{self.distribution} takes 2 parameters, got {self.params!r}")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        a, b = self.params
        if self.distribution == "uniform" and not b > a:
            raise ValueError(f"uniform needs b > a, got ({a}, {b})")
        if self.distribution in ("gaussian", "cauchy") and not b > 0:
            raise ValueError(f"{self.distribution} needs a positive scale, got {b}")
        if not self.lam > 0:
            raise ValueError(f"lambda must be > 0, got {self.lam}")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError("master_seed must fit in 64 bits")


def _substream(seed: int, index: int) -> np.random.Generator:
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_potential(spec: DisorderSpec, ball: TreeBall, realization_index: int) -> np.ndarray:
    """One V realization on the ball, from a counter-based substream.

    The output is fully determined by (master_seed, realization_index,
    vertex id): each realization owns a Philox stream keyed by the pair
    (seed, index) and draws the whole vector in id order, so results do
    not depend on evaluation order or on how realizations are distributed
    over workers.
    """
    if realization_index < 0 or realization_index >= 2**63:
        raise ValueError(f"realization_index out of range: {realization_index}")
    g = _substream(int(spec.master_seed), int(realization_index))
    n = ball.n
    a, b = spec.params
    if spec.distribution == "uniform":
        return a + (b - a) * g.random(n)
    if spec.distribution == "gaussian":
        return a + b * g.standard_normal(n)
    return a + b * g.standard_cauchy(n)


@dataclass(frozen=True)
class HamiltonianMatrix:
    """H restricted to a ball: diagonal vector plus a bond-activity mask.

    Off-diagonal support is a subset of the tree edges and every present
    entry equals 1, so the bond (parent[x], x) is stored as the single
    flag bond_active[x] (index 0 unused).  diag already contains
    lambda * V plus, for the graph kind, -full_degree.
    """

    ball: TreeBall
    kind: LaplacianKind
    diag: np.ndarray
    potential: np.ndarray
    bond_active: np.ndarray

    @property
    def n(self) -> int:
        return self.ball.n

    def active_bonds(self) -> list[tuple[int, int]]:
        """Present bonds as sorted (parent, child) pairs."""
        ids = np.nonzero(self.bond_active)[0]
        return [(int(self.ball.parent[c]), int(c)) for c in ids]

    def to_dense(self) -> np.ndarray:
        if self.n > _DENSE_CAP:
            raise ValueError(f"dense form refused above {_DENSE_CAP} vertices (n = {self.n})")
        h = np.zeros((self.n, self.n), dtype=np.float64)
        np.fill_diagonal(h, self.diag)
        ids = np.nonzero(self.bond_active)[0]
        par = self.ball.parent[ids]
        h[par, ids] = 1.0
        h[ids, par] = 1.0
        return h

    def to_sparse(self) -> sp.csr_matrix:
        ids = np.nonzero(self.bond_active)[0]
        par = self.ball.parent[ids]
        rows = np.concatenate([np.arange(self.n), par, ids])
        cols = np.concatenate([np.arange(self.n), ids, par])
        data = np.concatenate([self.diag, np.ones(2 * ids.shape[0])])
        return sp.coo_matrix((data, (rows, cols)), shape=(self.n, self.n)).tocsr()


def assemble(
    ball: TreeBall, kind: LaplacianKind, potential: np.ndarray, lam: float
) -> HamiltonianMatrix:
    """Build H = Delta + lam * V on the ball, all tree bonds active."""
    kind = LaplacianKind(kind)
    v = np.asarray(potential, dtype=np.float64)
    if v.shape != (ball.n,):
        raise ValueError(f"potential has shape {v.shape}, ball needs ({ball.n},)")
    if not lam > 0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    pot = lam * v
    diag = pot.copy()
    if kind is LaplacianKind.GRAPH:
        diag -= ball.full_degree
    active = np.ones(ball.n, dtype=bool)
    active[0] = False
    for arr in (diag, pot, active):
        arr.flags.writeable = False
    return HamiltonianMatrix(ball, kind, diag, pot, active)


def _crossing_bonds(h: HamiltonianMatrix, omega: Region) -> np.ndarray:
    m = omega.mask(h.n)
    cross = np.zeros(h.n, dtype=bool)
    c = np.arange(1, h.n)
    cross[c] = m[h.ball.parent[c]] != m[c]
    return cross


def restrict_dirichlet(h: HamiltonianMatrix, omega: Region) -> HamiltonianMatrix:
    """Delete the bonds crossing the region boundary; diagonal untouched."""
    active = h.bond_active & ~_crossing_bonds(h, omega)
    active.flags.writeable = False
    return HamiltonianMatrix(h.ball, h.kind, h.diag, h.potential, active)


def restrict_outside(h: HamiltonianMatrix, omega: Region) -> HamiltonianMatrix:
    """Keep only bonds with both endpoints inside the region."""
    m = omega.mask(h.n)
    keep = np.zeros(h.n, dtype=bool)
    c = np.arange(1, h.n)
    keep[c] = m[h.ball.parent[c]] & m[c]
    active = h.bond_active & keep
    active.flags.writeable = False
    return HamiltonianMatrix(h.ball, h.kind, h.diag, h.potential, active)


def hopping_difference(h: HamiltonianMatrix, omega: Region) -> sp.coo_matrix:
    """The bond matrix T with H = restrict_dirichlet(H, omega) + T.

    Purely off-diagonal, entries 1, supported exactly on the crossing
    bonds present in H (both orientations).
    """
    ids = np.nonzero(h.bond_active & _crossing_bonds(h, omega))[0]
    par = h.ball.parent[ids]
    rows = np.concatenate([par, ids])
    cols = np.concatenate([ids, par])
    data = np.ones(rows.shape[0], dtype=np.float64)
    return sp.coo_matrix((data, (rows, cols)), shape=(h.n, h.n))
