"""Hamiltonian assembly, disorder sampling, and restrictions."""

import numpy as np
import pytest

from andertree.hamiltonian import (
    GEOMETRY_STREAM,
    DisorderSpec,
    LaplacianKind,
    assemble,
    hopping_difference,
    restrict_dirichlet,
    restrict_outside,
    sample_potential,
)
from andertree.tree import Region, TreeParams, build_ball, build_segment


@pytest.fixture(scope="module")
def ball():
    return build_ball(TreeParams(2, 2.0, 6))


def spec(seed=1, dist="uniform", params=(-0.5, 0.5), lam=2.0):
    return DisorderSpec(dist, params, lam, seed)


def test_disorder_validation():
    with pytest.raises(ValueError, match="bounded density"):
        DisorderSpec("bernoulli", (0.0, 1.0), 1.0, 1)
    with pytest.raises(ValueError, match="unknown distribution"):
        DisorderSpec("levy", (0.0, 1.0), 1.0, 1)
    with pytest.raises(ValueError, match="takes 2 parameters"):
        DisorderSpec("uniform", (0.0, 1.0, 2.0), 1.0, 1)
    with pytest.raises(ValueError, match="b > a"):
        DisorderSpec("uniform", (0.5, 0.5), 1.0, 1)
    with pytest.raises(ValueError, match="positive scale"):
        DisorderSpec("gaussian", (0.0, 0.0), 1.0, 1)
    with pytest.raises(ValueError, match="lambda"):
        DisorderSpec("uniform", (-0.5, 0.5), 0.0, 1)
    with pytest.raises(ValueError, match="64 bits"):
        DisorderSpec("uniform", (-0.5, 0.5), 1.0, 2**64)


def test_potential_determinism(ball):
    a = sample_potential(spec(7), ball, 3)
    b = sample_potential(spec(7), ball, 3)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample_potential(spec(7), ball, 4))
    assert not np.array_equal(a, sample_potential(spec(8), ball, 3))


def test_potential_distributions(ball):
    u = sample_potential(spec(1), ball, 0)
    assert u.shape == (ball.n,)
    assert np.all((-0.5 <= u) & (u < 0.5))
    g = sample_potential(spec(1, "gaussian", (2.0, 0.001)), ball, 0)
    assert abs(g.mean() - 2.0) < 0.01
    c = sample_potential(spec(1, "cauchy", (0.0, 1.0)), ball, 0)
    assert np.all(np.isfinite(c))


def test_realization_index_range(ball):
    with pytest.raises(ValueError, match="realization_index"):
        sample_potential(spec(), ball, -1)
    with pytest.raises(ValueError, match="realization_index"):
        sample_potential(spec(), ball, 2**63)
    assert GEOMETRY_STREAM == 2**64 - 1  # reserved, never a valid realization


def test_assemble_adjacency(ball):
    v = sample_potential(spec(3), ball, 0)
    h = assemble(ball, LaplacianKind.ADJACENCY, v, 2.0)
    dense = h.to_dense()
    assert np.array_equal(dense, dense.T)
    assert np.allclose(np.diagonal(dense), 2.0 * v)
    off = dense.copy()
    np.fill_diagonal(off, 0.0)
    assert set(np.unique(off)) == {0.0, 1.0}
    assert np.count_nonzero(off) == 2 * (ball.n - 1)
    for x in range(1, ball.n):
        assert dense[x, ball.parent[x]] == 1.0


def test_assemble_graph_diagonal(ball):
    v = sample_potential(spec(3), ball, 0)
    ha = assemble(ball, LaplacianKind.ADJACENCY, v, 2.0)
    hg = assemble(ball, "graph", v, 2.0)  # string form accepted
    assert np.allclose(hg.diag, ha.diag - ball.full_degree)
    # surface vertices keep the infinite-graph degree, not the ball degree:
    # depth 6 is a junction shell, so its vertices count k+1 = 3 despite
    # having only the parent bond inside the ball
    leaf = ball.n - 1
    assert hg.diag[leaf] == pytest.approx(2.0 * v[leaf] - 3.0)


def test_assemble_errors(ball):
    v = np.zeros(ball.n - 1)
    with pytest.raises(ValueError, match="potential has shape"):
        assemble(ball, LaplacianKind.ADJACENCY, v, 1.0)
    with pytest.raises(ValueError, match="lambda"):
        assemble(ball, LaplacianKind.ADJACENCY, np.zeros(ball.n), 0.0)


def test_dense_cap():
    big = build_ball(TreeParams(2, 1.0, 13))  # 16383 vertices
    h = assemble(big, LaplacianKind.ADJACENCY, np.zeros(big.n), 1.0)
    with pytest.raises(ValueError, match="dense form refused"):
        h.to_dense()


def test_sparse_matches_dense(ball):
    h = assemble(ball, LaplacianKind.GRAPH, sample_potential(spec(5), ball, 1), 2.0)
    assert np.array_equal(h.to_sparse().toarray(), h.to_dense())


def test_restrict_dirichlet_blocks(ball):
    v = sample_potential(spec(9), ball, 0)
    h = assemble(ball, LaplacianKind.GRAPH, v, 2.0)
    omega = Region.from_ids(range(7))
    hd = restrict_dirichlet(h, omega)
    m = omega.mask(ball.n)
    dense = hd.to_dense()
    assert np.all(dense[np.ix_(m, ~m)] == 0.0)
    assert np.array_equal(np.diagonal(dense), h.diag)  # diagonal untouched
    # bonds strictly inside either side survive
    full = h.to_dense()
    assert np.array_equal(dense[np.ix_(m, m)], full[np.ix_(m, m)])
    assert np.array_equal(dense[np.ix_(~m, ~m)], full[np.ix_(~m, ~m)])


def test_restrict_outside_keeps_internal_only(ball):
    v = sample_potential(spec(9), ball, 0)
    h = assemble(ball, LaplacianKind.ADJACENCY, v, 2.0)
    omega = Region.from_ids(range(7))
    ho = restrict_outside(h, omega)
    m = omega.mask(ball.n)
    dense = ho.to_dense()
    offd = dense.copy()
    np.fill_diagonal(offd, 0.0)
    assert np.all(offd[np.ix_(~m, ~m)] == 0.0)
    assert np.all(offd[np.ix_(m, ~m)] == 0.0)
    inside = h.to_dense()[np.ix_(m, m)]
    assert np.array_equal(dense[np.ix_(m, m)], inside)


def test_hopping_difference_reconstructs(ball):
    v = sample_potential(spec(11), ball, 2)
    h = assemble(ball, LaplacianKind.GRAPH, v, 3.0)
    omega = Region.from_ids([0, 1, 3, 5])
    t = hopping_difference(h, omega).toarray()
    assert np.array_equal(t, t.T)
    assert np.array_equal(h.to_dense(), restrict_dirichlet(h, omega).to_dense() + t)
    assert set(np.unique(t)) <= {0.0, 1.0}
    # restricting twice changes nothing more
    hd = restrict_dirichlet(h, omega)
    assert np.array_equal(
        restrict_dirichlet(hd, omega).to_dense(), hd.to_dense()
    )
    # and the difference of an already-restricted operator is empty
    assert hopping_difference(hd, omega).nnz == 0


def test_active_bonds_listing():
    seg = build_segment(4)
    h = assemble(seg, LaplacianKind.ADJACENCY, np.zeros(4), 1.0)
    assert h.active_bonds() == [(0, 1), (1, 2), (2, 3)]
    hd = restrict_dirichlet(h, Region.from_ids([0, 1]))
    assert hd.active_bonds() == [(0, 1), (2, 3)]
