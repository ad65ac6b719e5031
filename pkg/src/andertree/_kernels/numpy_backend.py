"""Pure-numpy kernel lane.

BFS ids make every depth shell a contiguous id range, so the sequential
leaf-elimination sweep vectorizes shell by shell: all vertices of the
deepest shell fold into their parents at once (np.subtract.at keeps the
scatter deterministic and in id order), then the next shell, and so on.
"""

from __future__ import annotations

from collections import deque

import numpy as np

NAME = "numpy"


def tree_solve(parent, shell_start, active, dz, rhs):
    """Solve (D + A - z) u = rhs on a forest aligned with the tree arrays.

    parent/shell_start describe the ambient tree; active[x] in {0.0, 1.0}
    switches the bond (parent[x], x) on or off; dz holds diagonal - z.
    Cost is linear in the vertex count.
    """
    a = dz.copy()
    b = rhs.astype(np.complex128, copy=True)
    nshell = shell_start.shape[0] - 1
    # upward elimination, deepest shell first
    for d in range(nshell - 1, 0, -1):
        s, e = shell_start[d], shell_start[d + 1]
        if s == e:
            continue
        t = active[s:e] / a[s:e]
        par = parent[s:e]
        np.subtract.at(a, par, t)
        np.subtract.at(b, par, t * b[s:e])
    u = np.empty_like(a)
    u[0] = b[0] / a[0]
    # downward substitution
    for d in range(1, nshell):
        s, e = shell_start[d], shell_start[d + 1]
        if s == e:
            continue
        u[s:e] = (b[s:e] - active[s:e] * u[parent[s:e]]) / a[s:e]
    return u


def bfs_distances(parent, child_start, child_count, src):
    n = parent.shape[0]
    dist = np.full(n, -1, dtype=np.int64)
    dist[src] = 0
    q = deque([src])
    while q:
        x = q.popleft()
        dx = dist[x]
        p = parent[x]
        if p >= 0 and dist[p] < 0:
            dist[p] = dx + 1
            q.append(p)
        s = child_start[x]
        for c in range(s, s + child_count[x]):
            if dist[c] < 0:
                dist[c] = dx + 1
                q.append(c)
    return dist


def segment_corner_pows(dz, s):
    """abs of the corner resolvent entry of growing segments, to the power -s.

    dz has one row per realization and one column per segment vertex; the
    entry (m, n-1) of the result is |G_{[0..n]}(0, n)|**s for row m, via the
    three-term determinant recursion p_n = dz_n p_{n-1} - p_{n-2} and
    |G(0, n)| = 1 / |p_n|.  Vectorized across realizations.
    """
    m, ncols = dz.shape
    out = np.empty((m, ncols - 1), dtype=np.float64)
    pm1 = np.ones(m, dtype=np.complex128)
    p = dz[:, 0].copy()
    for j in range(1, ncols):
        pnew = dz[:, j] * p - pm1
        pm1 = p
        p = pnew
        out[:, j - 1] = np.abs(p) ** (-s)
    return out
