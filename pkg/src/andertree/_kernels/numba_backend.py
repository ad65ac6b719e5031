"""numba @njit kernel lane.

Same contracts as numpy_backend; the loops visit vertices in the same
shell-by-shell, ascending-id order so the two lanes perform the same
floating-point operations up to complex-division rounding.
"""

from __future__ import annotations

import numpy as np
from numba import njit

NAME = "numba"


@njit(cache=True, nogil=True)
def tree_solve(parent, shell_start, active, dz, rhs):
    n = dz.shape[0]
    a = dz.copy()
    b = rhs.copy()
    nshell = shell_start.shape[0] - 1
    for d in range(nshell - 1, 0, -1):
        for x in range(shell_start[d], shell_start[d + 1]):
            if active[x] != 0.0:
                t = 1.0 / a[x]
                p = parent[x]
                a[p] -= t
                b[p] -= t * b[x]
    u = np.empty(n, dtype=np.complex128)
    u[0] = b[0] / a[0]
    for d in range(1, nshell):
        for x in range(shell_start[d], shell_start[d + 1]):
            if active[x] != 0.0:
                u[x] = (b[x] - u[parent[x]]) / a[x]
            else:
                u[x] = b[x] / a[x]
    return u


@njit(cache=True, nogil=True)
def bfs_distances(parent, child_start, child_count, src):
    n = parent.shape[0]
    dist = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    dist[src] = 0
    queue[0] = src
    head = 0
    tail = 1
    while head < tail:
        x = queue[head]
        head += 1
        dx = dist[x]
        p = parent[x]
        if p >= 0 and dist[p] < 0:
            dist[p] = dx + 1
            queue[tail] = p
            tail += 1
        s = child_start[x]
        for c in range(s, s + child_count[x]):
            if dist[c] < 0:
                dist[c] = dx + 1
                queue[tail] = c
                tail += 1
    return dist


@njit(cache=True, nogil=True)
def segment_corner_pows(dz, s):
    m, ncols = dz.shape
    out = np.empty((m, ncols - 1), dtype=np.float64)
    for i in range(m):
        pm1 = 1.0 + 0.0j
        p = dz[i, 0]
        for j in range(1, ncols):
            pnew = dz[i, j] * p - pm1
            pm1 = p
            p = pnew
            out[i, j - 1] = np.abs(p) ** (-s)
    return out
