"""Exhaustive shortest-path oracle for small 8-neighbor grids.

Enumerates every simple path between two vertices and takes the float
minimum of the per-path costs, accumulating each path's cost in the same
left-to-right order the graph search uses, so agreement can be asserted
bit-for-bit.
"""

import math

import numpy as np

OFFSETS = (
    (-1, -1, math.sqrt(2.0)),
    (-1, 0, 1.0),
    (-1, 1, math.sqrt(2.0)),
    (0, -1, 1.0),
    (0, 1, 1.0),
    (1, -1, math.sqrt(2.0)),
    (1, 0, 1.0),
    (1, 1, math.sqrt(2.0)),
)


def enumerate_simple_paths(shape, src, dst):
    """All simple 8-neighbor paths src -> dst as lists of (i, j) vertices."""
    nr, nc = shape
    paths = []
    stack = [(src, [src], {src})]
    while stack:
        v, path, seen = stack.pop()
        if v == dst:
            paths.append(path)
            continue
        for di, dj, _ in OFFSETS:
            u = (v[0] + di, v[1] + dj)
            if 0 <= u[0] < nr and 0 <= u[1] < nc and u not in seen:
                stack.append((u, path + [u], seen | {u}))
    return paths


def compile_paths(shape, paths):
    """Group paths by step count into index arrays for vectorized costing.

    Returns a list of (u_idx, v_idx, ell) triples, one per path length,
    where u_idx/v_idx have shape (n_paths, n_steps) in flat vertex indices.
    """
    _, nc = shape
    by_len = {}
    for p in paths:
        by_len.setdefault(len(p) - 1, []).append(p)
    ell_of = {(di, dj): ell for di, dj, ell in OFFSETS}
    groups = []
    for nsteps, group in sorted(by_len.items()):
        u_idx = np.empty((len(group), nsteps), dtype=np.int64)
        v_idx = np.empty((len(group), nsteps), dtype=np.int64)
        ell = np.empty((len(group), nsteps))
        for a, p in enumerate(group):
            for b in range(nsteps):
                u, v = p[b], p[b + 1]
                u_idx[a, b] = u[0] * nc + u[1]
                v_idx[a, b] = v[0] * nc + v[1]
                ell[a, b] = ell_of[(v[0] - u[0], v[1] - u[1])]
        groups.append((u_idx, v_idx, ell))
    return groups


def min_path_cost(weights, spacing, convention, src, groups):
    """Float minimum over all enumerated paths, fold-left per path.

    Vertex-sum paths accumulate the weight of every vertex entered, with
    the source's own weight added last (matching a search that starts its
    tentative distance at zero and charges the source separately).
    """
    w = np.asarray(weights, dtype=np.float64).ravel()
    best = math.inf
    for u_idx, v_idx, ell in groups:
        cost = np.zeros(u_idx.shape[0])
        for b in range(u_idx.shape[1]):
            if convention == "vertex-sum":
                cost = cost + w[v_idx[:, b]]
            else:
                cost = cost + ell[:, b] * spacing * np.sqrt(w[u_idx[:, b]] * w[v_idx[:, b]])
        best = min(best, float(cost.min()))
    if convention == "vertex-sum":
        best = float(weights[src]) + best
    return best
