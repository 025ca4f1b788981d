"""Weighted shortest-path metrics on the 8-neighbor lattice.

A ``MetricProblem`` freezes a mollified field, coupling parameters, a
weight convention and a domain mask into a graph:

* ``vertex-sum``: a path pays e^(xi*h(v)) at every vertex it visits,
  endpoints included (so the one-vertex path already costs one weight).
  Realized as a directed graph where the edge u->v carries the weight of
  v, plus the source weight charged once.

* ``edge-weighted``: a path pays |u-v| * e^(xi*(h(u)+h(v))/2) per edge,
  the trapezoid rule for the continuum weighted length.

All queries run exact Dijkstra (scipy's C implementation) on the masked
graph; no heuristics.  Geodesics are reconstructed by walking back from
the target, choosing at every step the lexicographically smallest
predecessor among those that reproduce the distance exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as cs_dijkstra

from .mollify import MollifiedField
from .params import LqgParams

VERTEX_SUM = "vertex-sum"
EDGE_WEIGHTED = "edge-weighted"
CONVENTIONS = (VERTEX_SUM, EDGE_WEIGHTED)

SQRT2 = math.sqrt(2.0)

# 8-neighbor offsets in lexicographic (di, dj) order; third entry is the
# Euclidean step length in units of the lattice spacing.
OFFSETS = (
    (-1, -1, SQRT2),
    (-1, 0, 1.0),
    (-1, 1, SQRT2),
    (0, -1, 1.0),
    (0, 1, 1.0),
    (1, -1, SQRT2),
    (1, 0, 1.0),
    (1, 1, SQRT2),
)


def build_lattice_graph(
    mask: np.ndarray, vertex_weight: np.ndarray, spacing: float, convention: str
) -> Tuple[csr_matrix, np.ndarray, Tuple[np.ndarray, np.ndarray]]:
    """Directed CSR graph of the masked 8-neighbor lattice.

    Vertex-sum edges u->v carry exp-weight of v (the source weight is
    charged separately, once per query); edge-weighted edges carry the
    Euclidean step length times the geometric mean of the endpoint weights.
    Returns (graph, vertex-id grid with -1 outside the mask, active index
    arrays).  Accepts any rectangular shape; grid validation lives upstream.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    mask = np.asarray(mask, dtype=bool)
    nr, nc = mask.shape
    w = np.asarray(vertex_weight, dtype=np.float64)
    ids = -np.ones((nr, nc), dtype=np.int64)
    act_i, act_j = np.nonzero(mask)
    ids[act_i, act_j] = np.arange(act_i.size)
    rows, cols, data = [], [], []
    for di, dj, ell in OFFSETS:
        i0s, i0e = max(0, -di), nr - max(0, di)
        j0s, j0e = max(0, -dj), nc - max(0, dj)
        src = mask[i0s:i0e, j0s:j0e]
        dst = mask[i0s + di : i0e + di, j0s + dj : j0e + dj]
        ii, jj = np.nonzero(src & dst)
        ii = ii + i0s
        jj = jj + j0s
        uid = ids[ii, jj]
        vid = ids[ii + di, jj + dj]
        if convention == VERTEX_SUM:
            wgt = w[ii + di, jj + dj]
        else:
            wgt = ell * spacing * np.sqrt(w[ii, jj] * w[ii + di, jj + dj])
        rows.append(uid)
        cols.append(vid)
        data.append(wgt)
    nv = act_i.size
    if rows:
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        data = np.concatenate(data)
    else:
        rows = np.zeros(0, dtype=np.int64)
        cols = np.zeros(0, dtype=np.int64)
        data = np.zeros(0)
    return csr_matrix((data, (rows, cols)), shape=(nv, nv)), ids, (act_i, act_j)


def lattice_distance(
    weights: np.ndarray,
    spacing: float,
    convention: str,
    src: Tuple[int, int],
    dst: Tuple[int, int],
) -> float:
    """Shortest-path distance on a fully-active rectangular weight grid.

    Thin wrapper over the same graph construction MetricProblem uses,
    callable on arbitrary (small) shapes — the reference entry point the
    exhaustive-enumeration equivalence tests exercise.
    """
    mask = np.ones(np.asarray(weights).shape, dtype=bool)
    graph, ids, _ = build_lattice_graph(mask, weights, spacing, convention)
    d = cs_dijkstra(graph, directed=True, indices=int(ids[src]))
    base = float(weights[src]) if convention == VERTEX_SUM else 0.0
    return base + float(d[int(ids[dst])])


@dataclass(frozen=True)
class PathResult:
    distance: float
    path: List[Tuple[int, int]]
    reached: bool


@dataclass(frozen=True)
class MetricBall:
    center: Tuple[int, int]
    radius: float
    membership: np.ndarray
    boundary: List[Tuple[int, int]]
    distances: np.ndarray


class MetricProblem:
    """Immutable weighted-lattice metric; queries allocate private state."""

    def __init__(
        self,
        field: MollifiedField,
        params: LqgParams,
        convention: str = EDGE_WEIGHTED,
        mask: Optional[np.ndarray] = None,
    ):
        if convention not in CONVENTIONS:
            raise ValueError(f"unknown convention {convention!r}")
        self.field = field
        self.params = params
        self.convention = convention
        n = field.spec.n
        if mask is None:
            mask = np.ones((n, n), dtype=bool)
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (n, n):
            raise ValueError("mask shape does not match the field grid")
        self.mask = mask.copy()
        self.mask.setflags(write=False)
        self.n = n
        self.spacing = field.spec.spacing
        w = np.exp(params.xi * field.values)
        if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
            raise ValueError("vertex weights must be positive and finite")
        self.vertex_weight = w
        self._graph = None
        self._ids = None
        self._active = None

    # -- graph construction -------------------------------------------------

    def _build(self):
        if self._graph is not None:
            return
        graph, ids, active = build_lattice_graph(
            self.mask, self.vertex_weight, self.spacing, self.convention
        )
        self._graph = graph
        self._ids = ids
        self._active = active

    @property
    def graph(self) -> csr_matrix:
        self._build()
        return self._graph

    @property
    def ids(self) -> np.ndarray:
        self._build()
        return self._ids

    def _vid(self, v: Tuple[int, int]) -> int:
        vid = int(self.ids[v[0], v[1]])
        if vid < 0:
            raise ValueError(f"vertex {v} is outside the mask")
        return vid

    def _grid_distances(self, flat: np.ndarray) -> np.ndarray:
        """Scatter per-active-vertex distances back onto the grid (inf outside)."""
        out = np.full((self.n, self.n), np.inf)
        ai, aj = self._active
        out[ai, aj] = flat
        return out

    # -- elementary costs ----------------------------------------------------

    def step_weight(self, u: Tuple[int, int], v: Tuple[int, int]) -> float:
        """Cost of traversing the edge u -> v (directed, per convention)."""
        di, dj = v[0] - u[0], v[1] - u[1]
        if max(abs(di), abs(dj)) != 1 or (di == 0 and dj == 0):
            raise ValueError("vertices are not 8-adjacent")
        if self.convention == VERTEX_SUM:
            return float(self.vertex_weight[v])
        ell = SQRT2 if (di != 0 and dj != 0) else 1.0
        return float(ell * self.spacing * math.sqrt(self.vertex_weight[u] * self.vertex_weight[v]))

    def path_cost(self, path: Sequence[Tuple[int, int]]) -> float:
        """Recompute a path's cost from the weights (the length-space check)."""
        if len(path) == 0:
            raise ValueError("empty path")
        if self.convention == VERTEX_SUM:
            total = float(self.vertex_weight[path[0]])
            for u, v in zip(path[:-1], path[1:]):
                total += self.step_weight(u, v)
            return total
        total = 0.0
        for u, v in zip(path[:-1], path[1:]):
            total += self.step_weight(u, v)
        return total

    # -- queries ---------------------------------------------------------------

    def distance(self, z: Tuple[int, int], w: Tuple[int, int]) -> PathResult:
        """Exact shortest-path distance with the realized geodesic."""
        zid = self._vid(z)
        wid = self._vid(w)
        d = cs_dijkstra(self.graph, directed=True, indices=zid)
        base = float(self.vertex_weight[z]) if self.convention == VERTEX_SUM else 0.0
        if not np.isfinite(d[wid]):
            return PathResult(distance=math.inf, path=[], reached=False)
        path = self._reconstruct(d, z, w)
        return PathResult(distance=base + float(d[wid]), path=path, reached=True)

    def _reconstruct(self, d: np.ndarray, z: Tuple[int, int], w: Tuple[int, int]) -> List[Tuple[int, int]]:
        """Walk back from w choosing the lexicographically smallest predecessor
        among neighbors u with d[u] + weight(u, v) == d[v] (exact float match)."""
        path = [w]
        v = w
        guard = self.n * self.n + 1
        while v != z and guard > 0:
            guard -= 1
            dv = d[self._vid(v)]
            best = None
            for di, dj, _ in OFFSETS:
                ui, uj = v[0] + di, v[1] + dj
                if not (0 <= ui < self.n and 0 <= uj < self.n) or not self.mask[ui, uj]:
                    continue
                u = (ui, uj)
                du = d[self._vid(u)]
                if np.isfinite(du) and du + self.step_weight(u, v) == dv:
                    if best is None or u < best:
                        best = u
            if best is None:
                raise RuntimeError("geodesic reconstruction failed")
            path.append(best)
            v = best
        path.reverse()
        return path

    def multi_source_distance(self, sources: Sequence[Tuple[int, int]]) -> np.ndarray:
        """Single-pass distances from a vertex set, as an (n, n) grid array.

        Vertex-sum charges each source's own weight once (virtual edges into
        the sources carry that weight); edge-weighted virtual edges are free.
        """
        if len(sources) == 0:
            raise ValueError("sources must be nonempty")
        self._build()
        nv = self._graph.shape[0]
        sid = np.array([self._vid(s) for s in sources], dtype=np.int64)
        if self.convention == VERTEX_SUM:
            wgt = np.array([self.vertex_weight[s] for s in sources])
        else:
            wgt = np.zeros(len(sources))
        coo = self._graph.tocoo()
        aug = csr_matrix(
            (
                np.concatenate([coo.data, wgt]),
                (np.concatenate([coo.row, np.full(sid.size, nv)]), np.concatenate([coo.col, sid])),
            ),
            shape=(nv + 1, nv + 1),
        )
        d = cs_dijkstra(aug, directed=True, indices=nv)
        return self._grid_distances(d[:nv])

    def internal_distance(
        self, z: Tuple[int, int], w: Tuple[int, int], submask: np.ndarray
    ) -> PathResult:
        """Shortest path constrained to submask (must be contained in mask)."""
        sub = np.asarray(submask, dtype=bool)
        if np.any(sub & ~self.mask):
            raise ValueError("submask is not contained in the problem mask")
        inner = MetricProblem(self.field, self.params, self.convention, mask=sub)
        return inner.distance(z, w)

    def restricted(self, submask: np.ndarray) -> "MetricProblem":
        sub = np.asarray(submask, dtype=bool)
        if np.any(sub & ~self.mask):
            raise ValueError("submask is not contained in the problem mask")
        return MetricProblem(self.field, self.params, self.convention, mask=sub)

    def crossing_distance(self, square: Tuple[float, float, float]) -> float:
        """Left-to-right crossing distance of a square, paths inside the square.

        ``square`` is (x0, y0, side) in physical units.  Sources are the
        leftmost column of the square's vertex set, targets the rightmost.
        """
        x0, y0, side = square
        if side <= 0:
            raise ValueError("degenerate square")
        sub, cols = self._square_mask(x0, y0, side)
        if not sub.any():
            raise ValueError("square contains no lattice vertices")
        inner = self.restricted(sub)
        imin, imax = cols
        left = [(imin, j) for j in range(self.n) if sub[imin, j]]
        right_mask = np.zeros_like(sub)
        right_mask[imax, :] = sub[imax, :]
        d = inner.multi_source_distance(left)
        val = float(np.min(d[right_mask]))
        return val

    def _square_mask(self, x0: float, y0: float, side: float):
        spec = self.field.spec
        xs = spec.origin[0] + self.spacing * np.arange(self.n)
        ys = spec.origin[1] + self.spacing * np.arange(self.n)
        tol = 1e-9 * self.spacing
        in_x = (xs >= x0 - tol) & (xs <= x0 + side + tol)
        in_y = (ys >= y0 - tol) & (ys <= y0 + side + tol)
        sub = (in_x[:, None] & in_y[None, :]) & self.mask
        cols = np.nonzero(sub.any(axis=1))[0]
        if cols.size == 0:
            raise ValueError("square misses the mask")
        return sub, (int(cols[0]), int(cols[-1]))

    def metric_ball(self, center: Tuple[int, int], s: float) -> MetricBall:
        """All vertices within metric distance s of the center."""
        if s < 0:
            raise ValueError("radius must be >= 0")
        cid = self._vid(center)
        base = float(self.vertex_weight[center]) if self.convention == VERTEX_SUM else 0.0
        limit = s - base
        if limit < 0:
            member = np.zeros((self.n, self.n), dtype=bool)
            dist = np.full((self.n, self.n), np.inf)
            return MetricBall(center=center, radius=s, membership=member, boundary=[], distances=dist)
        d = cs_dijkstra(self.graph, directed=True, indices=cid, limit=limit)
        dist = self._grid_distances(d) + base
        member = dist <= s
        boundary = _boundary_vertices(member)
        return MetricBall(center=center, radius=s, membership=member, boundary=boundary, distances=dist)

    # -- annulus cycle -----------------------------------------------------------

    def distance_around_annulus(
        self, z: Tuple[float, float], r1: float, r2: float
    ) -> PathResult:
        """Minimal-cost lattice cycle in the annulus separating its boundaries.

        Cuts the annulus along the rightward horizontal ray from z,
        duplicates the cut vertices into an upper and a lower copy, and takes
        the cheapest shortest path joining the two copies of the same vertex.
        The returned path is the closed cycle (first vertex repeated last).
        """
        if not (0.0 < r1 < r2):
            raise ValueError("need 0 < r1 < r2")
        if (r2 - r1) / self.spacing < 3.0:
            raise ValueError("annulus too thin to contain a lattice cycle")
        spec = self.field.spec
        xx, yy = spec.mesh()
        rad = np.hypot(xx - z[0], yy - z[1])
        ann = (rad >= r1) & (rad <= r2) & self.mask
        if not ann.any():
            raise ValueError("annulus misses the mask")
        jc = int(round((z[1] - spec.origin[1]) / self.spacing))
        jc = min(max(jc, 0), self.n - 1)
        xs = spec.origin[0] + self.spacing * np.arange(self.n)
        cut = np.zeros_like(ann)
        cut[:, jc] = ann[:, jc] & (xs > z[0])
        cut_list = [(int(i), jc) for i in np.nonzero(cut[:, jc])[0]]
        if not cut_list:
            raise ValueError("cut ray misses the annulus")
        dist, cycle = _annulus_cycle(self, ann, cut, jc, cut_list)
        if cycle is None:
            return PathResult(distance=math.inf, path=[], reached=False)
        return PathResult(distance=dist, path=cycle, reached=True)


def _boundary_vertices(member: np.ndarray) -> List[Tuple[int, int]]:
    """Members with at least one non-member 8-neighbor (grid edge counts)."""
    n = member.shape[0]
    interior = np.ones_like(member)
    padded = np.pad(member, 1, mode="constant", constant_values=False)
    for di, dj, _ in OFFSETS:
        interior &= padded[1 + di : 1 + di + n, 1 + dj : 1 + dj + n]
    bnd = member & ~interior
    return [tuple(v) for v in np.argwhere(bnd)]


def _annulus_cycle(problem: MetricProblem, ann, cut, jc, cut_list):
    """Vertex-duplication reduction: shortest a+ -> a- path over cut vertices a."""
    n = problem.n
    ids = -np.ones((n, n), dtype=np.int64)
    ai, aj = np.nonzero(ann)
    ids[ai, aj] = np.arange(ai.size)
    nv = ai.size
    dup = -np.ones((n, n), dtype=np.int64)
    for k, (i, j) in enumerate(cut_list):
        dup[i, j] = nv + k
    total = nv + len(cut_list)

    def node(u, side):
        # side: +1 approaching from above the ray (larger y), -1 from below.
        if cut[u]:
            return int(ids[u]) if side > 0 else int(dup[u])
        return int(ids[u])

    rows, cols, data = [], [], []
    for i, j in zip(ai, aj):
        u = (int(i), int(j))
        for di, dj, _ in OFFSETS:
            vi, vj = u[0] + di, u[1] + dj
            if not (0 <= vi < n and 0 <= vj < n) or not ann[vi, vj]:
                continue
            v = (vi, vj)
            wgt = problem.step_weight(u, v)
            u_cut, v_cut = bool(cut[u]), bool(cut[v])
            pairs = []
            if not u_cut and not v_cut:
                pairs.append((node(u, 0), node(v, 0)))
            elif u_cut and v_cut:
                # travel along the cut on either copy
                pairs.append((node(u, +1), node(v, +1)))
                pairs.append((node(u, -1), node(v, -1)))
            elif u_cut:
                side = 1 if v[1] > jc else (-1 if v[1] < jc else 0)
                if side == 0:
                    pairs.append((node(u, +1), node(v, 0)))
                    pairs.append((node(u, -1), node(v, 0)))
                else:
                    pairs.append((node(u, side), node(v, 0)))
            else:  # v is cut
                side = 1 if u[1] > jc else (-1 if u[1] < jc else 0)
                if side == 0:
                    pairs.append((node(u, 0), node(v, +1)))
                    pairs.append((node(u, 0), node(v, -1)))
                else:
                    pairs.append((node(u, 0), node(v, side)))
            for a, b in pairs:
                rows.append(a)
                cols.append(b)
                data.append(wgt)
    g = csr_matrix((data, (rows, cols)), shape=(total, total))

    inv = {}
    for idx2, (ii, jj) in enumerate(zip(ai, aj)):
        inv[idx2] = (int(ii), int(jj))
    for kk, (ii, jj) in enumerate(cut_list):
        inv[nv + kk] = (ii, jj)

    best = math.inf
    best_path = None
    for k, (i, j) in enumerate(cut_list):
        src = int(ids[i, j])
        tgt = nv + k
        lim = best if math.isfinite(best) else np.inf
        d, pred = cs_dijkstra(g, directed=True, indices=src, return_predecessors=True, limit=lim)
        if not np.isfinite(d[tgt]):
            continue
        # directed edges charge their target vertex, so d[tgt] already sums
        # every distinct cycle vertex exactly once (vertex-sum) or every
        # cycle edge once (edge-weighted).
        cost = float(d[tgt])
        if cost < best:
            chain = []
            v = tgt
            while v >= 0 and v != src:
                chain.append(v)
                v = int(pred[v])
            if v != src:
                continue
            chain.append(src)
            chain.reverse()
            best = cost
            best_path = [inv[c] for c in chain]  # closed: first == last grid vertex
    if best_path is None:
        return math.inf, None
    return best, best_path


def cycle_separates(
    mask: np.ndarray,
    cycle: Sequence[Tuple[int, int]],
    inner: Sequence[Tuple[int, int]],
    outer: Sequence[Tuple[int, int]],
) -> bool:
    """4-connected flood fill from the inner set, avoiding cycle vertices,
    must not reach the outer set.  (An 8-connected vertex cycle blocks
    4-connected flood, the standard lattice duality.)"""
    n = mask.shape[0]
    blocked = np.zeros_like(mask)
    for v in cycle:
        blocked[v] = True
    visited = np.zeros_like(mask)
    stack = [v for v in inner if mask[v] and not blocked[v]]
    for v in stack:
        visited[v] = True
    while stack:
        i, j = stack.pop()
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            a, b = i + di, j + dj
            if 0 <= a < n and 0 <= b < n and mask[a, b] and not blocked[a, b] and not visited[a, b]:
                visited[a, b] = True
                stack.append((a, b))
    return not any(visited[v] for v in outer if 0 <= v[0] < n and 0 <= v[1] < n)


def geodesic_tube_area(
    spec_spacing: float,
    shape: Tuple[int, int],
    geodesic: Sequence[Tuple[int, int]],
    target: Sequence[Tuple[int, int]],
    eps_r: float,
) -> float:
    """Lattice area of {within eps_r of the geodesic} intersect {within eps_r
    of the target set}, in physical units (vertex count * spacing^2)."""
    if len(geodesic) == 0 or len(target) == 0:
        raise ValueError("geodesic and target must be nonempty")
    a = np.zeros(shape, dtype=bool)
    b = np.zeros(shape, dtype=bool)
    for v in geodesic:
        a[v] = True
    for v in target:
        b[v] = True
    da = ndimage.distance_transform_edt(~a, sampling=spec_spacing)
    db = ndimage.distance_transform_edt(~b, sampling=spec_spacing)
    both = (da <= eps_r) & (db <= eps_r)
    return float(np.count_nonzero(both)) * spec_spacing**2


def ring_vertices(problem: MetricProblem, z: Tuple[float, float], r: float) -> List[Tuple[int, int]]:
    """Lattice circle: masked vertices inside B_r(z) with an 8-neighbor outside."""
    spec = problem.field.spec
    xx, yy = spec.mesh()
    rad = np.hypot(xx - z[0], yy - z[1])
    inside = (rad <= r) & problem.mask
    n = problem.n
    padded = np.pad(rad <= r, 1, mode="constant", constant_values=False)
    has_out = np.zeros_like(inside)
    for di, dj, _ in OFFSETS:
        has_out |= ~padded[1 + di : 1 + di + n, 1 + dj : 1 + dj + n]
    ring = inside & has_out
    return [tuple(v) for v in np.argwhere(ring)]


def c_good_statistic(problem: MetricProblem, z: Tuple[float, float], r: float) -> float:
    """Ratio sup_{u,v on dB_r} D(u,v; A_{r/2,2r}) / D(dB_r, dB_2r).

    The sup over pairs is exact: one Dijkstra pass per boundary vertex of
    the inner circle, restricted to the annulus A_{r/2, 2r}(z).
    """
    spec = problem.field.spec
    if not spec.contains_disk(z, 2.0 * r):
        raise ValueError("B_2r(z) leaves the mask window")
    if r / problem.spacing < 4.0:
        raise ValueError("annulus under-resolved")
    ring_r = ring_vertices(problem, z, r)
    ring_2r = ring_vertices(problem, z, 2.0 * r)
    xx, yy = spec.mesh()
    rad = np.hypot(xx - z[0], yy - z[1])
    ann = (rad >= 0.5 * r) & (rad <= 2.0 * r) & problem.mask
    inner_prob = problem.restricted(ann)
    sup_pair = 0.0
    ring_mask = np.zeros_like(problem.mask)
    for v in ring_r:
        ring_mask[v] = True
    for u in ring_r:
        d = inner_prob.multi_source_distance([u])
        vals = d[ring_mask]
        vals = vals[np.isfinite(vals)]
        if vals.size:
            sup_pair = max(sup_pair, float(np.max(vals)))
    d_cross_grid = problem.multi_source_distance(ring_r)
    cross = min(float(d_cross_grid[v]) for v in ring_2r)
    if not (cross > 0.0 and math.isfinite(cross)):
        raise RuntimeError("degenerate annulus crossing distance")
    return sup_pair / cross
