"""Obstacle random graphs and quadric intersection graphs.

A graph on s projective points with an edge when the great circle through
two points misses the obstacle.  All s vertices are kept: a point inside
the obstacle is isolated automatically, because every line through it hits.
For quadrics the obstacle is the definite cone and the edge test is the
pencil criterion; the arrangement statistic b0(union of zero sets) is then
b0(graph) minus the number of definite (empty zero set) vertices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegeneratePair, InvalidInput
from .geometry import CapObstacle, cap_pairwise_hits
from .linalg import definite_batch
from .pencil import (
    CODE_BORDERLINE,
    CODE_NO_DEFINITE,
    pencil_outcomes_batch,
)

_PAIR_CHUNK = 200_000


@dataclass
class ObstacleGraph:
    """Immutable result of a graph build.

    adj holds bit-packed adjacency rows (np.packbits layout), one row per
    vertex; the relation is symmetric and the diagonal empty, so each
    unordered pair is represented once in the i < j sense.
    """

    s: int
    points: object
    in_obstacle: np.ndarray
    adj: np.ndarray
    meta: dict = field(default_factory=dict)

    def has_edge(self, i, j):
        if i == j:
            return False
        byte = self.adj[i, j >> 3]
        return bool((byte >> (7 - (j & 7))) & 1)

    def neighbors(self, i):
        row = np.unpackbits(self.adj[i], count=self.s)
        return np.nonzero(row)[0]

    def degrees(self):
        return np.bitwise_count(self.adj).sum(axis=1).astype(np.int64)

    def edge_count(self):
        return int(self.degrees().sum()) // 2


def _pack_adjacency(bool_adj):
    return np.packbits(bool_adj, axis=1)


def _finish_graph(s, points, in_obs, bool_adj, meta):
    np.fill_diagonal(bool_adj, False)
    graph = ObstacleGraph(s, points, in_obs, _pack_adjacency(bool_adj), meta)
    deg = graph.degrees()
    assert not np.any(deg[in_obs] > 0), "contained vertex acquired an edge"
    return graph


def build_obstacle_graph(obst, points):
    """Obstacle random graph on the given points: edge iff the line misses.

    Degenerate (anti)parallel point pairs raise DegeneratePair carrying the
    offending indices; callers resample the trial and count the event.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] < 1:
        raise InvalidInput("expected an (s, N+1) array of points")
    s = points.shape[0]
    if isinstance(obst, CapObstacle):
        hits, degenerate = cap_pairwise_hits(points, obst.center, obst.cos_rho)
        if np.any(degenerate):
            i, j = np.argwhere(degenerate)[0]
            raise DegeneratePair(
                f"points {i} and {j} are collinear", indices=(int(i), int(j))
            )
        bool_adj = ~hits
        in_obs = np.abs(points @ obst.center) >= obst.cos_rho
    else:
        bool_adj = np.zeros((s, s), dtype=bool)
        in_obs = np.fromiter(
            (obst.contains(p) for p in points), dtype=bool, count=s
        )
        for i in range(s):
            for j in range(i + 1, s):
                try:
                    hit = obst.hit_by_line(points[i], points[j])
                except DegeneratePair as exc:
                    raise DegeneratePair(
                        f"points {i} and {j} are collinear", indices=(i, j)
                    ) from exc
                if not hit:
                    bool_adj[i, j] = True
                    bool_adj[j, i] = True
    meta = {"obstacle": type(obst).__name__, "s": s}
    return _finish_graph(s, points, in_obs, bool_adj, meta)


def quadric_intersection_graph(matrices):
    """Incidence graph of quadric zero sets, via the pencil criterion.

    Vertices are quadrics; definite ones (empty zero set) are flagged
    in_obstacle and stay isolated.  An edge joins two non-definite quadrics
    when their pencil contains no definite matrix (zero sets intersect).
    Borderline pencil verdicts are counted in meta and resolved as no edge.
    """
    if len(matrices) < 1:
        raise InvalidInput("need at least one matrix")
    m = matrices[0].dim
    if any(q.dim != m for q in matrices):
        raise InvalidInput("all matrices must share one dimension")
    s = len(matrices)
    packed = np.stack([q.entries for q in matrices])
    is_pd, is_nd = definite_batch(packed, m)
    in_obs = is_pd | is_nd
    live = np.nonzero(~in_obs)[0]
    bool_adj = np.zeros((s, s), dtype=bool)
    borderline = 0
    if live.size >= 2:
        iu, ju = np.triu_indices(live.size, 1)
        gi = live[iu]
        gj = live[ju]
        for start in range(0, gi.size, _PAIR_CHUNK):
            sl = slice(start, start + _PAIR_CHUNK)
            codes, _ = pencil_outcomes_batch(packed[gi[sl]], packed[gj[sl]], m)
            edge = codes == CODE_NO_DEFINITE
            borderline += int(np.count_nonzero(codes == CODE_BORDERLINE))
            bool_adj[gi[sl][edge], gj[sl][edge]] = True
            bool_adj[gj[sl][edge], gi[sl][edge]] = True
    meta = {
        "obstacle": "PsdConeObstacle",
        "s": s,
        "m": m,
        "definite_count": int(in_obs.sum()),
        "borderline_count": borderline,
    }
    return _finish_graph(s, list(matrices), in_obs, bool_adj, meta)


# ---------------------------------------------------------------------------
# component counting


class Dsu:
    """Union-find with path compression and union by rank."""

    def __init__(self, n):
        self.parent = list(range(n))
        self.rank = [0] * n
        self.count = n

    def find(self, x):
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a, b):
        ra = self.find(a)
        rb = self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        self.count -= 1
        return True

    def component_count(self):
        return self.count


def connected_components(graph):
    """Number of connected components (union-find over all edges)."""
    dsu = Dsu(graph.s)
    for i in range(graph.s):
        row = np.unpackbits(graph.adj[i], count=graph.s)
        for j in np.nonzero(row[i + 1 :])[0]:
            dsu.union(i, int(j) + i + 1)
    return dsu.component_count()


def isolated_count(graph):
    """Number of degree-0 vertices."""
    return int(np.count_nonzero(graph.degrees() == 0))


def degree_histogram(graph):
    """Map degree -> number of vertices with that degree."""
    values, counts = np.unique(graph.degrees(), return_counts=True)
    return {int(v): int(c) for v, c in zip(values, counts)}


def region_counts(points, obst, eps):
    """(s_e, s_a, s_p): outside-dilation, annulus, inside counts; sums to s.

    s_p counts points in the obstacle, s_a points in the eps-dilation but
    not the obstacle, s_e the rest.
    """
    if eps < 0.0:
        raise InvalidInput("dilation must be >= 0")
    if isinstance(obst, CapObstacle):
        points = np.asarray(points, dtype=float)
        dots = np.abs(points @ obst.center)
        s_p = int(np.count_nonzero(dots >= obst.cos_rho))
        radius = min(obst.rho + eps, 0.5 * math.pi - 1e-9)
        in_dilated = int(np.count_nonzero(dots >= math.cos(radius)))
        s_a = in_dilated - s_p
        s = points.shape[0]
    else:
        s_p = 0
        s_a = 0
        s = len(points)
        for p in points:
            if obst.contains(p):
                s_p += 1
            elif obst.contains_eps(p, eps):
                s_a += 1
    return (s - s_a - s_p, s_a, s_p)
