"""Balanced Forman curvature per edge.

For an edge (i, j) with degrees d_i, d_j the curvature combines three
motif ingredients of the surrounding topology:

  * triangles: common neighbors of i and j,
  * squares_i / squares_j: neighbors of i (resp. j) lying on a 4-cycle
    through (i, j) that has no diagonal (the outer nodes are not adjacent
    to the opposite base endpoint),
  * gamma_max: the largest number of such diagonal-free 4-cycles sharing
    one outer node.

The value is

    2/d_i + 2/d_j - 2 + 2*T/max(d) + T/min(d) + (S_i + S_j)/(gamma_max*max(d))

with the last term defined as 0 when no diagonal-free 4-cycle exists.
Negative values mark tree-like bottleneck neighborhoods; a bridge between
two k-cliques comes out at exactly 4/k - 2.

The all-edges path runs on CSR arrays through an optionally numba-compiled
kernel (see _accel); single-edge queries use a set-based reference path,
and bfc_bruteforce is an independent enumeration oracle for testing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._accel import maybe_njit
from .errors import ValidationError
from .graph import Graph, canonical_pair


@dataclass(frozen=True)
class MotifCounts:
    triangles: int
    squares_i: int
    squares_j: int
    gamma_max: int


@dataclass(frozen=True)
class CurvatureSummary:
    per_edge: tuple          # ((i, j), bfc) in canonical edge order
    weighted_mean: float
    negative_fraction: float
    weights_used: tuple


def _require_edge(g: Graph, e) -> tuple[int, int]:
    pair = canonical_pair(int(e[0]), int(e[1]))
    if pair not in g.edge_index:
        raise ValidationError(f"graph {g.graph_id!r}: {list(pair)} is not a structural edge")
    return pair


def motif_counts(g: Graph, e) -> MotifCounts:
    """Count the curvature motifs at a structural edge (set-based path)."""
    i, j = _require_edge(g, e)
    ni, nj = g.neighbors[i], g.neighbors[j]
    triangles = len(ni & nj)
    cycles_i: dict[int, int] = {}
    cycles_j: dict[int, int] = {}
    for k in ni:
        if k == j or k in nj:
            continue
        for w in g.neighbors[k]:
            if w == i or w not in nj or w in ni:
                continue
            cycles_i[k] = cycles_i.get(k, 0) + 1
            cycles_j[w] = cycles_j.get(w, 0) + 1
    gamma_max = max(max(cycles_i.values(), default=0), max(cycles_j.values(), default=0))
    return MotifCounts(
        triangles=triangles,
        squares_i=len(cycles_i),
        squares_j=len(cycles_j),
        gamma_max=gamma_max,
    )


def bfc_from_counts(d_i: int, d_j: int, m: MotifCounts) -> float:
    dmax = d_i if d_i >= d_j else d_j
    dmin = d_j if d_i >= d_j else d_i
    val = 2.0 / d_i + 2.0 / d_j - 2.0
    if m.triangles > 0:
        val += 2.0 * m.triangles / dmax + m.triangles / dmin
    squares = m.squares_i + m.squares_j
    if squares > 0:
        val += squares / (m.gamma_max * dmax)
    return val


def bfc_edge(g: Graph, e) -> float:
    """Balanced Forman curvature of one structural edge."""
    i, j = _require_edge(g, e)
    return bfc_from_counts(g.degree(i), g.degree(j), motif_counts(g, (i, j)))


@maybe_njit(cache=True, nogil=True)
def _bfc_kernel(indptr, indices, edge_i, edge_j, out):  # pragma: no cover - exercised via bfc_all
    n = indptr.shape[0] - 1
    wcount = np.zeros(n, dtype=np.int64)
    touched = np.empty(n, dtype=np.int64)
    for t in range(edge_i.shape[0]):
        i = edge_i[t]
        j = edge_j[t]
        ni = indices[indptr[i]:indptr[i + 1]]
        nj = indices[indptr[j]:indptr[j + 1]]
        d_i = ni.shape[0]
        d_j = nj.shape[0]

        triangles = 0
        a = 0
        b = 0
        while a < d_i and b < d_j:
            if ni[a] == nj[b]:
                triangles += 1
                a += 1
                b += 1
            elif ni[a] < nj[b]:
                a += 1
            else:
                b += 1

        squares_i = 0
        gamma = 0
        ntouched = 0
        for a in range(d_i):
            k = ni[a]
            if k == j:
                continue
            pos = np.searchsorted(nj, k)
            if pos < d_j and nj[pos] == k:
                continue  # common neighbor -> triangle, not square
            kcycles = 0
            for c in range(indptr[k], indptr[k + 1]):
                w = indices[c]
                if w == i:
                    continue
                pos = np.searchsorted(nj, w)
                if pos >= d_j or nj[pos] != w:
                    continue
                pos = np.searchsorted(ni, w)
                if pos < d_i and ni[pos] == w:
                    continue
                kcycles += 1
                if wcount[w] == 0:
                    touched[ntouched] = w
                    ntouched += 1
                wcount[w] += 1
            if kcycles > 0:
                squares_i += 1
                if kcycles > gamma:
                    gamma = kcycles
        squares_j = ntouched
        for c in range(ntouched):
            w = touched[c]
            if wcount[w] > gamma:
                gamma = wcount[w]
            wcount[w] = 0

        dmax = d_i if d_i >= d_j else d_j
        dmin = d_j if d_i >= d_j else d_i
        val = 2.0 / d_i + 2.0 / d_j - 2.0
        if triangles > 0:
            val += 2.0 * triangles / dmax + triangles / dmin
        squares = squares_i + squares_j
        if squares > 0:
            val += squares / (gamma * dmax)
        out[t] = val


def bfc_all(g: Graph) -> list[tuple[tuple[int, int], float]]:
    """BFc for every structural edge, in canonical edge order."""
    if not g.edges:
        return []
    indptr, indices = g.csr
    edge_arr = np.asarray(g.edges, dtype=np.int64)
    out = np.empty(len(g.edges), dtype=np.float64)
    _bfc_kernel(indptr, indices, edge_arr[:, 0].copy(), edge_arr[:, 1].copy(), out)
    return [(e, float(v)) for e, v in zip(g.edges, out)]


def bfc_bruteforce(g: Graph, e) -> float:
    """Oracle: evaluate the curvature from naively enumerated motifs.

    Scans all nodes for triangles and all node pairs for diagonal-free
    4-cycles through the edge, on a dense adjacency matrix built straight
    from the edge list. O(n^2) per edge; intended for n <= 64.
    """
    n = g.num_nodes
    adj = np.zeros((n, n), dtype=bool)
    for a, b in g.edges:
        adj[a, b] = True
        adj[b, a] = True
    i, j = canonical_pair(int(e[0]), int(e[1]))
    if not adj[i, j]:
        raise ValidationError(f"graph {g.graph_id!r}: {[i, j]} is not a structural edge")
    deg = adj.sum(axis=1)
    d_i, d_j = int(deg[i]), int(deg[j])

    triangles = int(np.count_nonzero(adj[i] & adj[j]))

    per_node: dict[int, int] = {}
    side_i: set[int] = set()
    side_j: set[int] = set()
    for k in range(n):
        if k == i or k == j or not adj[i, k] or adj[j, k]:
            continue
        for w in range(n):
            if w == i or w == j or w == k:
                continue
            if not adj[j, w] or adj[i, w] or not adj[k, w]:
                continue
            # i-k-w-j is a 4-cycle with no diagonal (i,w) nor (k,j)
            per_node[k] = per_node.get(k, 0) + 1
            per_node[w] = per_node.get(w, 0) + 1
            side_i.add(k)
            side_j.add(w)

    dmax, dmin = max(d_i, d_j), min(d_i, d_j)
    val = 2.0 / d_i + 2.0 / d_j - 2.0
    if triangles > 0:
        val += 2.0 * triangles / dmax + triangles / dmin
    squares = len(side_i) + len(side_j)
    if squares > 0:
        val += squares / (max(per_node.values()) * dmax)
    return val


def curvature_summary(per_edge, weights=None) -> CurvatureSummary:
    """Aggregate per-edge curvature into weighted mean and negative fraction.

    Uniform weights when none are given. Weights must be nonnegative with a
    positive sum and align 1:1 with per_edge.
    """
    pairs = [(ref, float(v)) for ref, v in per_edge]
    if weights is None:
        w = np.ones(len(pairs), dtype=np.float64)
    else:
        w = np.asarray(list(weights), dtype=np.float64)
        if w.shape[0] != len(pairs):
            raise ValidationError(f"weights length {w.shape[0]} != per_edge length {len(pairs)}")
        if np.any(w < 0):
            raise ValidationError("curvature weights must be nonnegative")
    total = float(w.sum())
    if len(pairs) == 0 or total <= 0.0:
        raise ValidationError("curvature summary needs a nonempty edge list with positive total weight")
    values = np.array([v for _, v in pairs], dtype=np.float64)
    weighted_mean = float((w * values).sum() / total)
    negative_fraction = float(w[values < 0].sum() / total)
    return CurvatureSummary(
        per_edge=tuple(pairs),
        weighted_mean=weighted_mean,
        negative_fraction=negative_fraction,
        weights_used=tuple(float(x) for x in w),
    )
