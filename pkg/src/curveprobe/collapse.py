"""Effective geometry induced by attention, and its shift from the input graph.

The activation graph reweights node pairs by their aggregated activation
ratios; pairs at or above a cutoff form the effective edge set. Curvature
is then recomputed on that unweighted edge set while summary statistics
weight each edge by its activation mass, so heavily-attended edges
dominate the aggregate. A drop in weighted mean curvature / rise in the
negative-edge fraction between the static and activation summaries is the
curvature-collapse signature; the spectral gap comparison captures the
matching loss of global connectivity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .activation import ActivationLog, activation_ratios
from .curvature import CurvatureSummary, bfc_all, curvature_summary
from .errors import CapabilityError, ValidationError
from .graph import Graph, canonical_pair, make_graph

DENSE_EIGENSOLVER_LIMIT = 2048


@dataclass(frozen=True)
class ActivationGraph:
    base_graph_id: str
    pairs: tuple[tuple[int, int, float], ...]       # (i, j, weight), i <= j, symmetrized
    effective_edges: tuple[tuple[int, int], ...]    # pairs with weight >= threshold, no self-loops
    effective_weights: tuple[float, ...]
    threshold: float
    aggregation: str


@dataclass(frozen=True)
class CollapseReport:
    graph_id: str
    static_summary: CurvatureSummary
    activation_summary: CurvatureSummary
    static_negative_fraction: float
    activation_negative_fraction: float
    static_spectral_gap: float
    activation_spectral_gap: float


def build_activation_graph(g: Graph, log: ActivationLog, aggregation: str = "mean",
                           threshold: float = 1.0, median_scope: str = "layer_head",
                           structural_only: bool = False) -> ActivationGraph:
    """Aggregate activation ratios into a reweighted pair set.

    Per direction, ratios are pooled across layers and heads (mean or max);
    the two directions of a pair are then averaged. With the default
    threshold of 1.0 a pair stays effective when its aggregate sits at or
    above its group median. structural_only drops logged non-edge pairs
    before thresholding.
    """
    if log.graph_id != g.graph_id:
        raise ValidationError(f"activation log {log.graph_id!r} does not match graph {g.graph_id!r}")
    if aggregation not in ("mean", "max"):
        raise ValidationError(f"unknown aggregation {aggregation!r}")
    if threshold < 0:
        raise ValidationError("threshold must be nonnegative")

    directed: dict[tuple[int, int], list[float]] = {}
    for _, _, src, dst, ratio in activation_ratios(log, median_scope):
        directed.setdefault((src, dst), []).append(ratio)
    agg = {k: (float(np.mean(v)) if aggregation == "mean" else float(max(v))) for k, v in directed.items()}

    sym: dict[tuple[int, int], float] = {}
    for (src, dst) in agg:
        pair = canonical_pair(src, dst)
        if pair in sym:
            continue
        fwd = agg.get((pair[0], pair[1]))
        rev = agg.get((pair[1], pair[0])) if pair[0] != pair[1] else None
        if fwd is not None and rev is not None:
            sym[pair] = (fwd + rev) / 2.0
        else:
            sym[pair] = fwd if fwd is not None else rev

    if structural_only:
        sym = {p: v for p, v in sym.items() if p[0] == p[1] or g.has_edge(*p)}

    pairs = tuple((i, j, sym[(i, j)]) for i, j in sorted(sym))
    effective = [(i, j, w) for i, j, w in pairs if i != j and w >= threshold]
    return ActivationGraph(
        base_graph_id=g.graph_id,
        pairs=pairs,
        effective_edges=tuple((i, j) for i, j, _ in effective),
        effective_weights=tuple(w for _, _, w in effective),
        threshold=float(threshold),
        aggregation=aggregation,
    )


def spectral_gap(edges, num_nodes: int, largest_component: bool = True,
                 normalized: bool = True) -> float:
    """Second-smallest Laplacian eigenvalue over the node support of the edges.

    Uses the symmetric normalized Laplacian by default (unnormalized via
    flag) and a dense symmetric eigensolver, so the support is capped at
    DENSE_EIGENSOLVER_LIMIT nodes. With largest_component the gap is taken
    on the biggest connected piece; otherwise a disconnected edge set
    yields 0.
    """
    edges = [canonical_pair(int(e[0]), int(e[1])) for e in edges]
    if not edges:
        raise ValidationError("spectral gap needs a nonempty edge set")
    support = sorted({v for e in edges for v in e})
    if any(v < 0 or v >= num_nodes for v in support):
        raise ValidationError("edge endpoint out of range")

    if largest_component:
        parent = {v: v for v in support}

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for i, j in edges:
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[ri] = rj
        members: dict[int, list[int]] = {}
        for v in support:
            members.setdefault(find(v), []).append(v)
        component = set(max(members.values(), key=lambda nodes: (len(nodes), -min(nodes))))
        edges = [e for e in edges if e[0] in component]
        support = sorted(component)

    n = len(support)
    if n > DENSE_EIGENSOLVER_LIMIT:
        raise CapabilityError(
            f"spectral gap: {n} support nodes exceeds the dense eigensolver bound of {DENSE_EIGENSOLVER_LIMIT}"
        )
    index = {v: k for k, v in enumerate(support)}
    adj = np.zeros((n, n), dtype=np.float64)
    for i, j in edges:
        adj[index[i], index[j]] = 1.0
        adj[index[j], index[i]] = 1.0
    deg = adj.sum(axis=1)
    if normalized:
        inv_sqrt = 1.0 / np.sqrt(deg)
        lap = np.eye(n) - (inv_sqrt[:, None] * adj) * inv_sqrt[None, :]
    else:
        lap = np.diag(deg) - adj
    eigenvalues = np.linalg.eigvalsh(lap)
    return max(float(eigenvalues[1]), 0.0)


def curvature_shift(g: Graph, ag: ActivationGraph, largest_component: bool = True,
                    normalized: bool = True) -> CollapseReport:
    """Compare static curvature/connectivity against the activation graph's."""
    if ag.base_graph_id != g.graph_id:
        raise ValidationError(f"activation graph {ag.base_graph_id!r} does not match graph {g.graph_id!r}")
    if not ag.effective_edges:
        raise ValidationError(f"graph {g.graph_id!r}: effective edge set is empty at threshold {ag.threshold}")
    static_summary = curvature_summary(bfc_all(g))
    effective = make_graph(g.graph_id + "#effective", g.num_nodes, ag.effective_edges)
    activation_summary = curvature_summary(bfc_all(effective), weights=ag.effective_weights)
    return CollapseReport(
        graph_id=g.graph_id,
        static_summary=static_summary,
        activation_summary=activation_summary,
        static_negative_fraction=static_summary.negative_fraction,
        activation_negative_fraction=activation_summary.negative_fraction,
        static_spectral_gap=spectral_gap(g.edges, g.num_nodes, largest_component, normalized),
        activation_spectral_gap=spectral_gap(ag.effective_edges, g.num_nodes, largest_component, normalized),
    )
