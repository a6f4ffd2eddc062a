"""Curvature-conditioned statistics over Massive Activation reports.

Enrichment compares the curvature distribution of MA-flagged structural
edges against the base curvature distribution: values above 1 mean the
flagged set over-represents that curvature. Curvature values on small
discrete graphs repeat exactly, so the default binning groups by exact
value (keys rounded at 1e-9 to absorb float drift); width binning with
half-open bins [a, a+w) is available for continuous summaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curvature import bfc_all
from .errors import ValidationError
from .graph import canonical_pair


@dataclass(frozen=True)
class EnrichmentEntry:
    curvature_value: float
    base_prob: float
    ma_prob: float
    enrichment: float | None   # None when base_prob is 0 (unseen bin)


@dataclass(frozen=True)
class EnrichmentTable:
    entries: tuple[EnrichmentEntry, ...]
    total_edges: int
    total_ma_edges: int
    no_ma_warning: bool


def _bin_key(value: float, binning: str, bin_width: float | None) -> float:
    if binning == "exact":
        key = round(float(value), 9)
        return 0.0 if key == 0 else key  # avoid -0.0 splitting a bin
    if binning == "width":
        if not bin_width or bin_width <= 0:
            raise ValidationError("width binning needs a positive bin_width")
        return math.floor(float(value) / bin_width) * bin_width
    raise ValidationError(f"unknown binning {binning!r}")


def enrichment(edge_values, binning: str = "exact", bin_width: float | None = None) -> EnrichmentTable:
    """Enrichment of MA flags per curvature bin.

    edge_values: iterable of (bfc_value, flagged) over structural edges.
    """
    pairs = [(float(v), bool(f)) for v, f in edge_values]
    if not pairs:
        raise ValidationError("enrichment needs at least one structural edge")
    base_counts: dict[float, int] = {}
    ma_counts: dict[float, int] = {}
    for value, flagged in pairs:
        key = _bin_key(value, binning, bin_width)
        base_counts[key] = base_counts.get(key, 0) + 1
        if flagged:
            ma_counts[key] = ma_counts.get(key, 0) + 1
    total = len(pairs)
    total_ma = sum(ma_counts.values())
    entries = []
    for key in sorted(base_counts):
        base_prob = base_counts[key] / total
        ma_prob = ma_counts.get(key, 0) / total_ma if total_ma > 0 else 0.0
        entries.append(EnrichmentEntry(
            curvature_value=key,
            base_prob=base_prob,
            ma_prob=ma_prob,
            enrichment=ma_prob / base_prob if base_prob > 0 else None,
        ))
    return EnrichmentTable(
        entries=tuple(entries),
        total_edges=total,
        total_ma_edges=total_ma,
        no_ma_warning=total_ma == 0,
    )


def edge_values_from_reports(reports, bfc_by_graph) -> list[tuple[float, bool]]:
    """Join MA reports with per-graph curvature lists, structural edges only.

    bfc_by_graph: mapping graph_id -> {(i, j): bfc}. Non-edge attention
    pairs in the reports are skipped; every structural edge must appear in
    its report (sparse logs that never touched an edge simply miss it).
    """
    out = []
    for report in reports:
        if report.graph_id not in bfc_by_graph:
            raise ValidationError(f"graph_id {report.graph_id!r} has no curvature data")
        bfc = bfc_by_graph[report.graph_id]
        for e in report.entries:
            pair = canonical_pair(e.src, e.dst)
            if pair in bfc:
                out.append((bfc[pair], e.flagged))
    return out


def layer_evolution(samples, binning: str = "exact", bin_width: float | None = None):
    """Mean activation ratio per (layer, curvature bin) over MA-flagged edges.

    samples: iterable of (layer, curvature_value, ratio). Returns sorted
    rows (layer, curvature_value, mean_ratio, count); bins with no samples
    simply do not appear.
    """
    sums: dict[tuple[int, float], list] = {}
    for layer, value, ratio in samples:
        key = (int(layer), _bin_key(value, binning, bin_width))
        cell = sums.setdefault(key, [0.0, 0])
        cell[0] += float(ratio)
        cell[1] += 1
    return [
        (layer, value, total / count, count)
        for (layer, value), (total, count) in sorted(sums.items())
    ]


def layer_samples(logs, reports, graphs, median_scope: str = "layer_head"):
    """Build (layer, bfc, ratio) samples for MA-flagged structural edges."""
    from .activation import activation_ratios

    flagged_pairs = {
        report.graph_id: {canonical_pair(e.src, e.dst) for e in report.entries if e.flagged}
        for report in reports
    }
    samples = []
    for log in logs:
        if log.graph_id not in flagged_pairs:
            continue
        g = graphs[log.graph_id]
        bfc = dict(bfc_all(g))
        wanted = flagged_pairs[log.graph_id]
        for layer, head, src, dst, ratio in activation_ratios(log, median_scope):
            pair = canonical_pair(src, dst)
            if pair in wanted and pair in bfc:
                samples.append((layer, bfc[pair], ratio))
    return samples


def correlate(xs, ys) -> tuple[float, float, float]:
    """Pearson r plus ordinary least squares (slope, intercept) of ys on xs."""
    x = np.asarray(list(xs), dtype=np.float64)
    y = np.asarray(list(ys), dtype=np.float64)
    if x.shape != y.shape or x.shape[0] < 3:
        raise ValidationError("correlate needs matching x/y lists of length >= 3")
    x_centered = x - x.mean()
    y_centered = y - y.mean()
    var_x = float((x_centered ** 2).sum())
    var_y = float((y_centered ** 2).sum())
    if var_x == 0.0:
        raise ValidationError("correlate: x values are all equal (degenerate variance)")
    cov = float((x_centered * y_centered).sum())
    slope = cov / var_x
    intercept = float(y.mean() - slope * x.mean())
    r = 0.0 if var_y == 0.0 else cov / math.sqrt(var_x * var_y)
    return (r, slope, intercept)


def node_min_bfc(g) -> dict[int, float]:
    """Per node: minimum curvature over incident edges (isolated nodes absent)."""
    out: dict[int, float] = {}
    for (i, j), v in bfc_all(g):
        for node in (i, j):
            if node not in out or v < out[node]:
                out[node] = v
    return out


def entropy_curvature_pairs(log, g):
    """(min incident BFc of src, row entropy) pairs for correlation diagnostics."""
    from .activation import attention_entropy

    curv = node_min_bfc(g)
    return [
        (curv[src], entropy)
        for _, _, src, entropy in attention_entropy(log)
        if src in curv
    ]
