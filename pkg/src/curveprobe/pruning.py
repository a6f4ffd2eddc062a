"""Causal-pruning sets and loss-delta bookkeeping.

Structural edges are split by (MA flag, curvature sign) into set A
(flagged, negative), set B (flagged, positive) and set C (unflagged,
negative); edges at exactly zero curvature are excluded from all three so
no boundary edge is silently assigned. Pruned dataset variants physically
delete the targeted edges, and delta_loss consumes the evaluation reports
produced on them.

Loss deltas are computed in decimal arithmetic on the serialized values,
so a report pair like 0.51 / 0.6224 yields exactly 0.1124 rather than a
binary-float approximation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import Decimal

from .errors import ValidationError
from .graph import Graph, canonical_pair

VARIANTS = ("baseline", "prune_A", "prune_B", "prune_C")
_TAG_SEPARATOR = "__prune"


@dataclass(frozen=True)
class PruningSets:
    set_a: tuple            # (graph_id, (i, j)): flagged, bfc < 0
    set_b: tuple            # flagged, bfc > 0
    set_c: tuple            # unflagged, bfc < 0
    residual_pos: tuple     # unflagged, bfc > 0 (kept for partition accounting)
    excluded_zero: tuple    # bfc == 0, never pruned


@dataclass(frozen=True)
class EvalReport:
    variant: str
    loss: Decimal
    per_graph: tuple = ()


def categorize(flags_by_graph, bfc_by_graph) -> PruningSets:
    """Partition structural edges by MA flag and curvature sign.

    flags_by_graph / bfc_by_graph: mappings graph_id -> {(i, j): bool / float}
    covering the same edge sets; a mismatch is an error.
    """
    if set(flags_by_graph) != set(bfc_by_graph):
        missing = set(flags_by_graph) ^ set(bfc_by_graph)
        raise ValidationError(f"MA flags and curvature cover different graphs: {sorted(missing)}")
    set_a, set_b, set_c, residual, zero = [], [], [], [], []
    for gid in sorted(flags_by_graph):
        flags = flags_by_graph[gid]
        bfc = bfc_by_graph[gid]
        if set(flags) != set(bfc):
            offender = sorted(set(flags) ^ set(bfc))[0]
            raise ValidationError(f"graph {gid!r}: edge {list(offender)} present in only one of MA/curvature inputs")
        for pair in sorted(flags):
            ref = (gid, pair)
            value = bfc[pair]
            if value == 0:
                zero.append(ref)
            elif flags[pair] and value < 0:
                set_a.append(ref)
            elif flags[pair]:
                set_b.append(ref)
            elif value < 0:
                set_c.append(ref)
            else:
                residual.append(ref)
    return PruningSets(tuple(set_a), tuple(set_b), tuple(set_c), tuple(residual), tuple(zero))


def base_graph_id(graph_id: str) -> str:
    return graph_id.split(_TAG_SEPARATOR, 1)[0]


def variant_graph_id(graph_id: str, target: str) -> str:
    return f"{base_graph_id(graph_id)}{_TAG_SEPARATOR}_{target}"


def emit_pruned(graphs, sets: PruningSets, target: str) -> list[Graph]:
    """Datasets with the targeted edge set deleted.

    Node counts never change; edge features of deleted edges go with them.
    Graph ids get a variant suffix (idempotent: an already-tagged id keeps
    a single tag, and re-pruning an already-pruned dataset is a no-op).
    """
    if target not in ("A", "B", "C"):
        raise ValidationError(f"pruning target must be A, B or C, got {target!r}")
    chosen = {"A": sets.set_a, "B": sets.set_b, "C": sets.set_c}[target]
    by_graph: dict[str, set] = {}
    for gid, pair in chosen:
        by_graph.setdefault(base_graph_id(gid), set()).add(pair)

    known = {base_graph_id(g.graph_id) for g in graphs}
    for gid in by_graph:
        if gid not in known:
            raise ValidationError(f"pruning target references unknown graph {gid!r}")

    out = []
    for g in graphs:
        base_id = base_graph_id(g.graph_id)
        doomed = by_graph.get(base_id, set())
        if base_id == g.graph_id:  # untagged input: every ref must resolve
            bad = {p for p in doomed if p not in g.edge_index}
            if bad:
                raise ValidationError(f"graph {g.graph_id!r}: cannot prune missing edge {sorted(bad)[0]}")
        keep = [k for k, e in enumerate(g.edges) if e not in doomed]
        features = tuple(g.edge_features[k] for k in keep) if g.edge_features is not None else None
        out.append(g.replace_edges(
            edges=[g.edges[k] for k in keep],
            edge_features=features,
            graph_id=variant_graph_id(g.graph_id, target),
        ))
    return out


def _to_decimal(value) -> Decimal:
    if isinstance(value, Decimal):
        return value
    if isinstance(value, float):
        return Decimal(repr(value))
    return Decimal(str(value))


def make_eval_report(variant: str, loss, per_graph=()) -> EvalReport:
    if variant not in VARIANTS:
        raise ValidationError(f"unknown eval variant {variant!r} (expected one of {VARIANTS})")
    loss = _to_decimal(loss)
    if not loss.is_finite():
        raise ValidationError(f"variant {variant!r}: loss must be finite")
    return EvalReport(
        variant=variant,
        loss=loss,
        per_graph=tuple((str(g), _to_decimal(l)) for g, l in per_graph),
    )


def load_eval_report(path) -> EvalReport:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh, parse_float=Decimal)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: malformed JSON ({exc.msg})") from None
    try:
        per_graph = [(r["graph_id"], r["loss"]) for r in obj.get("per_graph", [])]
        return make_eval_report(obj["variant"], obj["loss"], per_graph)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{path}: bad eval report ({exc})") from None


def delta_loss(baseline: EvalReport, variants) -> dict:
    """Loss increase of each variant over the baseline.

    Returns {variant: {"loss", "delta_loss", "relative_error_pct"}}; the
    relative column is omitted (None + warning flag) when the baseline
    loss is not positive.
    """
    if baseline.variant != "baseline":
        raise ValidationError(f"baseline report has variant {baseline.variant!r}")
    table: dict = {
        "baseline": {"loss": float(baseline.loss)},
        "variants": {},
        "warnings": [],
    }
    if baseline.loss <= 0:
        table["warnings"].append("baseline loss <= 0: relative errors omitted")
    for report in variants:
        delta = report.loss - baseline.loss
        entry = {
            "loss": float(report.loss),
            "delta_loss": float(delta),
            "relative_error_pct": float(delta / baseline.loss * 100) if baseline.loss > 0 else None,
        }
        table["variants"][report.variant] = entry
    return table
