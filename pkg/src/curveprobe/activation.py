"""Attention-log ingestion and Massive Activation flagging.

A log holds post-softmax attention weights per (layer, head, src, dst).
Weights are normalized into activation ratios by dividing each |weight| by
the median |weight| of its normalization group; a pair of nodes is flagged
as a Massive Activation when its maximum ratio across layers, heads and
directions lands in the top tail of the dataset-wide ratio distribution.

The normalization group is (layer, head) by default; pass
median_scope="layer" to pool heads, matching the coarser reading of the
per-layer median. The percentile cutoff uses the tie-inclusive top-tail
rule: with N per-pair maxima and percentile p, the cutoff is the smallest
value of the top ceil((100-p)/100 * N) entries and everything >= it is
flagged, so distinct maxima yield exactly that many flags.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .curvature import bfc_all
from .errors import ValidationError
from .graph import Graph, canonical_pair

EPSILON = 1e-12


@dataclass(frozen=True)
class ActivationLog:
    graph_id: str
    model: str
    records: tuple[tuple[int, int, int, int, float], ...]  # (layer, head, src, dst, weight)


@dataclass(frozen=True)
class MAEntry:
    src: int
    dst: int
    max_ratio: float
    argmax_layer: int
    argmax_head: int
    flagged: bool
    hop: int | None          # None = unreachable
    bfc: float | None        # None for non-structural pairs


@dataclass(frozen=True)
class MAReport:
    graph_id: str
    model: str
    threshold_percentile: float
    cutoff: float
    entries: tuple[MAEntry, ...]


def make_activation_log(graph_id, model, records) -> ActivationLog:
    seen = set()
    recs = []
    for r in records:
        layer, head, src, dst, weight = int(r[0]), int(r[1]), int(r[2]), int(r[3]), float(r[4])
        key = (layer, head, src, dst)
        if key in seen:
            raise ValidationError(f"log {graph_id!r}: duplicate record {key}")
        if weight < 0:
            raise ValidationError(f"log {graph_id!r}: negative attention weight at {key}")
        seen.add(key)
        recs.append((layer, head, src, dst, weight))
    recs.sort()
    return ActivationLog(graph_id=str(graph_id), model=str(model), records=tuple(recs))


def load_activation_logs(path) -> list[ActivationLog]:
    """Read JSON Lines logs: one {graph_id, model, records:[...]} object per graph."""
    logs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{lineno}: malformed JSON ({exc.msg})") from None
            try:
                records = [(r["layer"], r["head"], r["src"], r["dst"], r["weight"]) for r in obj["records"]]
                logs.append(make_activation_log(obj["graph_id"], obj.get("model", ""), records))
            except (KeyError, TypeError) as exc:
                raise ValidationError(f"{path}:{lineno}: bad activation record ({exc})") from None
            except ValidationError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from None
    return logs


def save_activation_logs(logs, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for log in logs:
            obj = {
                "graph_id": log.graph_id,
                "model": log.model,
                "records": [
                    {"layer": l, "head": h, "src": s, "dst": d, "weight": w}
                    for l, h, s, d, w in log.records
                ],
            }
            fh.write(json.dumps(obj, separators=(",", ":")) + "\n")


def _group_key(record, median_scope):
    layer, head = record[0], record[1]
    return (layer,) if median_scope == "layer" else (layer, head)


def activation_ratios(log: ActivationLog, median_scope: str = "layer_head"):
    """Median-normalized ratios, one per log record, in sorted record order.

    Returns a list of (layer, head, src, dst, ratio).
    """
    if median_scope not in ("layer", "layer_head"):
        raise ValidationError(f"unknown median scope {median_scope!r}")
    groups: dict[tuple, list[float]] = {}
    for rec in log.records:
        groups.setdefault(_group_key(rec, median_scope), []).append(abs(rec[4]))
    medians = {}
    for key, weights in groups.items():
        med = float(np.median(weights))
        if med < EPSILON:
            label = f"layer {key[0]}" if len(key) == 1 else f"layer {key[0]}, head {key[1]}"
            raise ValidationError(f"log {log.graph_id!r}: degenerate group median at {label}")
        medians[key] = med
    return [
        (layer, head, src, dst, abs(w) / medians[_group_key((layer, head), median_scope)])
        for layer, head, src, dst, w in log.records
    ]


def percentile_cutoff(values, percentile: float) -> float:
    """Smallest value of the top ceil((100-p)/100 * N) entries (ascending sort)."""
    if not 0.0 < percentile < 100.0:
        raise ValidationError(f"percentile must be in (0, 100), got {percentile}")
    arr = np.sort(np.asarray(list(values), dtype=np.float64))
    n = arr.shape[0]
    if n == 0:
        raise ValidationError("cannot take a percentile of an empty collection")
    tail = math.ceil(round((100.0 - percentile) * n / 100.0, 9))
    tail = min(max(tail, 1), n)
    return float(arr[n - tail])


def pair_maxima(log: ActivationLog, median_scope: str = "layer_head"):
    """Per unordered node pair: (max ratio, argmax layer, argmax head).

    Direction is folded in: records (i, j) and (j, i) feed the same pair.
    Ties resolve to the first record in (layer, head, src, dst) order.
    """
    out: dict[tuple[int, int], tuple[float, int, int]] = {}
    for layer, head, src, dst, ratio in activation_ratios(log, median_scope):
        pair = canonical_pair(src, dst)
        cur = out.get(pair)
        if cur is None or ratio > cur[0]:
            out[pair] = (ratio, layer, head)
    return out


def flag_massive(logs, graphs, percentile: float = 95.0, median_scope: str = "layer_head",
                 per_graph_cutoff: bool = False) -> list[MAReport]:
    """Flag Massive Activations across a dataset of logs.

    graphs: mapping graph_id -> Graph, used for hop and curvature annotations.
    The cutoff is taken over the per-pair maxima of the whole dataset unless
    per_graph_cutoff is set (ablation mode).
    """
    logs = list(logs)
    if not logs:
        raise ValidationError("flag_massive needs at least one activation log")
    per_log = []
    for log in logs:
        if log.graph_id not in graphs:
            raise ValidationError(f"graph_id {log.graph_id!r} not found in graph set")
        per_log.append((log, pair_maxima(log, median_scope)))

    if not per_graph_cutoff:
        all_maxima = [v[0] for _, maxima in per_log for v in maxima.values()]
        global_cutoff = percentile_cutoff(all_maxima, percentile)

    reports = []
    for log, maxima in per_log:
        g = graphs[log.graph_id]
        bfc = dict(bfc_all(g))
        cutoff = percentile_cutoff([v[0] for v in maxima.values()], percentile) if per_graph_cutoff else global_cutoff
        entries = []
        for (src, dst) in sorted(maxima):
            ratio, layer, head = maxima[(src, dst)]
            entries.append(MAEntry(
                src=src,
                dst=dst,
                max_ratio=ratio,
                argmax_layer=layer,
                argmax_head=head,
                flagged=ratio >= cutoff,
                hop=g.hop_distance(src, dst),
                bfc=bfc.get((src, dst)),
            ))
        reports.append(MAReport(
            graph_id=log.graph_id,
            model=log.model,
            threshold_percentile=float(percentile),
            cutoff=cutoff,
            entries=tuple(entries),
        ))
    return reports


def ma_hop_lengths(reports, graphs=None) -> dict:
    """Histogram of hop distances over flagged entries.

    Keys are hop counts plus "unreachable" for disconnected pairs. When a
    graph mapping is given, hops are recomputed from it (missing graph_id
    is an error); otherwise the hops stored in the reports are used.
    """
    hist: dict = {}
    for report in reports:
        g = None
        if graphs is not None:
            if report.graph_id not in graphs:
                raise ValidationError(f"graph_id {report.graph_id!r} not found in graph set")
            g = graphs[report.graph_id]
        for entry in report.entries:
            if not entry.flagged:
                continue
            hop = g.hop_distance(entry.src, entry.dst) if g is not None else entry.hop
            key = "unreachable" if hop is None else hop
            hist[key] = hist.get(key, 0) + 1
    return hist


def attention_entropy(log: ActivationLog):
    """Shannon entropy (nats) of each (layer, head, src) attention row.

    Rows are renormalized over their logged dst entries; 0*log(0) counts
    as 0. A row with total mass below epsilon is an error.
    """
    rows: dict[tuple[int, int, int], list[float]] = {}
    for layer, head, src, dst, w in log.records:
        rows.setdefault((layer, head, src), []).append(abs(w))
    out = []
    for key in sorted(rows):
        weights = np.asarray(rows[key], dtype=np.float64)
        total = float(weights.sum())
        if total < EPSILON:
            layer, head, src = key
            raise ValidationError(
                f"log {log.graph_id!r}: attention row (layer {layer}, head {head}, src {src}) has ~zero mass"
            )
        p = weights / total
        nz = p[p > 0]
        entropy = float(-(nz * np.log(nz)).sum())
        out.append((*key, max(entropy, 0.0)))
    return out


def report_to_record(report: MAReport) -> dict:
    return {
        "graph_id": report.graph_id,
        "model": report.model,
        "threshold_percentile": report.threshold_percentile,
        "cutoff": report.cutoff,
        "entries": [
            {
                "src": e.src,
                "dst": e.dst,
                "max_ratio": e.max_ratio,
                "argmax_layer": e.argmax_layer,
                "argmax_head": e.argmax_head,
                "flagged": e.flagged,
                "hop": e.hop,
                "bfc": e.bfc,
            }
            for e in report.entries
        ],
    }


def report_from_record(obj: dict) -> MAReport:
    try:
        entries = tuple(
            MAEntry(
                src=int(e["src"]),
                dst=int(e["dst"]),
                max_ratio=float(e["max_ratio"]),
                argmax_layer=int(e["argmax_layer"]),
                argmax_head=int(e["argmax_head"]),
                flagged=bool(e["flagged"]),
                hop=None if e.get("hop") is None else int(e["hop"]),
                bfc=None if e.get("bfc") is None else float(e["bfc"]),
            )
            for e in obj["entries"]
        )
        return MAReport(
            graph_id=obj["graph_id"],
            model=obj.get("model", ""),
            threshold_percentile=float(obj.get("threshold_percentile", 95.0)),
            cutoff=float(obj.get("cutoff", 0.0)),
            entries=entries,
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"bad MA report record ({exc})") from None


def save_ma_reports(reports, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for report in reports:
            fh.write(json.dumps(report_to_record(report), separators=(",", ":")) + "\n")


def load_ma_reports(path) -> list[MAReport]:
    reports = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{lineno}: malformed JSON ({exc.msg})") from None
            try:
                reports.append(report_from_record(obj))
            except ValidationError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from None
    return reports
