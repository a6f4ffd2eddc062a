"""curveprobe command-line entry point.

Subcommands cover the full pipeline: gen-barbell produces datasets,
curvature/spectral score graphs, ma flags massive activations from logs,
enrich/collapse aggregate statistics, prune emits ablation datasets and
delta-loss ingests the evaluation reports produced on them.

Exit codes: 0 success, 1 validation error, 2 capability error, 64 usage.
Outputs are written atomically (temp file + rename) and every output
directory receives a run manifest with input digests; apart from the
manifest timestamp, identical inputs and flags give byte-identical
outputs. A JSON --config file may supply any flag value; explicit flags
win over the file.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import shlex
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .activation import (
    flag_massive,
    load_activation_logs,
    load_ma_reports,
    ma_hop_lengths,
    report_to_record,
    save_ma_reports,
)
from .collapse import build_activation_graph, curvature_shift
from .collapse import spectral_gap as compute_spectral_gap
from .curvature import bfc_all, curvature_summary
from .errors import CapabilityError, ValidationError
from .graph import canonical_pair, dump_graphs, load_graphs
from .pruning import categorize, delta_loss, emit_pruned, load_eval_report
from .stats import edge_values_from_reports, enrichment, layer_evolution, layer_samples
from .synth import gen_dataset, spec_for_variant

USAGE_EXIT = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- output --

def _write_atomic(path, data: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path, obj) -> None:
    _write_atomic(path, json.dumps(obj, indent=2) + "\n")


def _write_csv(path, header, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    _write_atomic(path, buf.getvalue())


def _csv_sibling(path) -> Path:
    return Path(path).with_suffix(".csv")


def _digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out_dir, args, inputs) -> None:
    snapshot = {
        k: v for k, v in sorted(vars(args).items())
        if k not in ("func", "argv") and isinstance(v, (str, int, float, bool, type(None), list))
    }
    manifest = {
        "tool": "curveprobe",
        "version": __version__,
        "command_line": shlex.join(["curveprobe"] + list(args.argv)),
        "config": snapshot,
        "inputs": {str(p): _digest(p) for p in inputs},
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    _write_atomic(Path(out_dir) / "manifest.json", json.dumps(manifest, indent=2) + "\n")


def _pool(args):
    jobs = args.jobs if args.jobs and args.jobs > 0 else (os.cpu_count() or 1)
    return ThreadPoolExecutor(max_workers=jobs)


def _load_graph_map(path):
    graphs = load_graphs(path)
    return graphs, {g.graph_id: g for g in graphs}


# ----------------------------------------------------------- subcommands --

def cmd_curvature(args) -> int:
    graphs = load_graphs(args.graphs)

    def score(g):
        values = bfc_all(g)
        if values:
            summary = curvature_summary(values)
            mean, neg = summary.weighted_mean, summary.negative_fraction
        else:
            mean, neg = 0.0, 0.0
        return {
            "graph_id": g.graph_id,
            "edges": [list(e) for e, _ in values],
            "bfc": [v for _, v in values],
            "weighted_mean": mean,
            "negative_fraction": neg,
        }

    with _pool(args) as pool:
        records = list(pool.map(score, graphs))
    lines = "".join(json.dumps(r, separators=(",", ":")) + "\n" for r in records)
    _write_atomic(args.out, lines)
    _write_csv(
        _csv_sibling(args.out),
        ["graph_id", "i", "j", "bfc"],
        [(r["graph_id"], e[0], e[1], v) for r in records for e, v in zip(r["edges"], r["bfc"])],
    )
    _write_manifest(Path(args.out).parent, args, [args.graphs])
    return 0


def cmd_spectral(args) -> int:
    graphs = load_graphs(args.graphs)
    normalized = args.laplacian == "normalized"
    largest = args.scope == "largest-component"

    def score(g):
        return {
            "graph_id": g.graph_id,
            "spectral_gap": compute_spectral_gap(g.edges, g.num_nodes, largest, normalized),
            "num_edges": g.num_edges,
        }

    with _pool(args) as pool:
        records = list(pool.map(score, graphs))
    _write_atomic(args.out, "".join(json.dumps(r, separators=(",", ":")) + "\n" for r in records))
    _write_csv(
        _csv_sibling(args.out),
        ["graph_id", "spectral_gap", "num_edges"],
        [(r["graph_id"], r["spectral_gap"], r["num_edges"]) for r in records],
    )
    _write_manifest(Path(args.out).parent, args, [args.graphs])
    return 0


def cmd_ma(args) -> int:
    logs = load_activation_logs(args.logs)
    _, graph_map = _load_graph_map(args.graphs)
    reports = flag_massive(
        logs, graph_map,
        percentile=args.percentile,
        median_scope=args.median_scope,
        per_graph_cutoff=args.per_graph_cutoff,
    )
    save_dest = Path(args.out)
    payload = "".join(json.dumps(report_to_record(r), separators=(",", ":")) + "\n" for r in reports)
    _write_atomic(save_dest, payload)
    if args.hops_out:
        hist = ma_hop_lengths(reports, graph_map)
        _write_json(args.hops_out, {str(k): hist[k] for k in sorted(hist, key=str)})
    _write_manifest(save_dest.parent, args, [args.logs, args.graphs])
    return 0


def _bfc_map_from_file(path):
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                out[rec["graph_id"]] = {
                    canonical_pair(int(e[0]), int(e[1])): float(v)
                    for e, v in zip(rec["edges"], rec["bfc"])
                }
            except (json.JSONDecodeError, KeyError, TypeError, IndexError):
                raise ValidationError(f"{path}:{lineno}: bad curvature record") from None
    return out


def cmd_enrich(args) -> int:
    reports = load_ma_reports(args.ma)
    bfc_map = _bfc_map_from_file(args.bfc)
    values = edge_values_from_reports(reports, bfc_map)
    table = enrichment(values, binning=args.binning, bin_width=args.bin_width)
    obj = {
        "binning": args.binning,
        "bin_width": args.bin_width,
        "total_edges": table.total_edges,
        "total_ma_edges": table.total_ma_edges,
        "no_ma_warning": table.no_ma_warning,
        "entries": [
            {
                "curvature_value": e.curvature_value,
                "base_prob": e.base_prob,
                "ma_prob": e.ma_prob,
                "enrichment": e.enrichment,
            }
            for e in table.entries
        ],
    }
    _write_json(args.out, obj)
    _write_csv(
        _csv_sibling(args.out),
        ["curvature_value", "base_prob", "ma_prob", "enrichment"],
        [(e.curvature_value, e.base_prob, e.ma_prob, "" if e.enrichment is None else e.enrichment)
         for e in table.entries],
    )
    inputs = [args.ma, args.bfc]
    if args.layer_out:
        if not args.logs or not args.graphs:
            raise ValidationError("--layer-out needs both --logs and --graphs")
        logs = load_activation_logs(args.logs)
        _, graph_map = _load_graph_map(args.graphs)
        samples = layer_samples(logs, reports, graph_map, median_scope=args.median_scope)
        rows = layer_evolution(samples, binning=args.binning, bin_width=args.bin_width)
        _write_json(args.layer_out, [
            {"layer": l, "curvature_value": c, "mean_ratio": m, "count": n} for l, c, m, n in rows
        ])
        _write_csv(_csv_sibling(args.layer_out), ["layer", "curvature_value", "mean_ratio", "count"], rows)
        inputs += [args.logs, args.graphs]
    _write_manifest(Path(args.out).parent, args, inputs)
    return 0


def cmd_collapse(args) -> int:
    logs = load_activation_logs(args.logs)
    if not logs:
        raise ValidationError(f"no activation logs found in {args.logs}")
    _, graph_map = _load_graph_map(args.graphs)
    normalized = args.laplacian == "normalized"

    def run(log):
        if log.graph_id not in graph_map:
            raise ValidationError(f"graph_id {log.graph_id!r} not found in graph set")
        g = graph_map[log.graph_id]
        ag = build_activation_graph(
            g, log,
            aggregation=args.agg,
            threshold=args.theta,
            median_scope=args.median_scope,
            structural_only=args.structural_only,
        )
        report = curvature_shift(g, ag, normalized=normalized)
        return report

    with _pool(args) as pool:
        reports = list(pool.map(run, logs))

    records = []
    for r in reports:
        records.append({
            "graph_id": r.graph_id,
            "static_weighted_mean": r.static_summary.weighted_mean,
            "activation_weighted_mean": r.activation_summary.weighted_mean,
            "static_negative_fraction": r.static_negative_fraction,
            "activation_negative_fraction": r.activation_negative_fraction,
            "static_spectral_gap": r.static_spectral_gap,
            "activation_spectral_gap": r.activation_spectral_gap,
            "num_static_edges": len(r.static_summary.per_edge),
            "num_effective_edges": len(r.activation_summary.per_edge),
        })

    static_pool, activation_pool, activation_weights = [], [], []
    for r in reports:
        static_pool.extend(r.static_summary.per_edge)
        activation_pool.extend(r.activation_summary.per_edge)
        activation_weights.extend(r.activation_summary.weights_used)
    static_all = curvature_summary(static_pool)
    activation_all = curvature_summary(activation_pool, weights=activation_weights)
    aggregate = {
        "dataset_aggregate": True,
        "num_graphs": len(reports),
        "static_weighted_mean": static_all.weighted_mean,
        "activation_weighted_mean": activation_all.weighted_mean,
        "static_negative_fraction": static_all.negative_fraction,
        "activation_negative_fraction": activation_all.negative_fraction,
        "mean_static_spectral_gap": sum(r.static_spectral_gap for r in reports) / len(reports),
        "mean_activation_spectral_gap": sum(r.activation_spectral_gap for r in reports) / len(reports),
    }
    payload = "".join(json.dumps(rec, separators=(",", ":")) + "\n" for rec in records)
    payload += json.dumps(aggregate, separators=(",", ":")) + "\n"
    _write_atomic(args.out, payload)
    _write_csv(
        _csv_sibling(args.out),
        list(records[0].keys()) if records else [],
        [tuple(rec.values()) for rec in records],
    )
    _write_manifest(Path(args.out).parent, args, [args.graphs, args.logs])
    return 0


def _flags_map_from_reports(reports, bfc_map):
    flags = {}
    for report in reports:
        if report.graph_id not in bfc_map:
            raise ValidationError(f"graph_id {report.graph_id!r} has no curvature data")
        edges = bfc_map[report.graph_id]
        per_graph = {}
        for e in report.entries:
            pair = canonical_pair(e.src, e.dst)
            if pair in edges:
                per_graph[pair] = e.flagged
        flags[report.graph_id] = per_graph
    return flags


def cmd_prune(args) -> int:
    graphs = load_graphs(args.graphs)
    reports = load_ma_reports(args.ma)
    bfc_map = _bfc_map_from_file(args.bfc)
    flags = _flags_map_from_reports(reports, bfc_map)
    sets = categorize(flags, bfc_map)
    pruned = emit_pruned(graphs, sets, args.set)
    _write_atomic(args.out, dump_graphs(pruned))
    if args.sets_out:
        _write_json(args.sets_out, {
            "set_a": [[gid, list(pair)] for gid, pair in sets.set_a],
            "set_b": [[gid, list(pair)] for gid, pair in sets.set_b],
            "set_c": [[gid, list(pair)] for gid, pair in sets.set_c],
            "excluded_zero": [[gid, list(pair)] for gid, pair in sets.excluded_zero],
        })
    _write_manifest(Path(args.out).parent, args, [args.graphs, args.ma, args.bfc])
    return 0


def cmd_delta_loss(args) -> int:
    baseline = load_eval_report(args.baseline)
    variants = [load_eval_report(p) for p in args.variants]
    table = delta_loss(baseline, variants)
    _write_json(args.out, table)
    _write_csv(
        _csv_sibling(args.out),
        ["variant", "loss", "delta_loss", "relative_error_pct"],
        [
            (name, entry["loss"], entry["delta_loss"],
             "" if entry["relative_error_pct"] is None else entry["relative_error_pct"])
            for name, entry in table["variants"].items()
        ],
    )
    _write_manifest(Path(args.out).parent, args, [args.baseline, *args.variants])
    return 0


def cmd_gen_barbell(args) -> int:
    spec = spec_for_variant(
        args.variant,
        feature_mode=args.mode,
        clique_size=args.clique_size,
        feature_dim=args.feature_dim,
        num_train=args.n_train,
        num_test=args.n_test,
        seed=args.seed,
        dummy_attach=args.dummy_attach,
    )
    train, test = gen_dataset(spec)
    out_dir = Path(args.out_dir)
    _write_atomic(out_dir / "train.jsonl", dump_graphs(train))
    _write_atomic(out_dir / "test.jsonl", dump_graphs(test))
    _write_manifest(out_dir, args, [])
    return 0


def cmd_report(args) -> int:
    out_dir = Path(args.dir)
    if not out_dir.is_dir():
        raise ValidationError(f"report directory not found: {out_dir}")
    if args.out is None:
        args.out = str(out_dir / "report.json")
    per_graph: dict[str, dict] = {}

    def slot(gid):
        return per_graph.setdefault(gid, {"graph_id": gid})

    found = []
    bfc_path = out_dir / "bfc.jsonl"
    if bfc_path.exists():
        found.append(bfc_path)
        for gid, edges in _bfc_map_from_file(bfc_path).items():
            values = list(edges.values())
            entry = slot(gid)
            entry["num_edges"] = len(values)
            entry["bfc_mean"] = sum(values) / len(values) if values else 0.0
            entry["bfc_negative_fraction"] = (
                sum(1 for v in values if v < 0) / len(values) if values else 0.0
            )
    ma_path = out_dir / "ma.jsonl"
    if ma_path.exists():
        found.append(ma_path)
        for report in load_ma_reports(ma_path):
            entry = slot(report.graph_id)
            entry["ma_pairs"] = len(report.entries)
            entry["ma_flagged"] = sum(e.flagged for e in report.entries)
    collapse_path = out_dir / "collapse.jsonl"
    aggregate = None
    if collapse_path.exists():
        found.append(collapse_path)
        with open(collapse_path, "r", encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                rec = json.loads(line)
                if rec.get("dataset_aggregate"):
                    aggregate = rec
                    continue
                entry = slot(rec["graph_id"])
                for key in (
                    "static_weighted_mean", "activation_weighted_mean",
                    "static_negative_fraction", "activation_negative_fraction",
                    "static_spectral_gap", "activation_spectral_gap",
                ):
                    if key in rec:
                        entry[key] = rec[key]
    enrich_path = out_dir / "enrich.json"
    enrich_table = None
    if enrich_path.exists():
        found.append(enrich_path)
        enrich_table = json.loads(enrich_path.read_text())

    if not found:
        raise ValidationError(f"no bfc.jsonl/ma.jsonl/collapse.jsonl/enrich.json found under {out_dir}")

    consolidated = {
        "graphs": [per_graph[k] for k in sorted(per_graph)],
        "enrichment": enrich_table,
        "collapse_aggregate": aggregate,
    }
    _write_json(args.out, consolidated)
    columns = sorted({k for rec in per_graph.values() for k in rec} - {"graph_id"})
    _write_csv(
        _csv_sibling(args.out),
        ["graph_id", *columns],
        [
            (rec["graph_id"], *[rec.get(c, "") for c in columns])
            for rec in (per_graph[k] for k in sorted(per_graph))
        ],
    )
    _write_manifest(Path(args.out).parent, args, found)
    return 0


# --------------------------------------------------------------- parsing --
#
# Every option is declared with SUPPRESS defaults so the parsed namespace
# only contains what was typed; real values come from merging
# defaults < config file < explicit flags. Global flags are repeated on
# each subparser so they work in either position.

GLOBAL_DEFAULTS = {"config": None, "jobs": 0, "seed": 7}

SUBCOMMAND_DEFAULTS = {
    "curvature": {"graphs": None, "out": None},
    "spectral": {"graphs": None, "out": None, "laplacian": "normalized", "scope": "largest-component"},
    "ma": {"logs": None, "graphs": None, "out": None, "percentile": 95.0,
           "median_scope": "layer_head", "per_graph_cutoff": False, "hops_out": None},
    "enrich": {"ma": None, "bfc": None, "out": None, "binning": "exact", "bin_width": None,
               "logs": None, "graphs": None, "median_scope": "layer_head", "layer_out": None},
    "collapse": {"graphs": None, "logs": None, "out": None, "theta": 1.0, "agg": "mean",
                 "median_scope": "layer_head", "structural_only": False, "laplacian": "normalized"},
    "prune": {"graphs": None, "ma": None, "bfc": None, "set": None, "sets_out": None, "out": None},
    "delta-loss": {"baseline": None, "variants": None, "out": None},
    "gen-barbell": {"variant": "standard", "mode": "topological", "clique_size": 4,
                    "feature_dim": 16, "n_train": 256, "n_test": 26,
                    "dummy_attach": "target", "out_dir": None},
    "report": {"dir": None, "out": None},
}

REQUIRED = {
    "curvature": ["graphs", "out"],
    "spectral": ["graphs", "out"],
    "ma": ["logs", "graphs", "out"],
    "enrich": ["ma", "bfc", "out"],
    "collapse": ["graphs", "logs", "out"],
    "prune": ["graphs", "ma", "bfc", "set", "out"],
    "delta-loss": ["baseline", "variants", "out"],
    "gen-barbell": ["out_dir"],
    "report": ["dir"],
}

COMMANDS = {
    "curvature": cmd_curvature,
    "spectral": cmd_spectral,
    "ma": cmd_ma,
    "enrich": cmd_enrich,
    "collapse": cmd_collapse,
    "prune": cmd_prune,
    "delta-loss": cmd_delta_loss,
    "gen-barbell": cmd_gen_barbell,
    "report": cmd_report,
}


def _add_global_flags(parser) -> None:
    parser.add_argument("--config", default=argparse.SUPPRESS,
                        help="JSON file supplying default values for any flag")
    parser.add_argument("--jobs", type=int, default=argparse.SUPPRESS,
                        help="worker threads for per-graph stages (0 = all cores)")
    parser.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="seed for generation subcommands")


def build_parser() -> _Parser:
    s = argparse.SUPPRESS
    parser = _Parser(prog="curveprobe", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"curveprobe {__version__}")
    _add_global_flags(parser)
    sub = parser.add_subparsers(dest="subcommand", parser_class=_Parser, metavar="SUBCOMMAND")

    def new(name, help_text):
        p = sub.add_parser(name, help=help_text)
        _add_global_flags(p)
        return p

    p = new("curvature", "per-edge curvature for every graph")
    p.add_argument("--graphs", default=s)
    p.add_argument("--out", default=s)

    p = new("spectral", "Laplacian spectral gap per graph")
    p.add_argument("--graphs", default=s)
    p.add_argument("--out", default=s)
    p.add_argument("--laplacian", choices=["normalized", "unnormalized"], default=s)
    p.add_argument("--scope", choices=["largest-component", "support"], default=s)

    p = new("ma", "flag massive activations from attention logs")
    p.add_argument("--logs", default=s)
    p.add_argument("--graphs", default=s)
    p.add_argument("--percentile", type=float, default=s)
    p.add_argument("--median-scope", choices=["layer", "layer_head"], default=s)
    p.add_argument("--per-graph-cutoff", action="store_true", default=s,
                   help="threshold per graph instead of dataset-wide")
    p.add_argument("--hops-out", default=s, help="also write the hop-length histogram of flagged pairs")
    p.add_argument("--out", default=s)

    p = new("enrich", "curvature enrichment of flagged edges")
    p.add_argument("--ma", default=s)
    p.add_argument("--bfc", default=s)
    p.add_argument("--binning", choices=["exact", "width"], default=s)
    p.add_argument("--bin-width", type=float, default=s)
    p.add_argument("--logs", default=s, help="activation logs (needed for --layer-out)")
    p.add_argument("--graphs", default=s, help="graph file (needed for --layer-out)")
    p.add_argument("--median-scope", choices=["layer", "layer_head"], default=s)
    p.add_argument("--layer-out", default=s, help="also write the layer-by-curvature mean ratio table")
    p.add_argument("--out", default=s)

    p = new("collapse", "static vs activation-weighted geometry per graph")
    p.add_argument("--graphs", default=s)
    p.add_argument("--logs", default=s)
    p.add_argument("--theta", type=float, default=s, help="ratio cutoff for effective edges")
    p.add_argument("--agg", choices=["mean", "max"], default=s)
    p.add_argument("--median-scope", choices=["layer", "layer_head"], default=s)
    p.add_argument("--structural-only", action="store_true", default=s,
                   help="ignore logged non-edge pairs")
    p.add_argument("--laplacian", choices=["normalized", "unnormalized"], default=s)
    p.add_argument("--out", default=s)

    p = new("prune", "emit a dataset with one causal set removed")
    p.add_argument("--graphs", default=s)
    p.add_argument("--ma", default=s)
    p.add_argument("--bfc", default=s)
    p.add_argument("--set", choices=["A", "B", "C"], default=s)
    p.add_argument("--sets-out", default=s, help="also write the categorized edge sets")
    p.add_argument("--out", default=s)

    p = new("delta-loss", "loss deltas of pruned variants vs baseline")
    p.add_argument("--baseline", default=s)
    p.add_argument("--variants", nargs="+", default=s)
    p.add_argument("--out", default=s)

    p = new("gen-barbell", "generate barbell benchmark datasets")
    p.add_argument("--variant", choices=["standard", "modified", "extended"], default=s)
    p.add_argument("--mode", choices=["topological", "permuted"], default=s)
    p.add_argument("--clique-size", type=int, default=s)
    p.add_argument("--feature-dim", type=int, default=s)
    p.add_argument("--n-train", type=int, default=s)
    p.add_argument("--n-test", type=int, default=s)
    p.add_argument("--dummy-attach", choices=["target", "clique"], default=s)
    p.add_argument("--out-dir", default=s)

    p = new("report", "consolidate pipeline outputs by graph_id")
    p.add_argument("--dir", default=s)
    p.add_argument("--out", default=s)

    return parser


def _load_config(argv) -> dict:
    if "--config" not in argv:
        return {}
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        return {}
    config_path = argv[idx + 1]
    try:
        with open(config_path, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"config file not found: {config_path}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{config_path}: malformed JSON ({exc.msg})") from None
    if not isinstance(config, dict):
        raise ValidationError(f"{config_path}: config must be a JSON object")
    known = set(GLOBAL_DEFAULTS)
    for defaults in SUBCOMMAND_DEFAULTS.values():
        known |= set(defaults)
    out = {}
    for key, value in config.items():
        dest = key.replace("-", "_")
        if dest not in known:
            raise ValidationError(f"{config_path}: unknown config key {key!r}")
        out[dest] = value
    return out


def parse_args(argv) -> argparse.Namespace:
    parser = build_parser()
    provided = vars(parser.parse_args(argv))
    subcommand = provided.pop("subcommand", None)
    if subcommand is None:
        parser.print_usage(sys.stderr)
        sys.exit(USAGE_EXIT)
    merged = dict(GLOBAL_DEFAULTS)
    merged.update(SUBCOMMAND_DEFAULTS[subcommand])
    merged.update(_load_config(argv))
    merged.update(provided)
    missing = [d for d in REQUIRED[subcommand] if merged.get(d) is None]
    if missing:
        flags = ", ".join("--" + d.replace("_", "-") for d in missing)
        print(f"curveprobe {subcommand}: error: the following arguments are required: {flags}",
              file=sys.stderr)
        sys.exit(USAGE_EXIT)
    args = argparse.Namespace(**merged)
    args.subcommand = subcommand
    args.func = COMMANDS[subcommand]
    args.argv = list(argv)
    return args


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
        return args.func(args)
    except ValidationError as exc:
        print(f"curveprobe: error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"curveprobe: error: input file not found: {exc.filename}", file=sys.stderr)
        return 1
    except CapabilityError as exc:
        print(f"curveprobe: capability error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
