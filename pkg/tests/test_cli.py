import json
import subprocess
import sys

import numpy as np
import pytest

from curveprobe.activation import make_activation_log, save_activation_logs
from curveprobe.cli import main
from curveprobe.graph import load_graphs


def run_cli(*argv):
    return main(list(argv))


def synth_logs(graph_path, log_path, seed=0, layers=3):
    rng = np.random.default_rng(seed)
    logs = []
    for g in load_graphs(graph_path):
        records = []
        for layer in range(layers):
            for i, j in g.edges:
                records.append((layer, 0, i, j, float(rng.uniform(0.01, 1.0))))
                records.append((layer, 0, j, i, float(rng.uniform(0.01, 1.0))))
            for v in range(g.num_nodes):
                records.append((layer, 0, v, v, float(rng.uniform(0.01, 1.0))))
        logs.append(make_activation_log(g.graph_id, "toy", records))
    save_activation_logs(logs, log_path)


@pytest.fixture()
def pipeline(tmp_path):
    data = tmp_path / "data"
    assert run_cli("gen-barbell", "--variant", "standard", "--n-train", "4", "--n-test", "6",
                   "--seed", "7", "--out-dir", str(data)) == 0
    logs = tmp_path / "acts.jsonl"
    synth_logs(data / "test.jsonl", logs)
    return tmp_path, data, logs


def test_gen_barbell_outputs_and_manifest(pipeline):
    tmp_path, data, _ = pipeline
    train = load_graphs(data / "train.jsonl")
    test = load_graphs(data / "test.jsonl")
    assert len(train) == 4 and len(test) == 6
    assert all(g.num_nodes == 8 and g.num_edges == 13 for g in train)
    manifest = json.loads((data / "manifest.json").read_text())
    assert manifest["tool"] == "curveprobe"
    assert "gen-barbell" in manifest["command_line"]


def test_gen_barbell_deterministic(tmp_path):
    for name in ("a", "b"):
        assert run_cli("gen-barbell", "--n-train", "3", "--n-test", "2", "--seed", "11",
                       "--out-dir", str(tmp_path / name)) == 0
    assert (tmp_path / "a" / "train.jsonl").read_bytes() == (tmp_path / "b" / "train.jsonl").read_bytes()
    assert (tmp_path / "a" / "test.jsonl").read_bytes() == (tmp_path / "b" / "test.jsonl").read_bytes()


def test_curvature_subcommand(pipeline):
    tmp_path, data, _ = pipeline
    out = tmp_path / "bfc.jsonl"
    assert run_cli("curvature", "--graphs", str(data / "test.jsonl"), "--out", str(out)) == 0
    records = [json.loads(line) for line in out.read_text().splitlines()]
    assert len(records) == 6
    for rec in records:
        negatives = [v for v in rec["bfc"] if v < 0]
        assert negatives == [-1.0]
        assert rec["negative_fraction"] == pytest.approx(1 / 13)
    assert (tmp_path / "bfc.csv").exists()


def test_spectral_subcommand(pipeline):
    tmp_path, data, _ = pipeline
    out = tmp_path / "spectral.jsonl"
    assert run_cli("spectral", "--graphs", str(data / "test.jsonl"), "--out", str(out)) == 0
    records = [json.loads(line) for line in out.read_text().splitlines()]
    assert all(r["spectral_gap"] > 0 for r in records)


def test_ma_enrich_collapse_prune_deltaloss_report(pipeline):
    tmp_path, data, logs = pipeline
    graphs = str(data / "test.jsonl")
    out_dir = tmp_path / "out"
    out_dir.mkdir()
    bfc = out_dir / "bfc.jsonl"
    ma = out_dir / "ma.jsonl"
    assert run_cli("curvature", "--graphs", graphs, "--out", str(bfc)) == 0
    assert run_cli("ma", "--logs", str(logs), "--graphs", graphs, "--percentile", "90",
                   "--hops-out", str(out_dir / "hops.json"), "--out", str(ma)) == 0
    reports = [json.loads(line) for line in ma.read_text().splitlines()]
    flagged = [e for r in reports for e in r["entries"] if e["flagged"]]
    assert flagged, "something must be flagged at the 90th percentile"
    hops = json.loads((out_dir / "hops.json").read_text())
    assert sum(hops.values()) == len(flagged)

    enrich_out = out_dir / "enrich.json"
    assert run_cli("enrich", "--ma", str(ma), "--bfc", str(bfc), "--binning", "exact",
                   "--logs", str(logs), "--graphs", graphs,
                   "--layer-out", str(out_dir / "layers.json"), "--out", str(enrich_out)) == 0
    table = json.loads(enrich_out.read_text())
    conserved = sum(e["enrichment"] * e["base_prob"] for e in table["entries"] if e["enrichment"] is not None)
    assert conserved == pytest.approx(1.0, abs=1e-9)
    layers = json.loads((out_dir / "layers.json").read_text())
    assert {row["layer"] for row in layers} <= {0, 1, 2}

    collapse_out = out_dir / "collapse.jsonl"
    assert run_cli("collapse", "--graphs", graphs, "--logs", str(logs), "--theta", "0.5",
                   "--out", str(collapse_out)) == 0
    lines = [json.loads(line) for line in collapse_out.read_text().splitlines()]
    assert lines[-1]["dataset_aggregate"] is True
    assert len(lines) == 7

    pruned_out = out_dir / "pruned.jsonl"
    assert run_cli("prune", "--graphs", graphs, "--ma", str(ma), "--bfc", str(bfc),
                   "--set", "C", "--sets-out", str(out_dir / "sets.json"), "--out", str(pruned_out)) == 0
    sets = json.loads((out_dir / "sets.json").read_text())
    pruned = load_graphs(pruned_out)
    assert all(g.graph_id.endswith("__prune_C") for g in pruned)
    assert sum(g.num_edges for g in pruned) == 6 * 13 - len(sets["set_c"])

    base = out_dir / "base.json"
    variant = out_dir / "pa.json"
    base.write_text(json.dumps({"variant": "baseline", "loss": 0.51}))
    variant.write_text(json.dumps({"variant": "prune_A", "loss": 0.6224}))
    dl = out_dir / "delta.json"
    assert run_cli("delta-loss", "--baseline", str(base), "--variants", str(variant), "--out", str(dl)) == 0
    assert json.loads(dl.read_text())["variants"]["prune_A"]["delta_loss"] == 0.1124

    assert run_cli("report", "--dir", str(out_dir)) == 0
    report = json.loads((out_dir / "report.json").read_text())
    assert len(report["graphs"]) == 6
    assert report["enrichment"]["total_edges"] == table["total_edges"]
    assert report["collapse_aggregate"]["num_graphs"] == 6


def test_ma_determinism(pipeline):
    tmp_path, data, logs = pipeline
    graphs = str(data / "test.jsonl")
    for name in ("m1.jsonl", "m2.jsonl"):
        assert run_cli("ma", "--logs", str(logs), "--graphs", graphs, "--out", str(tmp_path / name)) == 0
    assert (tmp_path / "m1.jsonl").read_bytes() == (tmp_path / "m2.jsonl").read_bytes()


def test_config_file_merging(tmp_path):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"variant": "extended", "n-train": 2, "n_test": 3}))
    out = tmp_path / "gen"
    assert run_cli("--config", str(config), "gen-barbell", "--out-dir", str(out)) == 0
    assert len(load_graphs(out / "train.jsonl")) == 2
    assert len(load_graphs(out / "test.jsonl")) == 3
    assert load_graphs(out / "train.jsonl")[0].num_nodes == 20  # extended

    # explicit flag beats the config value
    out2 = tmp_path / "gen2"
    assert run_cli("--config", str(config), "gen-barbell", "--variant", "standard",
                   "--out-dir", str(out2)) == 0
    assert load_graphs(out2 / "train.jsonl")[0].num_nodes == 8


def test_config_unknown_key(tmp_path, capsys):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"not_a_flag": 1}))
    assert run_cli("--config", str(config), "gen-barbell", "--out-dir", str(tmp_path / "x")) == 1
    assert "unknown config key" in capsys.readouterr().err


def test_exit_codes(tmp_path, capsys):
    # unknown flag -> 64
    with pytest.raises(SystemExit) as exc:
        run_cli("curvature", "--bogus")
    assert exc.value.code == 64
    # no subcommand -> 64
    with pytest.raises(SystemExit) as exc:
        run_cli()
    assert exc.value.code == 64
    # missing input file -> 1 with the path in the message
    assert run_cli("curvature", "--graphs", str(tmp_path / "nope.jsonl"), "--out", str(tmp_path / "o")) == 1
    assert "nope.jsonl" in capsys.readouterr().err
    # validation error in the input -> 1
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"graph_id":"x","num_nodes":2,"edges":[[0,5]]}\n')
    assert run_cli("curvature", "--graphs", str(bad), "--out", str(tmp_path / "o")) == 1
    # capability error -> 2
    big = tmp_path / "big.jsonl"
    edges = [[i, i + 1] for i in range(2500)]
    big.write_text(json.dumps({"graph_id": "chain", "num_nodes": 2501, "edges": edges}) + "\n")
    assert run_cli("spectral", "--graphs", str(big), "--out", str(tmp_path / "s")) == 2


def test_console_script_version():
    proc = subprocess.run([sys.executable, "-m", "curveprobe.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "curveprobe" in proc.stdout
