import json

import numpy as np
import pytest

from curveprobe import ValidationError, load_graphs, make_graph, save_graphs
from curveprobe.graph import dump_graphs, graph_from_record, graph_to_record


def test_load_triangle(tmp_path):
    path = tmp_path / "g.jsonl"
    path.write_text('{"graph_id":"t","num_nodes":3,"edges":[[0,1],[0,2],[1,2]]}\n')
    graphs = load_graphs(path)
    assert len(graphs) == 1
    g = graphs[0]
    assert g.num_nodes == 3
    assert g.edges == ((0, 1), (0, 2), (1, 2))


def test_out_of_range_edge_names_offender(tmp_path):
    path = tmp_path / "g.jsonl"
    path.write_text('{"graph_id":"bad","num_nodes":4,"edges":[[0,1],[2,5]]}\n')
    with pytest.raises(ValidationError, match=r"\[2, 5\]"):
        load_graphs(path)


def test_malformed_line_reports_line_number(tmp_path):
    path = tmp_path / "g.jsonl"
    path.write_text('{"graph_id":"ok","num_nodes":1,"edges":[]}\n{oops\n')
    with pytest.raises(ValidationError, match=":2:"):
        load_graphs(path)


def test_duplicate_and_self_loop_rejected():
    with pytest.raises(ValidationError, match="duplicate"):
        make_graph("d", 3, [[0, 1], [1, 0]])
    with pytest.raises(ValidationError, match="self-loop"):
        make_graph("s", 3, [[1, 1]])


def test_edge_canonicalization_keeps_feature_alignment():
    g = make_graph("f", 4, [[3, 2], [0, 1]], edge_features=[7, 9])
    assert g.edges == ((0, 1), (2, 3))
    assert g.edge_features == (9, 7)


def test_edge_feature_length_mismatch():
    with pytest.raises(ValidationError, match="edge_features"):
        make_graph("f", 3, [[0, 1]], edge_features=[1, 2])


def test_round_trip_byte_equivalent(tmp_path):
    rec = {
        "graph_id": "rt",
        "num_nodes": 4,
        "edges": [[2, 0], [0, 1], [1, 3]],
        "node_features": [[0.1, -2.5], [0.0, 0.0], [1.0, 3.75], [0.25, 0.5]],
        "edge_features": [0, 1, 2],
        "roles": {"source": 0, "target": 3, "dummy_sources": []},
        "y": [0.1, -2.5],
        "custom_tag": {"anything": [1, 2]},
    }
    path = tmp_path / "g.jsonl"
    path.write_text(json.dumps(rec) + "\n")
    once = dump_graphs(load_graphs(path))
    (tmp_path / "h.jsonl").write_text(once)
    twice = dump_graphs(load_graphs(tmp_path / "h.jsonl"))
    assert once == twice
    # unknown keys survive
    assert "custom_tag" in json.loads(once)


def test_degree_sum_is_twice_edges():
    rng = np.random.default_rng(7)
    for _ in range(20):
        n = int(rng.integers(2, 12))
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.4]
        g = make_graph("r", n, pairs)
        assert sum(g.degree(i) for i in range(n)) == 2 * g.num_edges


def test_degree_cases():
    k4 = make_graph("k4", 4, [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]])
    assert k4.degree(2) == 3
    iso = make_graph("iso", 3, [[0, 1]])
    assert iso.degree(2) == 0
    with pytest.raises(ValidationError):
        iso.degree(3)


def test_hop_distance_basics():
    path4 = make_graph("p", 4, [[0, 1], [1, 2], [2, 3]])
    assert path4.hop_distance(2, 2) == 0
    assert path4.hop_distance(0, 3) == 3
    two_tris = make_graph("tt", 6, [[0, 1], [0, 2], [1, 2], [3, 4], [3, 5], [4, 5]])
    assert two_tris.hop_distance(0, 4) is None


def test_hop_distance_symmetric_and_triangle_inequality():
    rng = np.random.default_rng(11)
    for _ in range(10):
        n = int(rng.integers(3, 10))
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.5]
        g = make_graph("r", n, pairs)
        dist = {(i, j): g.hop_distance(i, j) for i in range(n) for j in range(n)}
        for i in range(n):
            for j in range(n):
                assert dist[(i, j)] == dist[(j, i)]
                for k in range(n):
                    a, b, c = dist[(i, j)], dist[(i, k)], dist[(k, j)]
                    if a is not None and b is not None and c is not None:
                        assert a <= b + c


def test_graph_record_rejects_missing_keys():
    with pytest.raises(ValidationError, match="graph_id"):
        graph_from_record({"num_nodes": 1, "edges": []})


def test_record_key_order_fixed():
    g = make_graph("k", 2, [[0, 1]], extra={"zzz": 1, "aaa": 2})
    keys = list(graph_to_record(g).keys())
    assert keys == ["graph_id", "num_nodes", "edges", "aaa", "zzz"]


def test_save_and_reload(tmp_path):
    g = make_graph("s", 3, [[0, 2], [0, 1]], node_features=np.eye(3))
    save_graphs([g], tmp_path / "out.jsonl")
    back = load_graphs(tmp_path / "out.jsonl")[0]
    assert back.edges == g.edges
    assert np.array_equal(back.node_features, g.node_features)
