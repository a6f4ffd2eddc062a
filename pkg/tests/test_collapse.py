import math

import numpy as np
import pytest

from curveprobe import CapabilityError, ValidationError, make_graph
from curveprobe.activation import make_activation_log
from curveprobe.collapse import build_activation_graph, curvature_shift, spectral_gap


def complete_graph(n, name="k"):
    return make_graph(name, n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def cycle_graph(n, name="c"):
    return make_graph(name, n, [(i, (i + 1) % n) for i in range(n)])


def uniform_log(g, layers=2, include_self=True, weight=0.5):
    records = []
    for layer in range(layers):
        for i, j in g.edges:
            records.append((layer, 0, i, j, weight))
            records.append((layer, 0, j, i, weight))
        if include_self:
            for v in range(g.num_nodes):
                records.append((layer, 0, v, v, weight))
    return make_activation_log(g.graph_id, "toy", records)


def test_identity_threshold_recovers_static_graph():
    g = complete_graph(5)
    ag = build_activation_graph(g, uniform_log(g), aggregation="mean", threshold=1.0)
    assert ag.effective_edges == g.edges
    assert all(w == 1.0 for w in ag.effective_weights)


def test_infinite_threshold_empties_edge_set():
    g = complete_graph(4)
    ag = build_activation_graph(g, uniform_log(g), threshold=math.inf)
    assert ag.effective_edges == ()


def test_zero_threshold_adds_logged_non_edge():
    g = make_graph("p", 4, [[0, 1], [1, 2], [2, 3]])
    records = [(0, 0, i, j, 0.5) for i, j in g.edges] + [(0, 0, j, i, 0.5) for i, j in g.edges]
    records.append((0, 0, 0, 3, 0.5))  # global attention onto a non-edge
    log = make_activation_log("p", "toy", records)
    ag = build_activation_graph(g, log, threshold=0.0)
    assert (0, 3) in ag.effective_edges
    only_structural = build_activation_graph(g, log, threshold=0.0, structural_only=True)
    assert (0, 3) not in only_structural.effective_edges


def test_threshold_monotonicity():
    rng = np.random.default_rng(6)
    g = complete_graph(6)
    records = []
    for layer in range(2):
        for i, j in g.edges:
            records.append((layer, 0, i, j, float(rng.uniform(0.01, 1))))
            records.append((layer, 0, j, i, float(rng.uniform(0.01, 1))))
    log = make_activation_log(g.graph_id, "toy", records)
    thresholds = [0.0, 0.5, 1.0, 1.5, 2.0]
    sets = [set(build_activation_graph(g, log, threshold=t).effective_edges) for t in thresholds]
    for smaller, larger in zip(sets[1:], sets):
        assert smaller <= larger


def test_direction_symmetrization_averages():
    g = make_graph("e", 2, [[0, 1]])
    # ratios: forward 1.5, backward 0.5 (median of |weights| = 1.0)
    log = make_activation_log("e", "toy", [(0, 0, 0, 1, 1.5), (0, 0, 1, 0, 0.5)])
    ag = build_activation_graph(g, log, threshold=0.0)
    assert dict(((i, j), w) for i, j, w in ag.pairs)[(0, 1)] == pytest.approx(1.0)


def test_max_aggregation():
    g = make_graph("e", 2, [[0, 1]])
    records = [(0, 0, 0, 1, 1.0), (1, 0, 0, 1, 3.0), (0, 0, 1, 0, 1.0), (1, 0, 1, 0, 1.0)]
    log = make_activation_log("e", "toy", records)
    # per-layer medians are 1.0 and 2.0, so ratios fwd = [1.0, 1.5], bwd = [1.0, 0.5]
    mean_ag = build_activation_graph(g, log, aggregation="mean", threshold=0.0)
    max_ag = build_activation_graph(g, log, aggregation="max", threshold=0.0)
    assert dict(((i, j), w) for i, j, w in mean_ag.pairs)[(0, 1)] == pytest.approx((1.25 + 0.75) / 2)
    assert dict(((i, j), w) for i, j, w in max_ag.pairs)[(0, 1)] == pytest.approx((1.5 + 1.0) / 2)


def test_mismatched_graph_id():
    g = complete_graph(3, "a")
    log = uniform_log(complete_graph(3, "b"))
    with pytest.raises(ValidationError, match="does not match"):
        build_activation_graph(g, log)


def test_spectral_gap_complete_graphs():
    for n in range(3, 13):
        g = complete_graph(n)
        assert spectral_gap(g.edges, n) == pytest.approx(n / (n - 1), abs=1e-9)


def test_spectral_gap_cycles():
    for n in (3, 4, 5, 8, 12):
        g = cycle_graph(n)
        assert spectral_gap(g.edges, n) == pytest.approx(1 - math.cos(2 * math.pi / n), abs=1e-9)


def test_spectral_gap_disconnected_is_zero():
    edges = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]
    assert spectral_gap(edges, 6, largest_component=False) == pytest.approx(0.0, abs=1e-12)
    # largest-component mode analyzes one triangle instead
    assert spectral_gap(edges, 6, largest_component=True) == pytest.approx(1.5, abs=1e-9)


def test_spectral_gap_unnormalized():
    # unnormalized Laplacian of K_n has lambda_2 = n
    g = complete_graph(5)
    assert spectral_gap(g.edges, 5, normalized=False) == pytest.approx(5.0, abs=1e-9)


def test_spectral_gap_permutation_invariance():
    rng = np.random.default_rng(13)
    base = [(i, j) for i in range(8) for j in range(i + 1, 8) if rng.random() < 0.5]
    perm = rng.permutation(8)
    relabeled = [(int(perm[i]), int(perm[j])) for i, j in base]
    assert spectral_gap(base, 8) == pytest.approx(spectral_gap(relabeled, 8), abs=1e-9)


def test_spectral_gap_errors():
    with pytest.raises(ValidationError, match="nonempty"):
        spectral_gap([], 4)
    with pytest.raises(CapabilityError, match="dense eigensolver"):
        spectral_gap([(i, i + 1) for i in range(3000)], 3001)


def test_collapse_identity_case():
    g = complete_graph(6)
    report = curvature_shift(g, build_activation_graph(g, uniform_log(g), threshold=1.0))
    assert report.activation_summary.weighted_mean == report.static_summary.weighted_mean
    assert report.activation_negative_fraction == report.static_negative_fraction
    assert report.activation_spectral_gap == report.static_spectral_gap


def test_collapse_detects_shift_on_pruned_clique_edge():
    # barbell with cliques of 4, bridge (3, 4)
    k = 4
    edges = [(i, j) for i in range(k) for j in range(i + 1, k)]
    edges += [(k + i, k + j) for i in range(k) for j in range(i + 1, k)]
    edges.append((k - 1, k))
    g = make_graph("bb", 2 * k, edges)
    dropped = (2, 3)  # clique edge adjacent to the bridge node
    kept = [e for e in g.edges if e != dropped]
    records = []
    for i, j in kept:
        records.append((0, 0, i, j, 0.5))
        records.append((0, 0, j, i, 0.5))
    log = make_activation_log("bb", "toy", records)
    ag = build_activation_graph(g, log, threshold=1.0)
    assert set(ag.effective_edges) == set(kept)
    report = curvature_shift(g, ag)
    # bridge on the pruned graph, recomputed independently by the oracle
    from curveprobe.curvature import bfc_bruteforce

    pruned = make_graph("bb2", 2 * k, kept)
    expected_bridge = bfc_bruteforce(pruned, (3, 4))
    got = dict(report.activation_summary.per_edge)[(3, 4)]
    assert got == expected_bridge
    assert got != dict(report.static_summary.per_edge)[(3, 4)]


def test_collapse_empty_effective_set_error():
    g = complete_graph(4)
    ag = build_activation_graph(g, uniform_log(g), threshold=math.inf)
    with pytest.raises(ValidationError, match="empty"):
        curvature_shift(g, ag)
