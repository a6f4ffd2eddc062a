import math

import numpy as np
import pytest

from curveprobe import ValidationError, make_graph
from curveprobe.stats import (
    correlate,
    edge_values_from_reports,
    enrichment,
    entropy_curvature_pairs,
    layer_evolution,
    node_min_bfc,
)


def test_enrichment_all_edges_flagged_is_identity():
    values = [(-1.0, True), (-1.0, True), (0.5, True), (0.5, True), (1.0, True)]
    table = enrichment(values)
    for entry in table.entries:
        assert entry.enrichment == pytest.approx(1.0)


def test_enrichment_concentrated():
    # base_prob(c0) = 0.25, every MA sits at c0
    values = [(0.0, False)] * 6 + [(-0.5, True), (-0.5, True)] + [(1.0, False), (2.0, False)]
    assert sum(1 for v, _ in values if v == -0.5) / len(values) == 0.2
    table = enrichment(values)
    by_value = {e.curvature_value: e for e in table.entries}
    assert by_value[-0.5].enrichment == pytest.approx(5.0)  # 1.0 / 0.2
    assert by_value[0.0].enrichment == 0.0
    assert by_value[1.0].enrichment == 0.0


def test_enrichment_zero_ma_warning():
    table = enrichment([(0.0, False), (1.0, False)])
    assert table.no_ma_warning
    assert table.total_ma_edges == 0
    assert all(e.ma_prob == 0.0 for e in table.entries)
    assert all(e.enrichment == 0.0 for e in table.entries)


def test_enrichment_probability_normalization():
    rng = np.random.default_rng(4)
    values = [(float(rng.choice([-1.0, -0.5, 0.0, 0.5])), bool(rng.random() < 0.3)) for _ in range(500)]
    table = enrichment(values)
    assert sum(e.base_prob for e in table.entries) == pytest.approx(1.0, abs=1e-12)
    assert sum(e.ma_prob for e in table.entries) == pytest.approx(1.0, abs=1e-12)


def test_enrichment_conservation():
    rng = np.random.default_rng(44)
    for _ in range(5):
        values = [(float(rng.choice([-2.0, -1.0, 0.0, 1.0, 4 / 3])), bool(rng.random() < 0.2)) for _ in range(300)]
        if not any(f for _, f in values):
            continue
        table = enrichment(values)
        total = sum(e.enrichment * e.base_prob for e in table.entries if e.enrichment is not None)
        assert total == pytest.approx(1.0, abs=1e-9)


def test_enrichment_duplication_invariance():
    values = [(-1.0, True), (0.0, False), (0.0, False), (1.0, True)]
    once = enrichment(values)
    twice = enrichment(values * 2)
    assert [(e.curvature_value, e.base_prob, e.ma_prob, e.enrichment) for e in once.entries] == [
        (e.curvature_value, e.base_prob, e.ma_prob, e.enrichment) for e in twice.entries
    ]


def test_enrichment_exact_binning_absorbs_float_noise():
    table = enrichment([(1 / 3, True), (0.334, False)])            # differ before 1e-9: split
    assert len(table.entries) == 2
    table = enrichment([(1 / 3, True), (1 / 3 + 1e-13, False)])    # within 1e-9: same bin
    assert len(table.entries) == 1


def test_enrichment_width_binning():
    values = [(-0.6, True), (-0.5, False), (0.4, False), (0.9, True)]
    table = enrichment(values, binning="width", bin_width=0.5)
    keys = [e.curvature_value for e in table.entries]
    assert keys == [-1.0, -0.5, 0.0, 0.5]
    with pytest.raises(ValidationError, match="bin_width"):
        enrichment(values, binning="width")


def test_enrichment_empty_error():
    with pytest.raises(ValidationError):
        enrichment([])


def test_layer_evolution_singleton_and_mean():
    samples = [
        (0, -1.0, 10.0), (1, -1.0, 2.0), (2, -1.0, 1.0),   # one edge across 3 layers
        (0, 0.5, 4.0), (0, 0.5, 6.0),                       # two edges in one bin at layer 0
    ]
    rows = layer_evolution(samples)
    table = {(layer, value): (mean, count) for layer, value, mean, count in rows}
    assert table[(0, -1.0)] == (10.0, 1)
    assert table[(1, -1.0)] == (2.0, 1)
    assert table[(2, -1.0)] == (1.0, 1)
    assert table[(0, 0.5)] == (5.0, 2)
    assert (0, 123.0) not in table  # empty bins are absent, never zero-filled


def test_correlate_exact_line():
    xs = [0.0, 1.0, 2.0, 3.0]
    r, slope, intercept = correlate(xs, [2 * x + 1 for x in xs])
    assert r == pytest.approx(1.0, abs=1e-12)
    assert slope == pytest.approx(2.0, abs=1e-12)
    assert intercept == pytest.approx(1.0, abs=1e-12)


def test_correlate_constant_response():
    r, slope, _ = correlate([1.0, 2.0, 3.0], [5.0, 5.0, 5.0])
    assert r == 0.0 and slope == 0.0


def test_correlate_anticorrelation():
    xs = [0.0, 1.0, 2.0]
    r, slope, _ = correlate(xs, [-x for x in xs])
    assert r == pytest.approx(-1.0, abs=1e-12)
    assert slope == pytest.approx(-1.0, abs=1e-12)


def test_correlate_recovers_planted_coefficients():
    rng = np.random.default_rng(0)
    xs = rng.normal(size=200)
    ys = -1.662 * xs + 0.25
    r, slope, intercept = correlate(xs, ys)
    assert slope == pytest.approx(-1.662, abs=1e-9)
    assert intercept == pytest.approx(0.25, abs=1e-9)
    assert r == pytest.approx(-1.0, abs=1e-9)


def test_correlate_degenerate_x():
    with pytest.raises(ValidationError, match="degenerate"):
        correlate([2.0, 2.0, 2.0], [1.0, 2.0, 3.0])
    with pytest.raises(ValidationError):
        correlate([1.0, 2.0], [1.0, 2.0])


def test_node_min_bfc():
    # path of 4: end edges have bfc 1, middle edge 0
    g = make_graph("p", 4, [[0, 1], [1, 2], [2, 3]])
    curv = node_min_bfc(g)
    assert curv[0] == 1.0
    assert curv[1] == 0.0  # min(1, 0)
    assert curv[2] == 0.0


def test_entropy_curvature_pairs():
    from curveprobe.activation import make_activation_log

    g = make_graph("p", 4, [[0, 1], [1, 2], [2, 3]])
    log = make_activation_log("p", "toy", [(0, 0, 1, 0, 0.5), (0, 0, 1, 2, 0.5)])
    pairs = entropy_curvature_pairs(log, g)
    assert pairs == [(0.0, pytest.approx(math.log(2)))]


def test_edge_values_join_skips_non_edges():
    from curveprobe.activation import flag_massive, make_activation_log
    from curveprobe.curvature import bfc_all

    g = make_graph("t", 4, [[0, 1], [1, 2], [2, 3], [0, 3]])
    records = [(0, 0, 0, 1, 0.9), (0, 0, 0, 2, 0.5), (0, 0, 1, 2, 0.1)]  # (0,2) is a non-edge
    log = make_activation_log("t", "toy", records)
    reports = flag_massive([log], {"t": g}, percentile=50.0)
    values = edge_values_from_reports(reports, {"t": dict(bfc_all(g))})
    assert len(values) == 2  # (0,1) and (1,2) only
    with pytest.raises(ValidationError, match="no curvature data"):
        edge_values_from_reports(reports, {})
