import numpy as np
import pytest

from conftest import make_graph, random_graph
from congestion_engine.network import HistoryGraph
from congestion_engine.ranking import (
    RankingConfig,
    RankingError,
    edge_frequencies,
    line_graph_matrix,
    rank_edges,
    rank_edges_by_entry,
    reachable_links,
    to_csv,
)
from oracles import dense_edge_ranks


def test_two_cycle_ranks_are_one():
    r = rank_edges(make_graph([("a", "b"), ("b", "a")]))
    assert r[("a", "b")] == pytest.approx(1.0, abs=1e-9)
    assert r[("b", "a")] == pytest.approx(1.0, abs=1e-9)


def test_isolated_edge():
    r = rank_edges(make_graph([("a", "b")]))
    assert r[("a", "b")] == pytest.approx(0.07, abs=1e-12)


def test_chain_hand_solution():
    r = rank_edges(make_graph([("a", "b"), ("b", "c")]))
    assert r[("a", "b")] == pytest.approx(0.07, abs=1e-12)
    assert r[("b", "c")] == pytest.approx(0.07 + 0.93 * 0.07, abs=1e-12)
    assert r[("b", "c")] == pytest.approx(0.1351, abs=1e-12)


def test_matches_dense_solve(rng):
    for _ in range(30):
        g = random_graph(rng, int(rng.integers(3, 12)), int(rng.integers(2, 40)))
        d = float(rng.uniform(0.5, 0.97))
        got = rank_edges(g, RankingConfig(damping=d))
        ref = dense_edge_ranks(g.link_keys(), d)
        assert max(abs(got[k] - ref[k]) for k in ref) <= 1e-9


def test_ranks_bounded_below(rng):
    for _ in range(20):
        g = random_graph(rng, 8, 20)
        r = rank_edges(g)
        assert min(r.values()) >= 0.07 - 1e-12
        assert set(r) == set(g.link_keys())


@pytest.mark.parametrize("n", [2, 3, 7, 20])
def test_ring_is_uniform(n):
    g = make_graph([(i, (i + 1) % n) for i in range(n)])
    vals = np.array(list(rank_edges(g).values()))
    assert np.ptp(vals) == 0.0


def test_line_graph_matrix_columns():
    g = make_graph([("a", "b"), ("b", "c"), ("b", "d")])
    mat, keys = line_graph_matrix(g)
    dense = mat.toarray()
    j = keys.index(("a", "b"))
    assert dense[:, j].sum() == pytest.approx(1.0)
    assert dense[keys.index(("b", "c")), j] == 0.5
    raw, _ = line_graph_matrix(g, normalize=False)
    assert raw.toarray()[keys.index(("b", "c")), j] == 1.0


def test_literal_mode_diverges_on_dense_graph():
    nodes = range(5)
    g = make_graph([(a, b) for a in nodes for b in nodes if a != b])
    with pytest.raises(RankingError, match="diverged") as info:
        rank_edges(g, RankingConfig(normalize=False))
    assert info.value.iterations > 0


def test_literal_mode_on_chain_matches_normalized():
    g = make_graph([("a", "b"), ("b", "c"), ("c", "d")])
    assert rank_edges(g, RankingConfig(normalize=False)) == pytest.approx(rank_edges(g))


def test_non_convergence_reports_residual():
    g = make_graph([("a", "b"), ("b", "c"), ("c", "d")])
    with pytest.raises(RankingError) as info:
        rank_edges(g, RankingConfig(damping=0.99, tolerance=1e-15, max_iterations=3))
    assert info.value.iterations == 3


def test_config_validation():
    for d in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            RankingConfig(damping=d)


def test_rank_by_entry_restricts_to_reachable():
    g = make_graph([("a", "b"), ("b", "c"), ("x", "y")])
    assert reachable_links(g, ("a", "b")) == [("a", "b"), ("b", "c")]
    parts = rank_edges_by_entry(g, [("a", "b"), ("x", "y")])
    assert set(parts[("a", "b")]) == {("a", "b"), ("b", "c")}
    assert parts[("x", "y")] == {("x", "y"): pytest.approx(0.07)}


def test_frequency_examples():
    g = make_graph([("p", "l"), ("l", "m"), ("q", "l")])
    h = HistoryGraph("v", g, {("p", "l"): 6, ("l", "m"): 3})
    assert edge_frequencies(h, g)[("l", "m")] == 0.5
    h = HistoryGraph("v", g, {("p", "l"): 4, ("q", "l"): 4, ("l", "m"): 4})
    assert edge_frequencies(h, g)[("l", "m")] == 0.5


def test_frequency_zero_denominator():
    g = make_graph([("p", "l"), ("l", "m")])
    h = HistoryGraph("v", g, {("l", "m"): 2})
    f = edge_frequencies(h, g)
    assert f[("l", "m")] == 0.0
    assert ("p", "l") not in f


def test_frequency_capped_when_trips_start_mid_route():
    g = make_graph([("p", "l"), ("l", "m")])
    h = HistoryGraph("v", g, {("p", "l"): 1, ("l", "m"): 3})
    assert edge_frequencies(h, g)[("l", "m")] == 1.0


def test_frequencies_in_unit_interval(rng):
    for _ in range(20):
        g = random_graph(rng, 6, 14)
        keys = g.link_keys()
        weights = {keys[i]: int(w) for i, w in enumerate(rng.integers(0, 5, len(keys))) if w}
        h = HistoryGraph("v", g, weights)
        f = edge_frequencies(h, g)
        assert all(0.0 <= v <= 1.0 for v in f.values())
        for k, v in f.items():
            denom = sum(weights.get(p, 0) for p in g.in_neighbors(k))
            assert (v == 0) == (denom == 0)


def test_csv_dump():
    text = to_csv({("b", "c"): 0.5, ("a", "b"): 0.25}, "rank")
    assert text.splitlines() == ["link_from,link_to,rank", "a,b,0.25", "b,c,0.5"]
