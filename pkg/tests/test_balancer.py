import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_graph
from congestion_engine.balancer import (
    AlternativeSet,
    alternative_occupancies,
    balance,
    k_shortest_alternatives,
)
from oracles import balance_fraction

OBS = ("j", "a")


def alts(n):
    return AlternativeSet(OBS, tuple(("j", f"x{i}") for i in range(n)))


@pytest.mark.parametrize("x, p", [
    ((10, 10), (0.5, 0.5)),
    ((1, 2, 3), (6 / 11, 3 / 11, 2 / 11)),
    ((0, 5), (1.0, 0.0)),
    ((0, 0, 7), (0.5, 0.5, 0.0)),
])
def test_balance_examples(x, p):
    got = balance(alts(len(x)), x, tick=4)
    assert got.probabilities == pytest.approx(p, abs=1e-15)
    assert got.tick == 4


occupancy_vectors = st.lists(st.integers(0, 60), min_size=1, max_size=8)


@settings(max_examples=300, deadline=None)
@given(occupancy_vectors)
def test_balance_is_a_distribution(x):
    p = balance(alts(len(x)), x).probabilities
    assert all(v >= 0 for v in p)
    assert abs(sum(p) - 1.0) <= 1e-12
    ref = balance_fraction(x)
    assert max(abs(a - float(b)) for a, b in zip(p, ref)) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(1, 60), min_size=2, max_size=8))
def test_inverse_load_is_strictly_monotone(x):
    p = balance(alts(len(x)), x).probabilities
    for i in range(len(x)):
        for j in range(len(x)):
            if x[i] < x[j]:
                assert p[i] > p[j]


@settings(max_examples=200, deadline=None)
@given(occupancy_vectors, st.randoms(use_true_random=False))
def test_permutation_equivariance(x, rnd):
    order = list(range(len(x)))
    rnd.shuffle(order)
    p = balance(alts(len(x)), x).probabilities
    q = balance(alts(len(x)), [x[i] for i in order]).probabilities
    assert q == pytest.approx([p[i] for i in order], abs=1e-15)


def test_balance_errors():
    with pytest.raises(ValueError):
        AlternativeSet(OBS, ())
    with pytest.raises(ValueError):
        balance(alts(2), [1])
    with pytest.raises(ValueError):
        balance(alts(2), [1, -1])


def test_alternative_set_validation():
    with pytest.raises(ValueError, match="distinct"):
        AlternativeSet(OBS, (("j", "b"), ("j", "b")))
    with pytest.raises(ValueError, match="own alternative"):
        AlternativeSet(OBS, (OBS,))
    with pytest.raises(ValueError, match="start"):
        AlternativeSet(OBS, (("j", "b"),), {("j", "b"): (("b", "m"),)})
    g = make_graph([("j", "a"), ("j", "b"), ("b", "m")])
    AlternativeSet(OBS, (("j", "b"),), {("j", "b"): (("j", "b"), ("b", "m"))}).validate(g)
    with pytest.raises(ValueError):
        AlternativeSet(OBS, (("j", "c"),)).validate(g)


def test_occupancy_measures():
    s = AlternativeSet(OBS, (("j", "b"), ("j", "c")), {("j", "b"): (("j", "b"), ("b", "m"))})
    occ = {("j", "b"): 2, ("b", "m"): 5, ("j", "c"): 1}
    assert alternative_occupancies(s, occ, "link") == [2, 1]
    assert alternative_occupancies(s, occ, "path") == [7, 1]
    with pytest.raises(ValueError):
        alternative_occupancies(s, occ, "lane")


def test_k_shortest_alternatives():
    edges = [("j", "a"), ("a", "m"), ("j", "b"), ("b", "m"), ("j", "c"), ("c", "d"), ("d", "m"),
             ("b", "c")]
    g = make_graph(edges)
    s = k_shortest_alternatives(g, ("j", "a"), k=3, target="m")
    assert s.obstructed == ("j", "a")
    assert s.alternatives == (("j", "b"), ("j", "c"))
    assert s.path(("j", "b")) == (("j", "b"), ("b", "m"))
    s.validate(g)
    with pytest.raises(ValueError, match="no detour"):
        k_shortest_alternatives(make_graph([("j", "a")]), ("j", "a"))
