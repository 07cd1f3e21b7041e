from itertools import product

import pytest

from conftest import make_graph
from congestion_engine.engine import ParseVerdict, parse_route, within_radius
from congestion_engine.events import Obstruction, ObstructionRegistry
from congestion_engine.prediction import PredictedRoute


def obs(link, **kw):
    return Obstruction(link, 3, 1.5, **kw)


def test_obstruction_on_route():
    v = parse_route(PredictedRoute(1, (("a", "b"), ("b", "c"))), [obs(("b", "c"))])
    assert v.affected and v.obstruction.link == ("b", "c") and v.vehicle == 1


def test_obstruction_off_route():
    v = parse_route(PredictedRoute(1, (("a", "b"),)), [obs(("x", "y"))])
    assert v == ParseVerdict(1)


def test_earliest_obstruction_reported():
    route = PredictedRoute(1, (("a", "b"), ("b", "c"), ("c", "d"), ("d", "e")))
    v = parse_route(route, [obs(("d", "e")), obs(("b", "c"))])
    assert v.obstruction.link == ("b", "c")


def test_no_active_obstructions():
    inactive = obs(("a", "b"), active=False)
    assert not parse_route(PredictedRoute(1, (("a", "b"),)), [inactive]).affected
    assert not parse_route(PredictedRoute(1, (("a", "b"),)), []).affected


def test_registry_input():
    g = make_graph([("a", "b"), ("b", "c")])
    reg = ObstructionRegistry(g)
    reg.open(obs(("b", "c")))
    assert parse_route(PredictedRoute(7, (("a", "b"), ("b", "c"))), reg).affected


def test_verdict_consistency():
    with pytest.raises(ValueError):
        ParseVerdict(1, True, None)
    with pytest.raises(ValueError):
        ParseVerdict(1, False, obs(("a", "b")))


def test_membership_matches_bruteforce():
    links = [("a", "b"), ("b", "a"), ("b", "c"), ("c", "a")]
    for n in range(0, 4):
        for seq in product(links, repeat=n):
            for target in links:
                v = parse_route(PredictedRoute(0, seq), [obs(target)])
                assert v.affected == (target in seq)


def test_within_radius():
    g = make_graph([("a", "b"), ("b", "c")],
                   positions={"a": (53.3200, -6.30), "b": (53.3210, -6.30), "c": (53.3400, -6.30)})
    o = obs(("a", "b"), radius=575.0)
    assert within_radius(g, o, "a") and within_radius(g, o, "b")
    assert not within_radius(g, o, "c")
    assert within_radius(make_graph([("a", "b")]), o, "a")
