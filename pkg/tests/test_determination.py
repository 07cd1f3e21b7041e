from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from congestion_engine.balancer import AlternativeSet, BalanceVector
from congestion_engine.determination import (
    AllocationHistory,
    FairnessConfig,
    allocation_probability,
    decide_route,
    history_weight,
    pick_index,
    update_history,
)

OBS = ("l", "m")
ALTS = AlternativeSet(OBS, (("l", "p"), ("l", "q")))


def hist(*ys):
    return AllocationHistory("v", list(ys))


def test_weight_examples():
    assert history_weight(hist(1, 0)) == 1.0
    assert history_weight(hist(1)) == 0.25


def test_weight_cap():
    assert history_weight(AllocationHistory("v", [0])) == 1e6
    h = AllocationHistory("v", [1] + [0] * 10**4)
    assert history_weight(h, FairnessConfig(h_cap=100.0)) == 100.0


def test_allocation_examples():
    assert allocation_probability("irregular", 0.25) == 0.25
    assert allocation_probability("regular", 0.5, hist(1, 0)) == 0.5
    h = AllocationHistory("v", [1] + [0] * 4)  # ybar = 0.2
    assert history_weight(h) == pytest.approx(6.25)
    assert allocation_probability("regular", 0.9, h) == 1.0
    with pytest.raises(ValueError):
        allocation_probability("regular", 0.5)
    with pytest.raises(ValueError):
        allocation_probability("daily", 0.5, h)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 40), st.integers(1, 40), st.floats(0.01, 1.0))
def test_lower_ybar_gets_higher_probability(a, b, gamma):
    n = 41
    lo = AllocationHistory("v", [1] * min(a, b) + [0] * (n - min(a, b)))
    hi = AllocationHistory("v", [1] * max(a, b) + [0] * (n - max(a, b)))
    if a != b:
        assert history_weight(lo) > history_weight(hi)
        assert allocation_probability("regular", gamma, lo) >= allocation_probability("regular", gamma, hi)


def test_history_updates():
    assert update_history(hist(1), False).mean == 0.5
    assert update_history(hist(1, 0, 0, 1), True).mean == 0.6
    assert AllocationHistory("v").mean == 1.0
    with pytest.raises(ValueError):
        AllocationHistory("v", [2])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.booleans(), max_size=80))
def test_mean_is_exact(flags):
    h = AllocationHistory("v")
    for f in flags:
        h.record(f)
    assert Fraction(h.mean) == Fraction(float(Fraction(sum(h.y), len(h.y))))
    assert len(h) == len(flags) + 1


def test_fairness_config_validation():
    with pytest.raises(ValueError):
        FairnessConfig(scale=0)
    with pytest.raises(ValueError):
        FairnessConfig(power=-1)
    assert FairnessConfig().phi(0.5) == 0.5


def test_pick_index():
    assert pick_index([0.75, 0.25], 0.0) == 0
    assert pick_index([0.75, 0.25], 0.75) == 1
    assert pick_index([0.5, 0.5, 0.0], 0.9999999999999999) == 1
    with pytest.raises(ValueError):
        pick_index([0.0, 0.0], 0.3)


def test_certain_grant_uses_one_draw():
    rng = np.random.default_rng(0)
    for _ in range(100):
        d = decide_route("v", 1.0, BalanceVector((0.5, 0.5)), ALTS, rng)
        assert d.granted and d.link == OBS and d.draws == 1


def test_zero_allocation_follows_balance():
    rng = np.random.default_rng(0)
    for _ in range(100):
        d = decide_route("v", 0.0, BalanceVector((1.0, 0.0)), ALTS, rng)
        assert not d.granted and d.link == ("l", "p") and d.draws == 2 and d.alternative == 0


def test_decision_frequencies():
    rng = np.random.default_rng(20170501)
    n = 10**6
    counts = {OBS: 0, ("l", "p"): 0, ("l", "q"): 0}
    bal = BalanceVector((0.75, 0.25))
    for _ in range(n):
        counts[decide_route("v", 0.5, bal, ALTS, rng).link] += 1
    for link, p in ((OBS, 0.5), (("l", "p"), 0.375), (("l", "q"), 0.125)):
        sigma = np.sqrt(n * p * (1 - p))
        assert abs(counts[link] - n * p) <= 3 * sigma


def test_decisions_are_reproducible_and_recorded():
    bal = BalanceVector((0.5, 0.5))
    runs = []
    for _ in range(2):
        rng = np.random.default_rng([7, 1, 3])
        h = AllocationHistory("v")
        runs.append(([decide_route("v", 0.4, bal, ALTS, rng, h) for _ in range(50)], list(h.y)))
    assert runs[0] == runs[1]
    decisions, y = runs[0]
    assert y == [1] + [int(d.granted) for d in decisions]
