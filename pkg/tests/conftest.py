import numpy as np
import pytest

from congestion_engine.network import Link, TrafficGraph

ACCEPTANCE_LINES = []


def make_graph(edges, positions=None, speed=10.0, length=100.0, capacity=10):
    """Graph from ``(a, b)`` pairs with uniform link attributes."""
    nodes = []
    for a, b in edges:
        nodes += [a, b]
    if positions:
        nodes += list(positions)
    links = [Link(a, b, length, speed, capacity) for a, b in edges]
    return TrafficGraph(nodes, links, positions)


def random_graph(rng, n_nodes, n_edges):
    """Random simple digraph with ``n_edges`` distinct links (no self loops)."""
    pairs = [(a, b) for a in range(n_nodes) for b in range(n_nodes) if a != b]
    pick = rng.choice(len(pairs), size=min(n_edges, len(pairs)), replace=False)
    return make_graph([(f"n{pairs[i][0]}", f"n{pairs[i][1]}") for i in sorted(pick)])


@pytest.fixture
def chain():
    return make_graph([("a", "b"), ("b", "c"), ("c", "d")])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
