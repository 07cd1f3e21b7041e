"""Route prediction from a vehicle's trip history.

The candidate routes are all paths of up to ``horizon`` links that the
vehicle has driven before, starting at its current position. Each path is
scored by the sum of ``frequency * rank`` over its links and the best one
is the prediction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .network import HistoryGraph, LinkKey, NodeId, TrafficGraph
from .ranking import EdgeFrequencies, EdgeRanks, edge_frequencies

Branch = Tuple[LinkKey, ...]


@dataclass(frozen=True)
class PredictionConfig:
    horizon: int = 5
    # Which end of the current link the tree grows from: "m" (head, the
    # node being approached) or "l" (tail, re-predicting the current link).
    root: str = "m"

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.root not in ("l", "m"):
            raise ValueError(f"root must be 'l' or 'm', got {self.root!r}")


@dataclass(frozen=True)
class PredictionTree:
    root: NodeId
    branches: Tuple[Branch, ...] = ()

    def __len__(self):
        return len(self.branches)


@dataclass(frozen=True)
class PredictedRoute:
    vehicle: object
    links: Branch = ()
    score: float = 0.0

    def __contains__(self, key) -> bool:
        return tuple(key) in self.links

    def __bool__(self):
        return bool(self.links)


def build_tree(history: HistoryGraph, root: NodeId, config: PredictionConfig = PredictionConfig()) -> PredictionTree:
    """Enumerate the maximal history paths of length <= horizon from ``root``.

    Cycles are unrolled until the depth limit, so the number of branches is
    bounded by ``max_out_degree ** horizon``.
    """
    branches: List[Branch] = []
    stack: List[Tuple[NodeId, Branch]] = [(root, ())]
    while stack:
        node, path = stack.pop()
        successors = history.links_from(node) if len(path) < config.horizon else []
        if not successors:
            if path:
                branches.append(path)
            continue
        # reversed so that branches come out in sorted order
        for key in reversed(successors):
            stack.append((key[1], path + (key,)))
    return PredictionTree(root, tuple(branches))


def score_branch(branch: Sequence[LinkKey], ranks: EdgeRanks, freqs: EdgeFrequencies) -> float:
    return sum(freqs.get(key, 0.0) * ranks[key] for key in branch)


def _order(branch: Branch):
    return tuple((str(a), str(b)) for a, b in branch)


def predict_route(history: HistoryGraph, graph: TrafficGraph, ranks: EdgeRanks, root: NodeId,
                  config: PredictionConfig = PredictionConfig(),
                  freqs: Optional[EdgeFrequencies] = None) -> PredictedRoute:
    """Return the highest-scoring history branch from ``root``.

    Ties go to the lexicographically smallest link sequence. An empty tree
    gives an empty route with score 0.
    """
    if freqs is None:
        freqs = edge_frequencies(history, graph)
    tree = build_tree(history, root, config)
    best: Optional[Branch] = None
    best_score = 0.0
    for branch in tree.branches:
        s = score_branch(branch, ranks, freqs)
        if best is None or s > best_score or (s == best_score and _order(branch) < _order(best)):
            best, best_score = branch, s
    if best is None:
        return PredictedRoute(history.vehicle)
    return PredictedRoute(history.vehicle, best, best_score)


def predict_from_link(history: HistoryGraph, graph: TrafficGraph, ranks: EdgeRanks, current: LinkKey,
                      config: PredictionConfig = PredictionConfig(),
                      freqs: Optional[EdgeFrequencies] = None) -> PredictedRoute:
    """Predict the continuation for a vehicle currently driving ``current``."""
    root = current[1] if config.root == "m" else current[0]
    return predict_route(history, graph, ranks, root, config, freqs)
