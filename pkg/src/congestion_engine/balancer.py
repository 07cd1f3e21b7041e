"""Inverse-load distribution of re-routed vehicles over alternative links."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import islice
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .network import LinkKey, TrafficGraph


@dataclass(frozen=True)
class AlternativeSet:
    """Detours around an obstructed link.

    ``alternatives`` are the identifying links (where each detour leaves
    the obstructed route). ``paths`` optionally maps each of them to the
    full detour, from the obstructed link's tail to the node where it
    rejoins.
    """

    obstructed: LinkKey
    alternatives: Tuple[LinkKey, ...]
    paths: Mapping[LinkKey, Tuple[LinkKey, ...]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "obstructed", tuple(self.obstructed))
        alts = tuple(tuple(a) for a in self.alternatives)
        object.__setattr__(self, "alternatives", alts)
        object.__setattr__(self, "paths", {tuple(k): tuple(tuple(l) for l in v) for k, v in self.paths.items()})
        if not alts:
            raise ValueError(f"no alternatives for {self.obstructed}")
        if len(set(alts)) != len(alts):
            raise ValueError("alternatives must be distinct")
        if self.obstructed in alts:
            raise ValueError("the obstructed link cannot be its own alternative")
        for alt, path in self.paths.items():
            if alt not in alts:
                raise ValueError(f"path given for unknown alternative {alt}")
            if not path or path[0] != alt:
                raise ValueError(f"path for {alt} must start with that link")

    def __len__(self):
        return len(self.alternatives)

    def path(self, alt: LinkKey) -> Tuple[LinkKey, ...]:
        return self.paths.get(tuple(alt), (tuple(alt),))

    def validate(self, graph: TrafficGraph):
        graph.link(self.obstructed)
        for alt in self.alternatives:
            if not graph.is_path(self.path(alt)):
                raise ValueError(f"detour via {alt} is not a path of the graph")


@dataclass(frozen=True)
class BalanceVector:
    probabilities: Tuple[float, ...]
    tick: Optional[int] = None

    def __len__(self):
        return len(self.probabilities)

    def __getitem__(self, j):
        return self.probabilities[j]


def balance(alternatives: AlternativeSet, occupancies: Sequence[float], tick: Optional[int] = None) -> BalanceVector:
    """Re-routing probabilities for the alternatives.

    When every alternative carries traffic, each gets probability
    proportional to the inverse of its share ``h_j = x_j / sum(x)`` of the
    load. Otherwise the empty alternatives split the probability evenly and
    the loaded ones get none.
    """
    n = len(alternatives)
    if len(occupancies) != n:
        raise ValueError(f"expected {n} occupancies, got {len(occupancies)}")
    if any(x < 0 for x in occupancies):
        raise ValueError("occupancies must be non-negative")
    empty = [x == 0 for x in occupancies]
    n_empty = sum(empty)
    if n_empty:
        probs = tuple(1.0 / n_empty if e else 0.0 for e in empty)
    else:
        total = float(sum(occupancies))
        inv = [total / x for x in occupancies]  # 1 / h_j
        norm = sum(inv)
        probs = tuple(v / norm for v in inv)
    return BalanceVector(probs, tick)


def alternative_occupancies(alternatives: AlternativeSet, occupancy: Mapping[LinkKey, int],
                            measure: str = "link") -> List[int]:
    """Load of each alternative: its identifying link, or its whole detour."""
    if measure == "link":
        return [occupancy.get(a, 0) for a in alternatives.alternatives]
    if measure == "path":
        return [sum(occupancy.get(k, 0) for k in alternatives.path(a)) for a in alternatives.alternatives]
    raise ValueError(f"measure must be 'link' or 'path', got {measure!r}")


def k_shortest_alternatives(graph: TrafficGraph, obstructed: LinkKey, k: int = 3,
                            weight: str = "length", target=None) -> AlternativeSet:
    """Build alternatives from the shortest simple detours around a link.

    Detours run from the obstructed link's tail to ``target`` (default its
    head) without using the link; only the first detour through each
    leaving link is kept, up to ``k`` of them.
    """
    import networkx as nx

    src, dst = graph.link(obstructed).key
    target = dst if target is None else target
    g = graph.to_networkx(weight)
    g.remove_edge(src, dst)
    paths: Dict[LinkKey, Tuple[LinkKey, ...]] = {}
    try:
        for nodes in islice(nx.shortest_simple_paths(g, src, target, weight=weight), 10 * k + 50):
            links = tuple(zip(nodes, nodes[1:]))
            if links and links[0] not in paths:
                paths[links[0]] = links
                if len(paths) == k:
                    break
    except (nx.NetworkXNoPath, nx.NodeNotFound):
        pass
    if not paths:
        raise ValueError(f"no detour found around {obstructed}")
    return AlternativeSet(obstructed, tuple(paths), paths)
