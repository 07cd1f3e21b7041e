"""Road network topology, per-vehicle trip histories and link occupancy."""

from __future__ import annotations

import math
import re
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Hashable, Iterable, Iterator, List, Optional, Sequence, Tuple

NodeId = Hashable
LinkKey = Tuple[NodeId, NodeId]

_SPLIT = re.compile(r"[\s,]+")


class NetworkError(ValueError):
    """Raised for malformed graphs, unknown links or invalid trips."""


@dataclass(frozen=True)
class Link:
    """A directed road segment.

    Parameters
    ----------
    source, target : NodeId
        Tail and head node of the link.
    length : float
        Length in meters.
    free_speed : float
        Speed limit in meters per second.
    capacity : int
        Nominal number of vehicles the link holds.
    """

    source: NodeId
    target: NodeId
    length: float
    free_speed: float
    capacity: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.length) and self.length > 0):
            raise NetworkError(f"link {self.key}: length must be finite and positive, got {self.length}")
        if not (math.isfinite(self.free_speed) and self.free_speed > 0):
            raise NetworkError(f"link {self.key}: free_speed must be finite and positive, got {self.free_speed}")
        if int(self.capacity) != self.capacity or self.capacity < 1:
            raise NetworkError(f"link {self.key}: capacity must be an integer >= 1, got {self.capacity}")

    @property
    def key(self) -> LinkKey:
        return (self.source, self.target)

    @property
    def travel_time(self) -> float:
        return self.length / self.free_speed


class TrafficGraph:
    """Immutable directed road graph.

    Links are addressed by their ``(source, target)`` key; parallel links
    between the same ordered node pair are rejected.
    """

    def __init__(self, nodes: Iterable[NodeId], links: Iterable[Link],
                 positions: Optional[Dict[NodeId, Tuple[float, float]]] = None):
        self._nodes = tuple(dict.fromkeys(nodes))
        node_set = set(self._nodes)
        self._links: Dict[LinkKey, Link] = {}
        self._in: Dict[NodeId, List[LinkKey]] = defaultdict(list)
        self._out: Dict[NodeId, List[LinkKey]] = defaultdict(list)
        for link in links:
            for end in link.key:
                if end not in node_set:
                    raise NetworkError(f"link {link.key} references undeclared node {end!r}")
            if link.key in self._links:
                raise NetworkError(f"duplicate link {link.key}")
            self._links[link.key] = link
            self._out[link.source].append(link.key)
            self._in[link.target].append(link.key)

        self._positions: Dict[NodeId, Tuple[float, float]] = {}
        for node, (lat, lon) in (positions or {}).items():
            if node not in node_set:
                raise NetworkError(f"position given for undeclared node {node!r}")
            if abs(lat) > 90 or abs(lon) > 180:
                raise NetworkError(f"node {node!r}: coordinates out of range ({lat}, {lon})")
            self._positions[node] = (float(lat), float(lon))

    def __repr__(self):
        return f"TrafficGraph(nodes={len(self._nodes)}, links={len(self._links)})"

    def __contains__(self, key) -> bool:
        return key in self._links

    def __len__(self) -> int:
        return len(self._links)

    @property
    def nodes(self) -> Tuple[NodeId, ...]:
        return self._nodes

    @property
    def links(self) -> Tuple[Link, ...]:
        return tuple(self._links.values())

    def link_keys(self) -> List[LinkKey]:
        return list(self._links)

    @property
    def positions(self) -> Dict[NodeId, Tuple[float, float]]:
        return dict(self._positions)

    @property
    def has_positions(self) -> bool:
        return bool(self._positions) and all(n in self._positions for n in self._nodes)

    def link(self, key: LinkKey) -> Link:
        try:
            return self._links[tuple(key)]
        except KeyError:
            raise NetworkError(f"unknown link {tuple(key)}") from None

    def position(self, node: NodeId) -> Tuple[float, float]:
        try:
            return self._positions[node]
        except KeyError:
            raise NetworkError(f"node {node!r} has no coordinates") from None

    def in_neighbors(self, key: LinkKey) -> List[LinkKey]:
        """Links whose head is the tail of ``key``."""
        source, _ = self.link(key).key
        return list(self._in.get(source, ()))

    def out_neighbors(self, key: LinkKey) -> List[LinkKey]:
        """Links whose tail is the head of ``key``."""
        _, target = self.link(key).key
        return list(self._out.get(target, ()))

    def links_from(self, node: NodeId) -> List[LinkKey]:
        return list(self._out.get(node, ()))

    def links_into(self, node: NodeId) -> List[LinkKey]:
        return list(self._in.get(node, ()))

    def is_path(self, links: Sequence[LinkKey]) -> bool:
        if any(tuple(k) not in self._links for k in links):
            return False
        return all(a[1] == b[0] for a, b in zip(links, links[1:]))

    def path_from_nodes(self, nodes: Sequence[NodeId]) -> List[LinkKey]:
        path = list(zip(nodes, nodes[1:]))
        for key in path:
            self.link(key)
        return path

    def to_networkx(self, weight: str = "length"):
        import networkx as nx

        g = nx.DiGraph()
        g.add_nodes_from(self._nodes)
        for link in self._links.values():
            g.add_edge(link.source, link.target, **{weight: getattr(link, weight)})
        return g


def in_neighbors(graph: TrafficGraph, link: LinkKey) -> List[LinkKey]:
    return graph.in_neighbors(link)


def out_neighbors(graph: TrafficGraph, link: LinkKey) -> List[LinkKey]:
    return graph.out_neighbors(link)


class HistoryGraph:
    """Trip-count weights of one vehicle over links of a parent graph."""

    def __init__(self, vehicle, graph: TrafficGraph, weights: Optional[Dict[LinkKey, int]] = None):
        self.vehicle = vehicle
        self.graph = graph
        self._weights: Dict[LinkKey, int] = {}
        self._out: Dict[NodeId, List[LinkKey]] = defaultdict(list)
        for key, w in (weights or {}).items():
            self._add(tuple(key), w)

    def _add(self, key: LinkKey, amount: int):
        if key not in self.graph:
            raise NetworkError(f"history link {key} not in traffic graph")
        if int(amount) != amount or amount < 1:
            raise NetworkError(f"weight for {key} must be a positive integer, got {amount}")
        if key not in self._weights:
            self._weights[key] = 0
            self._out[key[0]].append(key)
        self._weights[key] += int(amount)

    def __repr__(self):
        return f"HistoryGraph(vehicle={self.vehicle!r}, links={len(self._weights)}, traversals={self.total()})"

    def __iter__(self) -> Iterator[LinkKey]:
        return iter(self._weights)

    def __len__(self) -> int:
        return len(self._weights)

    def weight(self, key: LinkKey) -> int:
        return self._weights.get(tuple(key), 0)

    @property
    def weights(self) -> Dict[LinkKey, int]:
        return dict(self._weights)

    def total(self) -> int:
        return sum(self._weights.values())

    def links_from(self, node: NodeId) -> List[LinkKey]:
        return sorted(self._out.get(node, ()), key=_sort_key)

    def record_trip(self, trip: Sequence[LinkKey]) -> "HistoryGraph":
        """Add one traversal to every link of ``trip``.

        The trip is validated as a whole first, so a rejected trip leaves
        the weights untouched.
        """
        trip = [tuple(k) for k in trip]
        for key in trip:
            if key not in self.graph:
                raise NetworkError(f"trip uses unknown link {key}")
        for a, b in zip(trip, trip[1:]):
            if a[1] != b[0]:
                raise NetworkError(f"trip is disconnected between {a} and {b}")
        for key in trip:
            self._add(key, 1)
        return self


def record_trip(history: HistoryGraph, trip: Sequence[LinkKey]) -> HistoryGraph:
    return history.record_trip(trip)


class LinkState:
    """Mutable occupancy table ``x(k)`` keyed by link."""

    def __init__(self, graph: TrafficGraph, tick: int = 0):
        self.graph = graph
        self.tick = tick
        self._x: Dict[LinkKey, int] = {}

    def __getitem__(self, key: LinkKey) -> int:
        return self._x.get(tuple(key), 0)

    def add(self, key: LinkKey, delta: int = 1):
        key = tuple(key)
        value = self._x.get(key, 0) + delta
        if value < 0:
            raise NetworkError(f"occupancy of {key} would become negative")
        if key not in self.graph:
            raise NetworkError(f"unknown link {key}")
        if value:
            self._x[key] = value
        else:
            self._x.pop(key, None)

    def total(self) -> int:
        return sum(self._x.values())

    def snapshot(self) -> Dict[LinkKey, int]:
        return dict(self._x)


def _sort_key(key):
    return tuple(str(p) for p in key)


def _parse_rows(path) -> Iterator[Tuple[int, List[str]]]:
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if line:
            yield lineno, [tok for tok in _SPLIT.split(line) if tok]


def load_nodes(path) -> Dict[str, Tuple[float, float]]:
    """Read a ``node_id lat lon`` coordinate file."""
    positions = {}
    for lineno, fields in _parse_rows(path):
        if len(fields) != 3:
            raise NetworkError(f"{path}:{lineno}: expected 'node lat lon', got {len(fields)} fields")
        try:
            positions[fields[0]] = (float(fields[1]), float(fields[2]))
        except ValueError:
            raise NetworkError(f"{path}:{lineno}: bad coordinate") from None
    return positions


def load_edge_list(path, nodes_path=None) -> TrafficGraph:
    """Read a network from an edge-list file.

    Each non-comment line holds ``from to length free_speed capacity``
    separated by whitespace or commas; ``#`` starts a comment. Nodes are
    declared implicitly by the links and, optionally, by a companion
    coordinate file read with :func:`load_nodes`.
    """
    links = []
    nodes = []
    for lineno, fields in _parse_rows(path):
        if len(fields) != 5:
            raise NetworkError(f"{path}:{lineno}: expected 5 fields, got {len(fields)}")
        src, dst = fields[0], fields[1]
        try:
            length, speed, cap = float(fields[2]), float(fields[3]), float(fields[4])
        except ValueError:
            raise NetworkError(f"{path}:{lineno}: non-numeric link attribute") from None
        try:
            links.append(Link(src, dst, length, speed, int(cap) if cap.is_integer() else cap))
        except NetworkError as exc:
            raise NetworkError(f"{path}:{lineno}: {exc}") from None
        nodes.extend((src, dst))
    positions = load_nodes(nodes_path) if nodes_path is not None else None
    if positions:
        nodes.extend(positions)
    return TrafficGraph(nodes, links, positions)


def write_edge_list(graph: TrafficGraph, path):
    lines = ["# from to length_m free_speed_mps capacity"]
    for link in graph.links:
        lines.append(f"{link.source} {link.target} {link.length!r} {link.free_speed!r} {link.capacity}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_nodes(graph: TrafficGraph, path):
    lines = ["# node lat lon"]
    for node in graph.nodes:
        if node in graph.positions:
            lat, lon = graph.position(node)
            lines.append(f"{node} {lat:.6f} {lon:.6f}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_trips(path, graph: TrafficGraph, vehicle="vehicle") -> HistoryGraph:
    """Build a history from a file with one trip (node sequence) per line.

    A line may end with ``xN`` to record the same trip ``N`` times.
    """
    history = HistoryGraph(vehicle, graph)
    for lineno, fields in _parse_rows(path):
        repeat = 1
        if len(fields) > 1 and re.fullmatch(r"x\d+", fields[-1]):
            repeat = int(fields[-1][1:])
            fields = fields[:-1]
        try:
            trip = graph.path_from_nodes(fields)
            for _ in range(repeat):
                history.record_trip(trip)
        except NetworkError as exc:
            raise NetworkError(f"{path}:{lineno}: {exc}") from None
    return history
