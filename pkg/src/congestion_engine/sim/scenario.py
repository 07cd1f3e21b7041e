"""Scenario configuration and its INI file format.

A scenario file has these sections::

    [scenario]
    network = five_route.edges      # or "synthetic:five-route"
    nodes = five_route.nodes        # node coordinates, optional
    mode = controlled               # baseline | uncontrolled | controlled
    kind = irregular                # irregular | regular
    seed = 7
    duration = 14400                # ticks
    tick = 1.0                      # seconds per tick
    alpha = 0.1
    radius = 575
    horizon = 5
    damping = 0.93
    misprediction = 0.0
    occupancy_measure = link        # link | path
    capacity = 3                    # optional, overrides Maxcapacity
    speed = 1.5                     # optional km/h, overrides Maxspeed

    [routes]
    A = O J A1 M D

    [demand]                        # vehicles per tick, Bernoulli arrivals
    A = 0.2

    [history]                       # trips recorded per route stream
    A = A:8, B:2

    [alternatives]                  # detours for an obstructed link
    J A1 = B C D E

    [events]                        # tick = incident message
    0 = New road incident: ...

Relative paths are resolved against the scenario file's directory.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from ..balancer import AlternativeSet
from ..determination import FairnessConfig
from ..events import KINDS, EventParseError, parse_event
from ..network import LinkKey, NetworkError, TrafficGraph, load_edge_list
from .synthetic import DEFAULT_DEMAND, five_route_network

MODES = ("baseline", "uncontrolled", "controlled")

CASHEL_OPEN = ("New road incident: Cashel Rd North. LatLon: 53.322340,-6.306612. "
               "Maxcapacity: 3. Maxspeed: 1.5 [km/h]. Time: 2017-05-01T10:00:00Z.")


class ScenarioError(ValueError):
    pass


@dataclass
class Scenario:
    graph: TrafficGraph
    routes: Dict[str, List[LinkKey]]
    demand: Dict[str, float]
    history: Dict[str, Dict[str, int]] = field(default_factory=dict)
    events: List[Tuple[int, str]] = field(default_factory=list)
    alternatives: Dict[LinkKey, List[str]] = field(default_factory=dict)
    mode: str = "controlled"
    kind: str = "irregular"
    seed: int = 0
    duration: int = 14_400
    tick_length: float = 1.0
    alpha: float = 0.1
    radius: float = 575.0
    horizon: int = 5
    damping: float = 0.93
    misprediction: float = 0.0
    occupancy_measure: str = "link"
    capacity: Optional[int] = None
    speed_kmh: Optional[float] = None
    fairness: FairnessConfig = field(default_factory=FairnessConfig)
    prediction_root: str = "m"
    drivers: int = 0
    k_alternatives: int = 3

    def validate(self) -> "Scenario":
        """Check the scenario; raises :class:`ScenarioError`."""
        if self.mode not in MODES:
            raise ScenarioError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.kind not in KINDS:
            raise ScenarioError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.duration < 1:
            raise ScenarioError("duration must be at least 1 tick")
        if self.tick_length <= 0:
            raise ScenarioError("tick length must be positive")
        if not 0 < self.alpha < 1:
            raise ScenarioError("alpha must be in (0, 1)")
        if self.radius <= 0:
            raise ScenarioError("radius must be positive")
        if self.horizon < 1:
            raise ScenarioError("horizon must be >= 1")
        if not 0 < self.damping < 1:
            raise ScenarioError("damping must be in (0, 1)")
        if not 0 <= self.misprediction <= 1:
            raise ScenarioError("misprediction must be a probability")
        if self.occupancy_measure not in ("link", "path"):
            raise ScenarioError("occupancy_measure must be 'link' or 'path'")
        if self.capacity is not None and self.capacity < 1:
            raise ScenarioError("capacity override must be >= 1")
        if self.speed_kmh is not None and self.speed_kmh <= 0:
            raise ScenarioError("speed override must be positive")
        if self.prediction_root not in ("l", "m"):
            raise ScenarioError("prediction_root must be 'l' or 'm'")
        for name, route in self.routes.items():
            if not route or not self.graph.is_path(route):
                raise ScenarioError(f"route {name!r} is not a connected path of the network")
        for name, rate in self.demand.items():
            if name not in self.routes:
                raise ScenarioError(f"demand for unknown route {name!r}")
            if not 0 <= rate <= 1:
                raise ScenarioError(f"demand for {name!r} must be in [0, 1] vehicles per tick")
        for name, counts in self.history.items():
            if name not in self.routes:
                raise ScenarioError(f"history for unknown route {name!r}")
            for other, n in counts.items():
                if other not in self.routes:
                    raise ScenarioError(f"history of {name!r} references unknown route {other!r}")
                if n < 0:
                    raise ScenarioError("history counts must be non-negative")
        for tick, text in self.events:
            if tick < 0:
                raise ScenarioError("event ticks must be non-negative")
            try:
                parse_event(text)
            except EventParseError as exc:
                raise ScenarioError(f"event at tick {tick}: {exc}") from None
        if self.events and not self.graph.has_positions:
            raise ScenarioError("events need node coordinates to be matched to links")
        for link in self.alternatives:
            self.alternative_set(link)
        return self

    def alternative_set(self, link: LinkKey) -> Optional[AlternativeSet]:
        """Configured detours for ``link``, or None if none are configured."""
        names = self.alternatives.get(tuple(link))
        if not names:
            return None
        try:
            self.graph.link(link)
        except NetworkError as exc:
            raise ScenarioError(str(exc)) from None
        return alternatives_from_routes(self.routes, link, names)

    def with_overrides(self, **kw) -> "Scenario":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def alternatives_from_routes(routes: Mapping[str, Sequence[LinkKey]], obstructed: LinkKey,
                             names: Sequence[str]) -> AlternativeSet:
    """Cut each named route into a detour around ``obstructed``.

    The detour starts at the obstructed link's tail and ends at the first
    node it shares with the obstructed route downstream of that tail.
    """
    obstructed = tuple(obstructed)
    ref = next((r for r in routes.values() if obstructed in r), None)
    if ref is None:
        raise ScenarioError(f"no configured route uses the obstructed link {obstructed}")
    i = ref.index(obstructed)
    downstream = {k[1] for k in ref[i:]}
    paths = {}
    for name in names:
        if name not in routes:
            raise ScenarioError(f"unknown alternative route {name!r}")
        route = routes[name]
        start = next((j for j, k in enumerate(route) if k[0] == obstructed[0]), None)
        if start is None:
            raise ScenarioError(f"route {name!r} does not pass the node {obstructed[0]!r}")
        detour = []
        for k in route[start:]:
            detour.append(k)
            if k[1] in downstream:
                break
        else:
            raise ScenarioError(f"route {name!r} never rejoins the obstructed route")
        if obstructed in detour:
            raise ScenarioError(f"route {name!r} uses the obstructed link itself")
        paths[detour[0]] = tuple(detour)
    if len(paths) != len(names):
        raise ScenarioError("alternative routes must leave the junction by distinct links")
    return AlternativeSet(obstructed, tuple(paths), paths)


def five_route_scenario(mode: str = "controlled", capacity: int = 3, seed: int = 0,
                        duration: int = 14_400, **kw) -> Scenario:
    """The desk-scale irregular-obstruction experiment on the built-in network."""
    graph, routes = five_route_network()
    history = {"A": {"A": 8, "B": 2}}
    for name in "BCDE":
        history[name] = {name: 10}
    params = dict(
        graph=graph,
        routes=routes,
        demand=dict(DEFAULT_DEMAND),
        history=history,
        events=[(0, CASHEL_OPEN)],
        alternatives={("J", "A1"): ["B", "C", "D", "E"]},
        mode=mode,
        seed=seed,
        duration=duration,
        capacity=capacity,
        occupancy_measure="path",
    )
    params.update(kw)
    return Scenario(**params).validate()


def _int(section, key, default):
    try:
        return section.getint(key, default)
    except ValueError:
        raise ScenarioError(f"[{section.name}] {key} must be an integer") from None


def _float(section, key, default):
    try:
        return section.getfloat(key, default)
    except ValueError:
        raise ScenarioError(f"[{section.name}] {key} must be a number") from None


def load_scenario(path) -> Scenario:
    """Read and validate a scenario INI file."""
    path = Path(path)
    parser = configparser.ConfigParser(delimiters=("=",), interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from None
    except configparser.Error as exc:
        raise ScenarioError(f"{path}: {exc}") from None
    if "scenario" not in parser:
        raise ScenarioError(f"{path}: missing [scenario] section")
    sc = parser["scenario"]
    base = path.parent

    network = sc.get("network", "").strip()
    if not network:
        raise ScenarioError("[scenario] network is required")
    if network == "synthetic:five-route":
        graph, routes = five_route_network()
    else:
        nodes = sc.get("nodes")
        try:
            graph = load_edge_list(base / network, base / nodes if nodes else None)
        except (OSError, NetworkError) as exc:
            raise ScenarioError(f"cannot load network: {exc}") from None
        routes = {}

    if parser.has_section("routes"):
        for name, value in parser["routes"].items():
            try:
                routes[name] = graph.path_from_nodes(value.split())
            except NetworkError as exc:
                raise ScenarioError(f"route {name!r}: {exc}") from None

    demand = {}
    if parser.has_section("demand"):
        for name, value in parser["demand"].items():
            try:
                demand[name] = float(value)
            except ValueError:
                raise ScenarioError(f"demand for {name!r} must be a number") from None

    history = {}
    if parser.has_section("history"):
        for name, value in parser["history"].items():
            counts = {}
            for item in filter(None, (s.strip() for s in value.split(","))):
                other, _, n = item.partition(":")
                try:
                    counts[other.strip()] = int(n) if n else 1
                except ValueError:
                    raise ScenarioError(f"history of {name!r}: bad count in {item!r}") from None
            history[name] = counts

    alternatives = {}
    if parser.has_section("alternatives"):
        for key, value in parser["alternatives"].items():
            ends = key.split()
            if len(ends) != 2:
                raise ScenarioError(f"alternatives key must be 'from to', got {key!r}")
            alternatives[tuple(ends)] = value.split()

    events = []
    if parser.has_section("events"):
        for key, value in parser["events"].items():
            try:
                events.append((int(key.split(".")[0]), value.strip()))
            except ValueError:
                raise ScenarioError(f"event key must be a tick number, got {key!r}") from None
        events.sort(key=lambda e: e[0])

    cap = sc.get("capacity")
    speed = sc.get("speed")
    scenario = Scenario(
        graph=graph,
        routes=routes,
        demand=demand,
        history=history,
        events=events,
        alternatives=alternatives,
        mode=sc.get("mode", "controlled").strip(),
        kind=sc.get("kind", "irregular").strip(),
        seed=_int(sc, "seed", 0),
        duration=_int(sc, "duration", 14_400),
        tick_length=_float(sc, "tick", 1.0),
        alpha=_float(sc, "alpha", 0.1),
        radius=_float(sc, "radius", 575.0),
        horizon=_int(sc, "horizon", 5),
        damping=_float(sc, "damping", 0.93),
        misprediction=_float(sc, "misprediction", 0.0),
        occupancy_measure=sc.get("occupancy_measure", "link").strip(),
        capacity=_int(sc, "capacity", None) if cap else None,
        speed_kmh=_float(sc, "speed", None) if speed else None,
        fairness=FairnessConfig(_float(sc, "phi_scale", 4.0), _float(sc, "phi_power", 3.0),
                                _float(sc, "h_cap", 1e6)),
        prediction_root=sc.get("prediction_root", "m").strip(),
        drivers=_int(sc, "drivers", 0),
        k_alternatives=_int(sc, "k_alternatives", 3),
    )
    return scenario.validate()
