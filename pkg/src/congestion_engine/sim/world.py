"""Discrete-time mesoscopic simulator.

Vehicles occupy one link at a time and leave it after
``ceil(length / speed)`` ticks, using the reduced speed on obstructed
links. There is no car following and no blocking: the only thing that
keeps an obstructed link under its capacity is the controller.

Within a tick the order is: apply scheduled incident messages, move
vehicles whose travel time expired, spawn new ones, sample the
controllers on the resulting occupancy ``x(k)``, and let every vehicle
that just entered a link inside an assessment radius go through
prediction, route parsing and route determination. A granted vehicle only
shows up in ``x`` once it reaches the obstructed link.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import networkx as nx
import numpy as np

from ..balancer import AlternativeSet, alternative_occupancies, balance, k_shortest_alternatives
from ..control import LinkController
from ..determination import AllocationHistory, allocation_probability, decide_route
from ..engine import parse_route, within_radius
from ..events import IncidentOpen, ObstructionRegistry, parse_event
from ..network import HistoryGraph, LinkKey, LinkState
from ..prediction import PredictedRoute, PredictionConfig, predict_from_link
from ..ranking import RankingConfig, edge_frequencies, rank_edges
from .metrics import Metrics
from .scenario import Scenario

log = logging.getLogger(__name__)

# streams of the per-scenario seed sequence
_ARRIVALS, _DECISIONS, _MISPREDICTION = 0, 1, 2


@dataclass
class Vehicle:
    id: int
    stream: str
    route: List[LinkKey]
    spawned: int
    index: int = 0
    exit_tick: int = 0
    status: str = "driving"
    rerouted: bool = False
    competed: set = field(default_factory=set)
    rng: Optional[np.random.Generator] = None
    mis_rng: Optional[np.random.Generator] = None

    @property
    def link(self) -> LinkKey:
        return self.route[self.index]


class _Control:
    """Controller, detours and bookkeeping for one active obstruction."""

    def __init__(self, obstruction, alternatives: AlternativeSet, alpha):
        self.obstruction = obstruction
        self.alternatives = alternatives
        self.controller = LinkController(obstruction.link, obstruction.capacity, obstruction.kind, alpha)
        self.balance = None


class Simulation:
    def __init__(self, scenario: Scenario):
        self.scenario = scenario.validate()
        sc = self.scenario
        self.graph = sc.graph
        self.tick = 0
        self.occupancy = LinkState(self.graph)
        self.registry = ObstructionRegistry(self.graph, sc.kind, sc.radius)
        self.metrics = Metrics()

        self.ranks = rank_edges(self.graph, RankingConfig(damping=sc.damping))
        self.prediction_config = PredictionConfig(sc.horizon, sc.prediction_root)
        self.histories: Dict[str, HistoryGraph] = {}
        self.frequencies = {}
        for name in sc.routes:
            hist = HistoryGraph(name, self.graph)
            for other, n in sc.history.get(name, {name: 10}).items():
                for _ in range(n):
                    hist.record_trip(sc.routes[other])
            self.histories[name] = hist
            self.frequencies[name] = edge_frequencies(hist, self.graph)
        self._predictions: Dict[Tuple[str, LinkKey], PredictedRoute] = {}

        self.arrivals = {}
        for i, (name, rate) in enumerate(sc.demand.items()):
            rng = np.random.default_rng([sc.seed, _ARRIVALS, i])
            self.arrivals[name] = np.flatnonzero(rng.random(sc.duration) < rate)
        self._arrival_pos = {name: 0 for name in self.arrivals}

        self.events = sorted(sc.events, key=lambda e: e[0]) if sc.mode != "baseline" else []
        self._event_pos = 0
        self.controls: Dict[LinkKey, _Control] = {}
        self.allocations: Dict[object, AllocationHistory] = {}

        self.vehicles: List[Vehicle] = []
        self._exits: Dict[int, List[Vehicle]] = defaultdict(list)
        self.n_driving = 0
        self.n_finished = 0
        self._nx = None

        # links whose occupancy is traced every tick
        self.watch: Dict[LinkKey, Optional[AlternativeSet]] = {}
        for link in sc.alternatives:
            self.watch[tuple(link)] = sc.alternative_set(link)
        self._route_links = self._distinctive_links()
        self._entered = defaultdict(int)

    def _distinctive_links(self):
        count = defaultdict(int)
        for route in self.scenario.routes.values():
            for k in set(route):
                count[k] += 1
        return {name: [k for k in route if count[k] == 1] or list(route)
                for name, route in self.scenario.routes.items()}

    # -- helpers -------------------------------------------------------

    def travel_ticks(self, link: LinkKey) -> int:
        length = self.graph.link(link).length
        speed = self.registry.effective_speed(link)
        speed = max(speed, 1e-3)
        return max(1, math.ceil(length / (speed * self.scenario.tick_length) - 1e-9))

    def _enter(self, v: Vehicle, index: int):
        v.index = index
        self.occupancy.add(v.link, 1)
        v.exit_tick = self.tick + self.travel_ticks(v.link)
        self._exits[v.exit_tick].append(v)
        for name, links in self._route_links.items():
            if v.link == links[0]:
                self._entered[name] += 1

    def _alternatives_for(self, obstruction) -> AlternativeSet:
        alts = self.watch.get(obstruction.link)
        if alts is None:
            alts = self.scenario.alternative_set(obstruction.link)
        if alts is None:
            alts = self._generated_alternatives(obstruction.link)
        self.watch[obstruction.link] = alts
        return alts

    def _generated_alternatives(self, link: LinkKey) -> AlternativeSet:
        # rejoin at the link's head if possible, else at the nearest node downstream of it
        g = self.graph.to_networkx()
        order = [link[1]] + [n for n in nx.bfs_tree(g, link[1]) if n not in link]
        for target in order:
            try:
                return k_shortest_alternatives(self.graph, link, self.scenario.k_alternatives, target=target)
            except ValueError:
                continue
        raise ValueError(f"no detour found around {link}")

    def _apply_events(self):
        sc = self.scenario
        while self._event_pos < len(self.events) and self.events[self._event_pos][0] <= self.tick:
            _, text = self.events[self._event_pos]
            self._event_pos += 1
            event = parse_event(text)
            if isinstance(event, IncidentOpen):
                obs = self.registry.apply(event, capacity=sc.capacity, speed_kmh=sc.speed_kmh)
                self.controls[obs.link] = _Control(obs, self._alternatives_for(obs), sc.alpha)
                log.info("tick %d: obstruction on %s, capacity %d", self.tick, obs.link, obs.capacity)
            else:
                obs = self.registry.apply(event)
                ctl = self.controls.pop(obs.link, None)
                if ctl is not None:
                    ctl.controller.deactivate()
                log.info("tick %d: obstruction on %s closed", self.tick, obs.link)

    def _sample_controllers(self, snapshot):
        for link, ctl in self.controls.items():
            ctl.controller.tick(snapshot.get(link, 0))
            occ = alternative_occupancies(ctl.alternatives, snapshot, self.scenario.occupancy_measure)
            ctl.balance = balance(ctl.alternatives, occ, self.tick)

    def _predict(self, v: Vehicle) -> PredictedRoute:
        key = (v.stream, v.link)
        pred = self._predictions.get(key)
        if pred is None:
            pred = predict_from_link(self.histories[v.stream], self.graph, self.ranks, v.link,
                                     self.prediction_config, self.frequencies[v.stream])
            self._predictions[key] = pred
        return PredictedRoute(v.id, pred.links, pred.score)

    def _driver(self, v: Vehicle):
        n = self.scenario.drivers
        return (v.stream, v.id % n) if n else v.id

    def _assess(self, v: Vehicle):
        sc = self.scenario
        candidates = [ctl.obstruction for link, ctl in self.controls.items()
                      if link not in v.competed and link != v.link
                      and within_radius(self.graph, ctl.obstruction, v.link[1])]
        if not candidates:
            return
        verdict = parse_route(self._predict(v), candidates)
        if not verdict.affected:
            return
        obs = verdict.obstruction
        ctl = self.controls[obs.link]
        v.competed.add(obs.link)
        history = None
        if obs.kind == "regular":
            history = self.allocations.setdefault(self._driver(v), AllocationHistory(self._driver(v)))
        p_alloc = allocation_probability(obs.kind, ctl.controller.output, history, sc.fairness)
        if v.rng is None:
            v.rng = np.random.default_rng([sc.seed, _DECISIONS, v.id])
        decision = decide_route(v.id, p_alloc, ctl.balance, ctl.alternatives, v.rng, history)
        ignored = False
        if sc.misprediction > 0 and not decision.granted:
            if v.mis_rng is None:
                v.mis_rng = np.random.default_rng([sc.seed, _MISPREDICTION, v.id])
            ignored = bool(v.mis_rng.random() < sc.misprediction)
        if not decision.granted and not ignored:
            self._reroute(v, obs.link, ctl.alternatives.path(decision.link))
        self.metrics.decisions.append((self.tick, v.id, obs.kind, p_alloc, int(decision.granted),
                                       decision.link[0], decision.link[1], int(ignored)))
        if history is not None:
            self.metrics.allocations.append((self.tick, history.vehicle, history.mean))

    def _reroute(self, v: Vehicle, obstructed: LinkKey, detour):
        route = v.route
        j = next((i for i in range(v.index + 1, len(route)) if route[i][0] == obstructed[0]), None)
        if j is None:
            return
        rejoin = detour[-1][1]
        tail_at = next((i for i in range(j, len(route)) if route[i][0] == rejoin), None)
        if tail_at is not None:
            tail = route[tail_at:]
        elif rejoin == route[-1][1]:
            tail = []
        else:
            import networkx as nx

            if self._nx is None:
                self._nx = self.graph.to_networkx()
            try:
                nodes = nx.shortest_path(self._nx, rejoin, route[-1][1], weight="length")
            except nx.NetworkXNoPath:
                log.warning("vehicle %s: no way from %s to its destination", v.id, rejoin)
                return
            tail = list(zip(nodes, nodes[1:]))
        v.route = route[:j] + list(detour) + tail
        v.rerouted = True

    # -- main loop -----------------------------------------------------

    def step(self):
        sc = self.scenario
        k = self.tick
        self._apply_events()
        self._entered.clear()

        entered: List[Vehicle] = []
        for v in self._exits.pop(k, ()):
            self.occupancy.add(v.link, -1)
            if v.index + 1 < len(v.route):
                self._enter(v, v.index + 1)
                entered.append(v)
            else:
                v.status = "finished"
                self.n_driving -= 1
                self.n_finished += 1

        for name, ticks in self.arrivals.items():
            pos = self._arrival_pos[name]
            if pos < len(ticks) and ticks[pos] == k:
                self._arrival_pos[name] = pos + 1
                v = Vehicle(len(self.vehicles), name, list(sc.routes[name]), k)
                self.vehicles.append(v)
                self.n_driving += 1
                self._enter(v, 0)
                entered.append(v)

        snapshot = self.occupancy.snapshot()
        self._sample_controllers(snapshot)
        self._record_occupancy(snapshot)
        if sc.mode == "controlled" and self.controls:
            for v in entered:
                self._assess(v)

        self._record_flows()
        self.tick += 1

    def _record_occupancy(self, snapshot):
        k = self.tick
        rows = self.metrics.occupancy
        for link, alts in self.watch.items():
            ctl = self.controls.get(link)
            x = snapshot.get(link, 0)
            if ctl is not None:
                cap = ctl.obstruction.capacity
                out = ctl.controller.output if self.scenario.mode == "controlled" else None
                rows.append((k, link[0], link[1], "obstructed", x, cap - x, out))
            else:
                rows.append((k, link[0], link[1], "obstructed", x, None, None))
            if alts is None:
                continue
            occ = alternative_occupancies(alts, snapshot, self.scenario.occupancy_measure)
            for j, alt in enumerate(alts.alternatives):
                p = ctl.balance[j] if ctl is not None and self.scenario.mode == "controlled" else None
                rows.append((k, alt[0], alt[1], "alternative", occ[j], None, p))

    def _record_flows(self):
        k = self.tick
        for name, links in self._route_links.items():
            on_route = sum(self.occupancy[l] for l in links)
            self.metrics.flows.append((k, name, self._entered.get(name, 0), on_route))

    def run(self) -> Metrics:
        while self.tick < self.scenario.duration:
            self.step()
        return self.metrics


def run_scenario(scenario: Scenario) -> Metrics:
    """Run a scenario to its duration and return the collected metrics."""
    return Simulation(scenario).run()
