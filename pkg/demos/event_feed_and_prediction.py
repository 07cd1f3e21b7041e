# coding: utf-8

# # From an incident message to a routing decision
#
# This walks through the pieces the simulator strings together for one
# vehicle: reading the incident feed, finding the affected link, predicting
# where the vehicle is going and checking whether the two meet.

from pathlib import Path

from congestion_engine.engine import parse_route, within_radius
from congestion_engine.events import ObstructionRegistry, apply_event, format_event, match_link, parse_event
from congestion_engine.network import load_edge_list, load_trips
from congestion_engine.prediction import PredictionConfig, predict_route
from congestion_engine.ranking import RankingConfig, edge_frequencies, rank_edges

DATA = Path(__file__).resolve().parent / "data"

graph = load_edge_list(DATA / "five_route.edges", DATA / "five_route.nodes")
print(f"{len(graph.nodes)} nodes, {len(graph.links)} links")


# ## The feed
#
# Messages follow a strict grammar. Parsing and formatting are inverses.

feed = [
    "New road incident: Cashel Rd North. LatLon: 53.322340,-6.306612. Maxcapacity: 3. "
    "Maxspeed: 1.5 [km/h]. Time: 2017-05-01T10:00:00Z.",
    "Road incident closed: Cashel Rd North. Time: 2017-05-01T14:00:00Z.",
]
events = [parse_event(text) for text in feed]
for text, ev in zip(feed, events):
    assert format_event(ev) == text
    print(type(ev).__name__, ev.location, ev.timestamp.isoformat())

opened = events[0]
link = match_link(graph, opened.latitude, opened.longitude)
print("incident sits on link", link)


# ## The registry

registry = ObstructionRegistry(graph)
apply_event(registry, opened, graph)
obstruction = registry.active_on(link)
print("active:", [o.link for o in registry.active()], "effective speed", registry.effective_speed(link), "m/s")


# ## Where is this driver going?
#
# The driver's history: eight trips down route A, two down route B.
# Edge ranks measure how central each link is; frequencies how often this
# driver used it. The predicted route maximises the sum of rank times
# frequency.

history = load_trips(DATA / "commuter.trips", graph)
ranks = rank_edges(graph, RankingConfig(damping=0.93))
freqs = edge_frequencies(history, graph)
for key in (("J", "A1"), ("J", "B1")):
    print(f"  {key}: rank {ranks[key]:.3f}, frequency {freqs.get(key, 0.0):.2f}")

route = predict_route(history, graph, ranks, "J", PredictionConfig(horizon=5))
print("predicted from J:", [b for _, b in route.links], f"score {route.score:.3f}")


# ## Does the route hit the obstruction?

verdict = parse_route(route, registry)
print("affected:", verdict.affected, "by", verdict.obstruction.link if verdict.affected else None)
print("J inside the assessment radius:", within_radius(graph, obstruction, "J"))
print("O inside the assessment radius:", within_radius(graph, obstruction, "O"))


# Once the incident closes the same check comes back clean.

apply_event(registry, events[1], graph)
print("after close, affected:", parse_route(route, registry).affected)
