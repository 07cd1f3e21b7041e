"""Built-in desk-scale test network.

Five parallel routes A-E leave a junction J and merge again at M. Route A
is the direct one and carries most of the traffic; its first link J->A1 is
centred on the Cashel Rd North coordinates so that the incident message
used in the experiments matches it.

::

    O --> J --> A1 --> M --> D        (route A)
          J --> B1 --> M              (routes B..E via B1..E1)
"""

import math

from ..network import Link, TrafficGraph

CASHEL_RD = (53.322340, -6.306612)
URBAN_SPEED = 50 / 3.6
DETOUR_LEG_M = 450.0
# short approach: vehicles are assessed about two ticks before they reach J
APPROACH_M = 20.0

ROUTE_NAMES = ("A", "B", "C", "D", "E")
# vehicles per tick entering each route
DEFAULT_DEMAND = {"A": 0.15, "B": 0.01, "C": 0.005, "D": 0.0025, "E": 0.0}

_LAYOUT_M = {
    "O": (-70.0, 0.0),
    "J": (-50.0, 0.0),
    "A1": (50.0, 0.0),
    "B1": (350.0, 300.0),
    "C1": (350.0, -300.0),
    "D1": (350.0, 600.0),
    "E1": (350.0, -600.0),
    "M": (750.0, 0.0),
    "D": (900.0, 0.0),
}


def _to_latlon(x, y, origin=CASHEL_RD):
    lat0, lon0 = origin
    dlat = y / 111_195.0
    dlon = x / (111_195.0 * math.cos(math.radians(lat0)))
    return (round(lat0 + dlat, 6), round(lon0 + dlon, 6))


def five_route_network(capacity: int = 50):
    """Return ``(graph, routes)`` for the five-route network."""
    positions = {n: _to_latlon(*xy) for n, xy in _LAYOUT_M.items()}
    links = [
        Link("O", "J", APPROACH_M, URBAN_SPEED, capacity),
        Link("J", "A1", 100.0, URBAN_SPEED, capacity),
        Link("A1", "M", 700.0, URBAN_SPEED, capacity),
        Link("M", "D", 150.0, URBAN_SPEED, capacity),
    ]
    for name in ROUTE_NAMES[1:]:
        via = f"{name}1"
        links.append(Link("J", via, DETOUR_LEG_M, URBAN_SPEED, capacity))
        links.append(Link(via, "M", DETOUR_LEG_M, URBAN_SPEED, capacity))
    graph = TrafficGraph(list(_LAYOUT_M), links, positions)
    routes = {"A": ["O", "J", "A1", "M", "D"]}
    for name in ROUTE_NAMES[1:]:
        routes[name] = ["O", "J", f"{name}1", "M", "D"]
    return graph, {name: graph.path_from_nodes(nodes) for name, nodes in routes.items()}
