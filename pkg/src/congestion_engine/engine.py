"""Route parsing: does an active obstruction lie on a predicted route?"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .events import Obstruction, ObstructionRegistry
from .geo import segment_distance
from .network import NodeId, TrafficGraph
from .prediction import PredictedRoute


@dataclass(frozen=True)
class ParseVerdict:
    vehicle: object
    affected: bool = False
    obstruction: Optional[Obstruction] = None

    def __post_init__(self):
        if self.affected != (self.obstruction is not None):
            raise ValueError("affected must be set exactly when an obstruction is reported")


def parse_route(prediction: PredictedRoute,
                obstructions: Union[ObstructionRegistry, Iterable[Obstruction]]) -> ParseVerdict:
    """Report the first active obstruction met along the predicted links."""
    if isinstance(obstructions, ObstructionRegistry):
        obstructions = obstructions.active()
    by_link = {obs.link: obs for obs in obstructions if obs.active}
    for key in prediction.links:
        obs = by_link.get(key)
        if obs is not None:
            return ParseVerdict(prediction.vehicle, True, obs)
    return ParseVerdict(prediction.vehicle)


def within_radius(graph: TrafficGraph, obstruction: Obstruction, node: NodeId) -> bool:
    """Whether ``node`` lies inside the obstruction's assessment radius.

    Distance is measured to the obstructed link's segment. Graphs without
    coordinates treat every node as inside.
    """
    if not graph.has_positions:
        return True
    lat, lon = graph.position(node)
    src, dst = obstruction.link
    return segment_distance(lat, lon, graph.position(src), graph.position(dst)) <= obstruction.radius
