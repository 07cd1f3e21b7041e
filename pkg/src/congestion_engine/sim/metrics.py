"""Per-tick telemetry of a simulation run and its CSV files.

``flows.csv``       tick, route, entered, vehicles
``occupancy.csv``   tick, link_from, link_to, role, x, e, output
``decisions.csv``   tick, vehicle, kind, p_allocation, granted, chosen_from, chosen_to, ignored
``allocations.csv`` tick, vehicle, y_bar

``role`` is ``obstructed`` or ``alternative``. For the obstructed link
``output`` is the controller signal (admission probability or gamma); for
an alternative it is the re-routing probability. Empty cells mean the
value does not apply in that mode. ``vehicles`` counts the vehicles on the
links that only that route uses.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

HEADERS = {
    "flows": ("tick", "route", "entered", "vehicles"),
    "occupancy": ("tick", "link_from", "link_to", "role", "x", "e", "output"),
    "decisions": ("tick", "vehicle", "kind", "p_allocation", "granted", "chosen_from", "chosen_to", "ignored"),
    "allocations": ("tick", "vehicle", "y_bar"),
}


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return "/".join(str(p) for p in v)
    return v


@dataclass
class Metrics:
    flows: List[tuple] = field(default_factory=list)
    occupancy: List[tuple] = field(default_factory=list)
    decisions: List[tuple] = field(default_factory=list)
    allocations: List[tuple] = field(default_factory=list)

    def write(self, out_dir) -> Dict[str, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {}
        for name, header in HEADERS.items():
            path = out / f"{name}.csv"
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(header)
                writer.writerows([_cell(v) for v in row] for row in getattr(self, name))
            paths[name] = path
        return paths

    def occupancy_trace(self, link, role: str = "obstructed") -> np.ndarray:
        """Occupancy per tick of ``link`` in the given role."""
        src, dst = link
        return np.array([r[4] for r in self.occupancy if r[1] == src and r[2] == dst and r[3] == role])

    def alternative_traces(self) -> Dict[tuple, np.ndarray]:
        traces: Dict[tuple, list] = {}
        for r in self.occupancy:
            if r[3] == "alternative":
                traces.setdefault((r[1], r[2]), []).append(r[4])
        return {k: np.array(v) for k, v in traces.items()}

    def route_trace(self, route: str) -> np.ndarray:
        return np.array([r[3] for r in self.flows if r[1] == route])


def tail(series: np.ndarray, fraction: float) -> np.ndarray:
    """Last ``fraction`` of a series."""
    n = len(series)
    return series[n - int(round(n * fraction)):]


def coefficient_of_variation(values) -> float:
    values = np.asarray(values, dtype=float)
    mean = values.mean()
    return float(values.std() / mean) if mean > 0 else float("inf")


def alternative_spread(metrics: Metrics, fraction: float = 0.25) -> float:
    """CV across alternatives of their mean occupancy over the final part of a run."""
    means = [tail(trace, fraction).mean() for trace in metrics.alternative_traces().values()]
    return coefficient_of_variation(means)
