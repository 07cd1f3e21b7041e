"""Incident messages, link matching and the obstruction registry.

Two message shapes are accepted, one per line::

    New road incident: <location>. LatLon: <lat>,<lon>. Maxcapacity: <int>. Maxspeed: <speed> [km/h]. Time: <timestamp>.
    Road incident closed: <location>. Time: <timestamp>.

Timestamps are UTC in the form ``YYYY-MM-DDTHH:MM:SSZ``.
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Dict, Iterable, Iterator, List, Optional, Tuple, Union

import numpy as np

from .geo import segment_distance
from .network import LinkKey, TrafficGraph

OPEN_HEADER = "New road incident:"
CLOSE_HEADER = "Road incident closed:"
DEFAULT_RADIUS_M = 575.0
KINDS = ("irregular", "regular")

_TS_FORMAT = "%Y-%m-%dT%H:%M:%SZ"
_RESERVED = ("LatLon:", "Maxcapacity:", "Maxspeed:", "Time:")
_NUMBER = r"[+-]?\d+(?:\.\d+)?"


class EventParseError(ValueError):
    """A message does not follow the incident grammar."""

    def __init__(self, token, message):
        super().__init__(f"{token}: {message}")
        self.token = token


class RegistryError(ValueError):
    pass


def _check_location(location):
    if not isinstance(location, str) or not location or location != location.strip():
        raise ValueError(f"location must be non-empty text without surrounding whitespace: {location!r}")
    if "\n" in location or "\r" in location:
        raise ValueError("location must be a single line")
    for word in _RESERVED:
        if word in location:
            raise ValueError(f"location may not contain {word!r}")


def _utc(ts):
    if not isinstance(ts, datetime):
        raise TypeError(f"timestamp must be a datetime, got {type(ts).__name__}")
    ts = ts.replace(tzinfo=timezone.utc) if ts.tzinfo is None else ts.astimezone(timezone.utc)
    if ts.microsecond:
        raise ValueError("timestamps carry whole seconds only")
    return ts


@dataclass(frozen=True)
class IncidentOpen:
    location: str
    latitude: float
    longitude: float
    max_capacity: int
    max_speed: float
    timestamp: datetime

    def __post_init__(self):
        _check_location(self.location)
        if not (math.isfinite(self.latitude) and abs(self.latitude) <= 90):
            raise ValueError(f"latitude out of range: {self.latitude}")
        if not (math.isfinite(self.longitude) and abs(self.longitude) <= 180):
            raise ValueError(f"longitude out of range: {self.longitude}")
        if isinstance(self.max_capacity, bool) or int(self.max_capacity) != self.max_capacity or self.max_capacity < 1:
            raise ValueError(f"max_capacity must be an integer >= 1, got {self.max_capacity}")
        if not (math.isfinite(self.max_speed) and self.max_speed >= 0):
            raise ValueError(f"max_speed must be >= 0, got {self.max_speed}")
        # coordinates travel at micro-degree precision
        object.__setattr__(self, "latitude", round(float(self.latitude), 6))
        object.__setattr__(self, "longitude", round(float(self.longitude), 6))
        object.__setattr__(self, "max_capacity", int(self.max_capacity))
        object.__setattr__(self, "max_speed", float(self.max_speed) + 0.0)  # no negative zero
        object.__setattr__(self, "timestamp", _utc(self.timestamp))


@dataclass(frozen=True)
class IncidentClose:
    location: str
    timestamp: datetime

    def __post_init__(self):
        _check_location(self.location)
        object.__setattr__(self, "timestamp", _utc(self.timestamp))


Event = Union[IncidentOpen, IncidentClose]


class _Cursor:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def expect(self, literal, token):
        if not self.text.startswith(literal, self.pos):
            found = self.text[self.pos:self.pos + len(literal)] or "end of message"
            raise EventParseError(token, f"expected {literal!r}, found {found!r}")
        self.pos += len(literal)
        self.skip(r"\s*")

    def skip(self, pattern):
        m = re.compile(pattern).match(self.text, self.pos)
        if m:
            self.pos = m.end()

    def value(self, pattern, token, what):
        m = re.compile(pattern).match(self.text, self.pos)
        if not m:
            snippet = self.text[self.pos:self.pos + 30] or "end of message"
            raise EventParseError(token, f"malformed {what} near {snippet!r}")
        self.pos = m.end()
        return m

    def location(self, next_label, token):
        m = re.compile(r"(.+?)\.\s+(?=" + re.escape(next_label) + ")").match(self.text, self.pos)
        if not m:
            raise EventParseError(token, f"location must be followed by '. {next_label}'")
        self.pos = m.end()
        try:
            _check_location(m.group(1))
        except ValueError as exc:
            raise EventParseError(token, str(exc)) from None
        return m.group(1)

    def separator(self, token, last=False):
        if last:
            if self.pos != len(self.text):
                raise EventParseError(token, f"trailing text {self.text[self.pos:]!r}")
            return
        m = re.compile(r"\s+").match(self.text, self.pos)
        if not m:
            raise EventParseError(token, "missing space after '.'")
        self.pos = m.end()


def _timestamp(cur, token):
    m = cur.value(r"(\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z)\.", token, "timestamp")
    try:
        return datetime.strptime(m.group(1), _TS_FORMAT).replace(tzinfo=timezone.utc)
    except ValueError as exc:
        raise EventParseError(token, f"invalid timestamp {m.group(1)!r}: {exc}") from None


def parse_event(text: str) -> Event:
    """Parse one incident message.

    Raises :class:`EventParseError` naming the offending token
    (``Location``, ``LatLon``, ``Maxcapacity``, ``Maxspeed`` or ``Time``).
    """
    cur = _Cursor(text.strip())
    if cur.text.startswith(OPEN_HEADER):
        cur.expect(OPEN_HEADER, "Header")
        location = cur.location("LatLon:", "Location")
        cur.expect("LatLon:", "LatLon")
        m = cur.value(rf"({_NUMBER})\s*,\s*({_NUMBER})\.", "LatLon", "latitude,longitude pair")
        lat, lon = float(m.group(1)), float(m.group(2))
        if abs(lat) > 90:
            raise EventParseError("LatLon", f"latitude out of range: {m.group(1)}")
        if abs(lon) > 180:
            raise EventParseError("LatLon", f"longitude out of range: {m.group(2)}")
        cur.separator("LatLon")
        cur.expect("Maxcapacity:", "Maxcapacity")
        cap = int(cur.value(r"(\d+)\.(?=\s|$)", "Maxcapacity", "integer capacity").group(1))
        if cap < 1:
            raise EventParseError("Maxcapacity", "capacity must be at least 1")
        cur.separator("Maxcapacity")
        cur.expect("Maxspeed:", "Maxspeed")
        speed = float(cur.value(r"(\d+(?:\.\d+)?)\s*\[km/h\]\.", "Maxspeed", "speed '<number> [km/h]'").group(1))
        cur.separator("Maxspeed")
        cur.expect("Time:", "Time")
        ts = _timestamp(cur, "Time")
        cur.separator("Time", last=True)
        try:
            return IncidentOpen(location, lat, lon, cap, speed, ts)
        except ValueError as exc:
            raise EventParseError("Location", str(exc)) from None
    if cur.text.startswith(CLOSE_HEADER):
        cur.expect(CLOSE_HEADER, "Header")
        location = cur.location("Time:", "Location")
        cur.expect("Time:", "Time")
        ts = _timestamp(cur, "Time")
        cur.separator("Time", last=True)
        try:
            return IncidentClose(location, ts)
        except ValueError as exc:
            raise EventParseError("Location", str(exc)) from None
    raise EventParseError("Header", f"message must start with {OPEN_HEADER!r} or {CLOSE_HEADER!r}")


def format_event(event: Event) -> str:
    ts = event.timestamp.strftime(_TS_FORMAT)
    if isinstance(event, IncidentOpen):
        speed = np.format_float_positional(event.max_speed, trim="-")
        return (f"{OPEN_HEADER} {event.location}. LatLon: {event.latitude:.6f},{event.longitude:.6f}. "
                f"Maxcapacity: {event.max_capacity}. Maxspeed: {speed} [km/h]. Time: {ts}.")
    if isinstance(event, IncidentClose):
        return f"{CLOSE_HEADER} {event.location}. Time: {ts}."
    raise TypeError(f"not an incident event: {event!r}")


def read_feed(lines: Iterable[str]) -> Iterator[Tuple[int, str]]:
    """Yield ``(line_number, text)`` for every non-blank line of a feed."""
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if line:
            yield lineno, line


def match_link(graph: TrafficGraph, lat: float, lon: float) -> LinkKey:
    """Nearest link to a coordinate, by distance to the link's segment.

    Links within a nanometre of the best distance count as tied; the
    lexicographically smallest key wins.
    """
    if not graph.has_positions:
        raise ValueError("graph has no node coordinates")
    dists = []
    for link in graph.links:
        d = segment_distance(lat, lon, graph.position(link.source), graph.position(link.target))
        dists.append((d, link.key))
    best = min(d for d, _ in dists)
    return min((k for d, k in dists if d <= best + 1e-9), key=lambda k: (str(k[0]), str(k[1])))


@dataclass
class Obstruction:
    link: LinkKey
    capacity: int
    speed_kmh: float
    location: str = ""
    kind: str = "irregular"
    radius: float = DEFAULT_RADIUS_M
    active: bool = True
    opened_at: Optional[datetime] = None
    closed_at: Optional[datetime] = None

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError("obstruction capacity must be >= 1")
        if self.radius <= 0:
            raise ValueError("assessment radius must be positive")
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")

    @property
    def speed(self) -> float:
        """Reduced speed in meters per second."""
        return self.speed_kmh / 3.6


class ObstructionRegistry:
    """Single-writer store of obstructions keyed by link."""

    def __init__(self, graph: TrafficGraph, kind: str = "irregular", radius: float = DEFAULT_RADIUS_M):
        if kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
        self.graph = graph
        self.kind = kind
        self.radius = radius
        self.history: List[Obstruction] = []
        self._active: Dict[LinkKey, Obstruction] = {}

    def __len__(self):
        return len(self.history)

    def active(self) -> List[Obstruction]:
        return list(self._active.values())

    def active_on(self, link: LinkKey) -> Optional[Obstruction]:
        return self._active.get(tuple(link))

    def open(self, obstruction: Obstruction) -> Obstruction:
        self.graph.link(obstruction.link)
        if obstruction.link in self._active:
            raise RegistryError(f"link {obstruction.link} already has an active obstruction")
        self._active[obstruction.link] = obstruction
        self.history.append(obstruction)
        return obstruction

    def apply(self, event: Event, kind: Optional[str] = None, capacity: Optional[int] = None,
              speed_kmh: Optional[float] = None) -> Obstruction:
        """Open or close an obstruction from an incident message.

        ``capacity`` and ``speed_kmh`` override the message values.
        """
        if isinstance(event, IncidentOpen):
            link = match_link(self.graph, event.latitude, event.longitude)
            return self.open(Obstruction(
                link=link,
                capacity=int(capacity if capacity is not None else event.max_capacity),
                speed_kmh=float(speed_kmh if speed_kmh is not None else event.max_speed),
                location=event.location,
                kind=kind or self.kind,
                radius=self.radius,
                opened_at=event.timestamp,
            ))
        if isinstance(event, IncidentClose):
            for link, obs in self._active.items():
                if obs.location == event.location:
                    obs.active = False
                    obs.closed_at = event.timestamp
                    del self._active[link]
                    return obs
            raise RegistryError(f"no active incident at {event.location!r}")
        raise TypeError(f"not an incident event: {event!r}")

    def effective_speed(self, link: LinkKey) -> float:
        """Current speed limit of a link in meters per second."""
        obs = self._active.get(tuple(link))
        free = self.graph.link(link).free_speed
        return min(free, obs.speed) if obs is not None else free

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["link_from", "link_to", "capacity", "speed_kmh", "kind", "opened_at", "closed_at"])
        for obs in self.history:
            writer.writerow([obs.link[0], obs.link[1], obs.capacity, repr(obs.speed_kmh), obs.kind,
                             obs.opened_at.strftime(_TS_FORMAT) if obs.opened_at else "",
                             obs.closed_at.strftime(_TS_FORMAT) if obs.closed_at else ""])
        return buf.getvalue()


def apply_event(registry: ObstructionRegistry, event: Event, graph: Optional[TrafficGraph] = None,
                **overrides) -> ObstructionRegistry:
    if graph is not None and graph is not registry.graph:
        raise RegistryError("event applied against a different graph than the registry's")
    registry.apply(event, **overrides)
    return registry
