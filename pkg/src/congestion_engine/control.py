"""Feedback laws regulating access to an obstructed link.

Irregular obstructions get an admission probability computed from the
current headroom ``e = c - x``. Regular obstructions get a low-pass
filtered coefficient ``gamma`` of the same headroom ratio, which is
broadcast to the vehicles and combined with their allocation history.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional


class InactiveObstructionError(RuntimeError):
    pass


def headroom_ratio(error: float, capacity: float) -> float:
    """Piecewise map of the headroom onto [0, 1].

    0 when the link is at or over capacity, ``e/c`` in between and 1 when
    the link is empty. ``e > c`` cannot happen for ``x >= 0`` but is
    clamped to 1.
    """
    if error <= 0:
        return 0.0
    if error < capacity:
        return error / capacity
    return 1.0


@dataclass
class ControllerState:
    link: tuple
    capacity: int
    occupancy: int = 0
    gamma: Optional[float] = None
    alpha: float = 0.1
    active: bool = True

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")
        if self.occupancy < 0:
            raise ValueError("occupancy must be >= 0")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.gamma is not None and not 0 <= self.gamma <= 1:
            raise ValueError("gamma must be in [0, 1]")

    @property
    def error(self) -> int:
        return self.capacity - self.occupancy


def admission_probability(state: ControllerState) -> float:
    return headroom_ratio(state.error, state.capacity)


def gamma_step(state: ControllerState) -> float:
    """``alpha * gamma + (1 - alpha) * g(e)``; an unset gamma starts at ``g(e)``."""
    g = headroom_ratio(state.error, state.capacity)
    if state.gamma is None:
        return g
    return state.alpha * state.gamma + (1.0 - state.alpha) * g


def controller_output(state: ControllerState, kind: str) -> float:
    """Admission probability (irregular) or next gamma (regular)."""
    if not state.active:
        raise InactiveObstructionError(f"obstruction on {state.link} is not active")
    if kind == "irregular":
        return admission_probability(state)
    if kind == "regular":
        return gamma_step(state)
    raise ValueError(f"unknown obstruction kind {kind!r}")


class LinkController:
    """Per-obstruction controller sampled once per tick.

    ``tick(x)`` records the occupancy ``x(k)`` and returns the signal
    broadcast during tick ``k``: the admission probability for irregular
    obstructions, or ``gamma(k)`` for regular ones. ``gamma(0)`` is
    ``g(e(0))``; afterwards ``gamma(k+1)`` is filtered from ``e(k)``.
    """

    def __init__(self, link, capacity, kind="irregular", alpha=0.1):
        self.kind = kind
        self.state = ControllerState(tuple(link), int(capacity), alpha=alpha)
        self._next_gamma: Optional[float] = None
        self.output: Optional[float] = None

    def tick(self, occupancy: int) -> float:
        self.state = replace(self.state, occupancy=int(occupancy), gamma=self._next_gamma)
        if self.kind == "regular":
            if self.state.gamma is None:
                self.state.gamma = headroom_ratio(self.state.error, self.state.capacity)
            self.output = self.state.gamma
            self._next_gamma = controller_output(self.state, "regular")
        else:
            self.output = controller_output(self.state, "irregular")
        return self.output

    def deactivate(self):
        self.state.active = False
