"""Per-vehicle coin tosses deciding between the obstructed link and a detour."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .balancer import AlternativeSet, BalanceVector


@dataclass
class AllocationHistory:
    """Grant record ``y`` of one vehicle and its running mean.

    New histories start with a single grant so the fairness weight is
    finite from the first request.
    """

    vehicle: object = None
    y: List[int] = field(default_factory=lambda: [1])
    _granted: int = field(init=False, repr=False)

    def __post_init__(self):
        if any(v not in (0, 1) for v in self.y):
            raise ValueError("allocation entries must be 0 or 1")
        self.y = list(self.y)
        self._granted = sum(self.y)

    def __len__(self):
        return len(self.y)

    @property
    def mean(self) -> float:
        if not self.y:
            return 0.0
        return self._granted / len(self.y)

    def record(self, granted: bool) -> "AllocationHistory":
        self.y.append(1 if granted else 0)
        self._granted += 1 if granted else 0
        return self


def update_history(history: AllocationHistory, granted: bool) -> AllocationHistory:
    return history.record(granted)


@dataclass(frozen=True)
class FairnessConfig:
    """``phi(z) = scale * z ** power``, strictly increasing on (0, 1]."""

    scale: float = 4.0
    power: float = 3.0
    h_cap: float = 1e6

    def __post_init__(self):
        if self.scale <= 0 or self.power <= 0:
            raise ValueError("phi must be strictly increasing: scale and power must be positive")
        if self.h_cap <= 0:
            raise ValueError("h_cap must be positive")

    def phi(self, z: float) -> float:
        return self.scale * z ** self.power


def history_weight(history: AllocationHistory, config: FairnessConfig = FairnessConfig()) -> float:
    """``ybar / phi(ybar)``, capped at ``config.h_cap``."""
    ybar = history.mean
    if ybar <= 0:
        return config.h_cap
    return min(config.h_cap, ybar / config.phi(ybar))


def allocation_probability(kind: str, output: float, history: Optional[AllocationHistory] = None,
                           config: FairnessConfig = FairnessConfig()) -> float:
    if kind == "irregular":
        return output
    if kind == "regular":
        if history is None:
            raise ValueError("regular obstructions need the vehicle's allocation history")
        return min(1.0, output * history_weight(history, config))
    raise ValueError(f"unknown obstruction kind {kind!r}")


@dataclass(frozen=True)
class RouteDecision:
    vehicle: object
    link: tuple
    granted: bool
    draws: int
    alternative: Optional[int] = None


def pick_index(probabilities, u: float) -> int:
    """Inverse-CDF selection of an index for a uniform draw ``u``."""
    cum = 0.0
    last = None
    for j, p in enumerate(probabilities):
        if p <= 0:
            continue
        cum += p
        last = j
        if u < cum:
            return j
    if last is None:
        raise ValueError("probability vector has no positive entry")
    return last


def decide_route(vehicle, p_allocation: float, balance: BalanceVector, alternatives: AlternativeSet,
                 rng: np.random.Generator, history: Optional[AllocationHistory] = None) -> RouteDecision:
    """Toss for the obstructed link, then (if denied) for an alternative.

    When ``history`` is given the outcome is appended to it.
    """
    u1 = rng.random()
    if u1 < p_allocation:
        decision = RouteDecision(vehicle, alternatives.obstructed, True, 1)
    else:
        j = pick_index(balance.probabilities, rng.random())
        decision = RouteDecision(vehicle, alternatives.alternatives[j], False, 2, j)
    if history is not None:
        history.record(decision.granted)
    return decision
