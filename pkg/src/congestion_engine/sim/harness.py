"""Fairness experiment for a regular (periodic) obstruction.

The link is not simulated. Its headroom ``e(k)`` is a clipped integer
random walk on ``[0, c]`` and the controller filters ``g(e(k))`` into
``gamma(k)``. Each vehicle asks for access a fixed number of times per
period at uniformly drawn ticks and tosses a coin with probability
``min(1, gamma * H(ybar))``.

The walk and the filter run on without a reset from one period to the
next, so a period is just the window in which requests are scheduled.
"""

from __future__ import annotations

import configparser
import csv
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np
from scipy.signal import lfilter

from ..control import headroom_ratio
from ..determination import AllocationHistory, FairnessConfig, allocation_probability

_WALK, _SCHEDULE, _COINS = 0, 1, 2


@dataclass(frozen=True)
class RandomWalkConfig:
    capacity: int = 3
    beta: float = 0.35
    periods: int = 365
    period_length: int = 57_600  # 16 h of 1 s ticks
    requests: int = 2
    vehicles: int = 10
    seed: int = 0
    initial_error: Optional[int] = None  # defaults to c, an empty link

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        if self.periods < 1 or self.period_length < 1:
            raise ValueError("periods and period_length must be positive")
        if self.requests < 0 or self.vehicles < 1:
            raise ValueError("need at least one vehicle and a non-negative request count")
        if self.requests > self.period_length:
            raise ValueError("more requests than ticks in a period")
        if self.initial_error is not None and not 0 <= self.initial_error <= self.capacity:
            raise ValueError("initial_error must lie in [0, capacity]")

    @property
    def start(self) -> int:
        return self.capacity if self.initial_error is None else self.initial_error


@dataclass
class RegularRun:
    config: RandomWalkConfig
    histories: List[AllocationHistory]
    traces: List[np.ndarray]  # ybar after each request, per vehicle
    mean_gamma: np.ndarray  # per period
    final_error: int
    final_gamma: float = field(default=0.0)

    @property
    def final_ybar(self) -> np.ndarray:
        return np.array([h.mean for h in self.histories])

    @property
    def level(self) -> float:
        """Common converged level: the mean of the final ``ybar``."""
        return float(self.final_ybar.mean())

    @property
    def spread(self) -> float:
        """``(max - min) / mean`` of the final ``ybar``."""
        y = self.final_ybar
        return float((y.max() - y.min()) / y.mean()) if y.mean() > 0 else float("inf")


def random_walk(rng: np.random.Generator, length: int, capacity: int, beta: float, start: int) -> np.ndarray:
    """Integer walk with steps ``round(beta * N(0, 1))`` clipped to ``[0, capacity]``."""
    steps = np.rint(beta * rng.standard_normal(length)).astype(np.int64)
    walk = np.empty(length, dtype=np.int64)
    cur, last = int(start), 0
    # only a small share of steps is non-zero for small beta
    for i in np.flatnonzero(steps):
        walk[last:i] = cur
        cur = min(capacity, max(0, cur + int(steps[i])))
        last = i
    walk[last:] = cur
    return walk


def filter_gamma(g: np.ndarray, gamma0: float, alpha: float):
    """``gamma(k)`` for every tick of ``g`` given ``gamma(0) = gamma0``.

    Returns the trace and ``gamma`` for the tick after the last one. The
    filter runs on ``g - gamma0`` so a constant input equal to ``gamma0``
    leaves gamma exactly where it is.
    """
    dev, _ = lfilter([1.0 - alpha], [1.0, -alpha], np.asarray(g, dtype=float) - gamma0, zi=[0.0])
    nxt = gamma0 + dev
    trace = np.empty(len(nxt))
    trace[0] = gamma0
    trace[1:] = nxt[:-1]
    return trace, float(nxt[-1])


def run_regular_harness(config: RandomWalkConfig = RandomWalkConfig(),
                        fairness: FairnessConfig = FairnessConfig(), alpha: float = 0.1) -> RegularRun:
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0, 1)")
    c, L = config.capacity, config.period_length
    walk_rng = np.random.default_rng([config.seed, _WALK])
    sched_rng = np.random.default_rng([config.seed, _SCHEDULE])
    coins = [np.random.default_rng([config.seed, _COINS, v]) for v in range(config.vehicles)]
    histories = [AllocationHistory(v) for v in range(config.vehicles)]
    traces: List[list] = [[] for _ in range(config.vehicles)]
    mean_gamma = np.empty(config.periods)

    e = config.start
    gamma = headroom_ratio(e, c)
    for p in range(config.periods):
        walk = random_walk(walk_rng, L, c, config.beta, e)
        e = int(walk[-1])
        g = np.clip(walk / c, 0.0, 1.0)
        trace, gamma = filter_gamma(g, gamma, alpha)
        mean_gamma[p] = trace.mean()

        ticks = np.stack([sched_rng.choice(L, size=config.requests, replace=False)
                          for _ in range(config.vehicles)])
        # requests are served in time order, ties by vehicle id
        for t, v in sorted((int(t), v) for v in range(config.vehicles) for t in ticks[v]):
            hist = histories[v]
            prob = allocation_probability("regular", float(trace[t]), hist, fairness)
            hist.record(bool(coins[v].random() < prob))
            traces[v].append(hist.mean)

    return RegularRun(config, histories, [np.array(t) for t in traces], mean_gamma, e, gamma)


class HarnessConfigError(ValueError):
    pass


def load_harness_config(path) -> Tuple[List[RandomWalkConfig], FairnessConfig, float]:
    """Read a harness INI file into one walk config per capacity."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise HarnessConfigError(f"cannot read harness config {path}: {exc}") from None
    except configparser.Error as exc:
        raise HarnessConfigError(f"{path}: {exc}") from None
    if "harness" not in parser:
        raise HarnessConfigError(f"{path}: missing [harness] section")
    sec = parser["harness"]
    known = {"capacity", "beta", "periods", "period_length", "requests", "vehicles", "seed",
             "initial_error", "alpha", "phi_scale", "phi_power", "h_cap"}
    unknown = set(sec) - known
    if unknown:
        raise HarnessConfigError(f"{path}: unknown keys {sorted(unknown)}")
    try:
        capacities = [int(v) for v in sec.get("capacity", "3").replace(",", " ").split()]
        base = RandomWalkConfig(
            capacity=capacities[0] if capacities else 3,
            beta=sec.getfloat("beta", 0.35),
            periods=sec.getint("periods", 365),
            period_length=sec.getint("period_length", 57_600),
            requests=sec.getint("requests", 2),
            vehicles=sec.getint("vehicles", 10),
            seed=sec.getint("seed", 0),
            initial_error=sec.getint("initial_error", None),
        )
        configs = [replace(base, capacity=c) for c in capacities] or [base]
        fairness = FairnessConfig(sec.getfloat("phi_scale", 4.0), sec.getfloat("phi_power", 3.0),
                                  sec.getfloat("h_cap", 1e6))
        alpha = sec.getfloat("alpha", 0.1)
    except ValueError as exc:
        raise HarnessConfigError(f"{path}: {exc}") from None
    if not 0 < alpha < 1:
        raise HarnessConfigError(f"{path}: alpha must be in (0, 1)")
    return configs, fairness, alpha


def write_traces(runs: List[RegularRun], path):
    """Write ``capacity,vehicle,request,ybar`` rows for every run."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("capacity", "vehicle", "request", "ybar"))
        for run in runs:
            for v, trace in enumerate(run.traces):
                for i, y in enumerate(trace):
                    w.writerow((run.config.capacity, v, i + 1, repr(float(y))))
