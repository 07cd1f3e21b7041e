"""Topological edge ranking and per-vehicle link usage frequencies."""

from __future__ import annotations

import csv
import io
import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional

import numpy as np
from scipy import sparse

from .network import HistoryGraph, LinkKey, TrafficGraph

log = logging.getLogger(__name__)

EdgeRanks = Dict[LinkKey, float]
EdgeFrequencies = Dict[LinkKey, float]


class RankingError(RuntimeError):
    """The rank iteration failed to converge."""

    def __init__(self, message, residual, iterations):
        super().__init__(f"{message} (residual {residual:.3e} after {iterations} iterations)")
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class RankingConfig:
    damping: float = 0.93
    tolerance: float = 1e-9
    max_iterations: int = 10_000
    # True: each in-neighbor's rank is split over its out-degree.
    # False: the plain unnormalized sum, which diverges on dense graphs.
    normalize: bool = True

    def __post_init__(self):
        if not 0 < self.damping < 1:
            raise ValueError(f"damping must be in (0, 1), got {self.damping}")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


def line_graph_matrix(graph: TrafficGraph, normalize: bool = True, links: Optional[List[LinkKey]] = None):
    """Propagation matrix ``T`` on the directed line graph.

    ``T[e, p]`` is nonzero when link ``p`` feeds link ``e``; with
    ``normalize`` it equals ``1 / outdeg(p)``. Returns the CSR matrix and
    the link order used for its rows/columns.
    """
    keys = list(links) if links is not None else graph.link_keys()
    index = {k: i for i, k in enumerate(keys)}
    rows, cols, vals = [], [], []
    for p in keys:
        successors = [q for q in graph.out_neighbors(p) if q in index]
        if not successors:
            continue
        share = 1.0 / len(successors) if normalize else 1.0
        for q in successors:
            rows.append(index[q])
            cols.append(index[p])
            vals.append(share)
    n = len(keys)
    mat = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n), dtype=float)
    return mat, keys


def rank_edges(graph: TrafficGraph, config: RankingConfig = RankingConfig(),
               links: Optional[List[LinkKey]] = None) -> EdgeRanks:
    """Rank links with the damped recursion ``r = (1-d) + d T r``.

    Iterates from all-ones. With normalization the columns of ``T`` sum
    to at most 1, so ``d T`` contracts in the 1-norm and the distance to
    the fixed point is at most ``d / (1 - d)`` times the last step; the
    iteration stops once that bound is below ``config.tolerance``. The
    unnormalized mode has no such bound and stops on the max-norm step.
    Passing ``links`` restricts the computation to that sub-network.
    """
    if len(graph) == 0:
        raise ValueError("cannot rank an empty graph")
    mat, keys = line_graph_matrix(graph, config.normalize, links)
    d = config.damping
    base = 1.0 - d
    r = np.ones(len(keys))
    residual = np.inf
    for it in range(1, config.max_iterations + 1):
        nxt = base + d * (mat @ r)
        step = np.abs(nxt - r)
        if config.normalize:
            residual = float(step.sum()) * d / base
        else:
            residual = float(step.max()) if len(r) else 0.0
        r = nxt
        if not np.isfinite(residual) or residual > 1e150:
            raise RankingError("rank iteration diverged", residual, it)
        if residual < config.tolerance:
            log.debug("ranks converged in %d iterations", it)
            return dict(zip(keys, r.tolist()))
    raise RankingError("rank iteration did not converge", residual, config.max_iterations)


def reachable_links(graph: TrafficGraph, entry: LinkKey) -> List[LinkKey]:
    """Links reachable from ``entry`` along the line graph (entry included)."""
    seen = {tuple(entry)}
    order = [tuple(entry)]
    queue = deque(order)
    while queue:
        for nxt in graph.out_neighbors(queue.popleft()):
            if nxt not in seen:
                seen.add(nxt)
                order.append(nxt)
                queue.append(nxt)
    return order


def rank_edges_by_entry(graph: TrafficGraph, entries: Iterable[LinkKey],
                        config: RankingConfig = RankingConfig()) -> Dict[LinkKey, EdgeRanks]:
    """One ranking per boundary entry link, each over its reachable sub-network."""
    return {tuple(e): rank_edges(graph, config, reachable_links(graph, e)) for e in entries}


def edge_frequencies(history: HistoryGraph, graph: TrafficGraph) -> EdgeFrequencies:
    """Usage frequency of every link in ``history``.

    ``f(l,m) = w(l,m) / sum of w over the links entering l``. A zero
    denominator gives 0. Trips that start at ``l`` are not counted in the
    denominator, so the ratio can exceed 1; it is capped there.
    """
    freqs = {}
    for key in history:
        denom = sum(history.weight(p) for p in graph.in_neighbors(key))
        freqs[key] = 0.0 if denom == 0 else min(1.0, history.weight(key) / denom)
    return freqs


def to_csv(values: Dict[LinkKey, float], header: str = "value") -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["link_from", "link_to", header])
    for (src, dst), v in sorted(values.items(), key=lambda kv: (str(kv[0][0]), str(kv[0][1]))):
        writer.writerow([src, dst, repr(float(v))])
    return buf.getvalue()
