"""Command-line front end.

Set ``CONGESTION_ENGINE_LOG`` to a level name (``DEBUG``, ``INFO``, ...)
to see progress messages on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from . import __version__
from .events import EventParseError, IncidentOpen, match_link, parse_event, read_feed
from .network import NetworkError, load_edge_list, load_trips
from .prediction import PredictionConfig, predict_route
from .ranking import RankingConfig, RankingError, rank_edges, to_csv
from .sim.harness import HarnessConfigError, load_harness_config, run_regular_harness, write_traces
from .sim.scenario import MODES, ScenarioError, load_scenario
from .sim.world import run_scenario

PROG = "congestion-engine"
log = logging.getLogger("congestion_engine")


def _probability(text):
    value = float(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError(f"must be in (0, 1), got {text}")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def _positive_float(text):
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Route-level access control for obstructed road links.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    p = sub.add_parser("run", help="run a scenario and write its metrics CSVs",
                       description="Run a scenario and write flows, occupancy, decisions and allocations CSVs.")
    p.add_argument("scenario", help="scenario INI file")
    p.add_argument("--seed", type=int, help="random seed (overrides the file)")
    p.add_argument("--mode", choices=MODES, help="simulation mode")
    p.add_argument("--out-dir", default="out", help="directory for the CSV files (default: out)")
    p.add_argument("--duration", type=_positive_int, help="run length in ticks")
    p.add_argument("--capacity", type=_positive_int, help="capacity of obstructed links")
    p.add_argument("--alpha", type=_probability, help="gamma filter coefficient")
    p.add_argument("--damping", type=_probability, help="edge rank damping factor")
    p.add_argument("--horizon", type=_positive_int, help="prediction depth in links")
    p.add_argument("--radius", type=_positive_float, help="assessment radius in metres")

    p = sub.add_parser("rank", help="print edge ranks of a network as CSV",
                       description="Print the edge ranks of a network as CSV.")
    p.add_argument("network", help="edge-list file")
    p.add_argument("--damping", type=_probability, default=0.93, help="damping factor (default: 0.93)")

    p = sub.add_parser("predict", help="predict a vehicle's route from its trip history",
                       description="Predict the most likely continuation from NODE given a trip history.")
    p.add_argument("network", help="edge-list file")
    p.add_argument("history", help="trip file, one node sequence per line")
    p.add_argument("node", help="node the prediction starts from")
    p.add_argument("--horizon", type=_positive_int, default=5, help="prediction depth in links (default: 5)")
    p.add_argument("--damping", type=_probability, default=0.93, help="damping factor (default: 0.93)")

    p = sub.add_parser("parse-event", help="parse incident messages read from stdin",
                       description="Parse incident messages from stdin, one per line, and print one JSON "
                                   "record per message. Errors go to stderr.")
    p.add_argument("--network", help="edge-list file used to match incidents to links")
    p.add_argument("--nodes", help="node coordinate file for --network")
    p.add_argument("--radius", type=_positive_float, default=575.0,
                   help="assessment radius reported for opened incidents (default: 575)")

    p = sub.add_parser("regular-harness", help="run the regular-obstruction fairness experiment",
                       description="Run the regular-obstruction fairness experiment for each configured capacity.")
    p.add_argument("config", help="harness INI file")
    p.add_argument("--seed", type=int, help="random seed (overrides the file)")
    p.add_argument("--capacity", type=_positive_int, help="single capacity (overrides the file)")
    p.add_argument("--alpha", type=_probability, help="gamma filter coefficient")
    p.add_argument("--beta", type=float, help="random-walk gain")
    p.add_argument("--out-dir", help="write ybar.csv with the per-request traces here")

    p = sub.add_parser("validate", help="check a scenario file without running it",
                       description="Check a scenario file without running it.")
    p.add_argument("scenario", help="scenario INI file")
    return parser


def _cmd_run(args) -> int:
    scenario = load_scenario(args.scenario).with_overrides(
        seed=args.seed, mode=args.mode, duration=args.duration, capacity=args.capacity,
        alpha=args.alpha, damping=args.damping, horizon=args.horizon, radius=args.radius,
    ).validate()
    log.info("running %s: mode=%s seed=%d duration=%d", args.scenario, scenario.mode, scenario.seed,
             scenario.duration)
    paths = run_scenario(scenario).write(args.out_dir)
    for path in paths.values():
        print(path)
    return 0


def _cmd_rank(args) -> int:
    graph = load_edge_list(args.network)
    sys.stdout.write(to_csv(rank_edges(graph, RankingConfig(damping=args.damping)), "rank"))
    return 0


def _cmd_predict(args) -> int:
    graph = load_edge_list(args.network)
    if args.node not in graph.nodes:
        raise NetworkError(f"unknown node {args.node!r}")
    history = load_trips(args.history, graph)
    ranks = rank_edges(graph, RankingConfig(damping=args.damping))
    route = predict_route(history, graph, ranks, args.node, PredictionConfig(args.horizon))
    if not route:
        print(f"no recorded trip leaves {args.node}", file=sys.stderr)
        return 1
    nodes = [route.links[0][0]] + [b for _, b in route.links]
    print(" ".join(str(n) for n in nodes))
    print(f"score {route.score!r}")
    return 0


def _event_record(event, graph, radius):
    rec = {"event": "open" if isinstance(event, IncidentOpen) else "close", "location": event.location}
    if isinstance(event, IncidentOpen):
        rec.update(latitude=event.latitude, longitude=event.longitude, max_capacity=event.max_capacity,
                   max_speed_kmh=event.max_speed)
    rec["time"] = event.timestamp.strftime("%Y-%m-%dT%H:%M:%SZ")
    if isinstance(event, IncidentOpen) and graph is not None:
        rec["link"] = list(match_link(graph, event.latitude, event.longitude))
        rec["radius_m"] = radius
    return rec


def _cmd_parse_event(args) -> int:
    graph = None
    if args.network:
        graph = load_edge_list(args.network, args.nodes)
        if not graph.has_positions:
            raise NetworkError("matching incidents to links needs node coordinates (--nodes)")
    elif args.nodes:
        raise NetworkError("--nodes needs --network")
    failures = 0
    for lineno, text in read_feed(sys.stdin):
        try:
            event = parse_event(text)
            record = _event_record(event, graph, args.radius)
        except (EventParseError, NetworkError) as exc:
            failures += 1
            print(f"line {lineno}: {exc}", file=sys.stderr)
            continue
        print(json.dumps(record))
    return 1 if failures else 0


def _cmd_regular_harness(args) -> int:
    configs, fairness, alpha = load_harness_config(args.config)
    overrides = {k: v for k, v in (("seed", args.seed), ("beta", args.beta)) if v is not None}
    if args.capacity is not None:
        configs = configs[:1]
        overrides["capacity"] = args.capacity
    configs = [replace(c, **overrides) for c in configs]
    alpha = args.alpha if args.alpha is not None else alpha
    runs = []
    print("capacity,level,spread,min_ybar,max_ybar")
    for config in configs:
        log.info("harness: capacity=%d periods=%d seed=%d", config.capacity, config.periods, config.seed)
        run = run_regular_harness(config, fairness, alpha)
        runs.append(run)
        y = run.final_ybar
        print(f"{config.capacity},{run.level!r},{run.spread!r},{float(y.min())!r},{float(y.max())!r}")
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_traces(runs, out / "ybar.csv")
    return 0


def _cmd_validate(args) -> int:
    sc = load_scenario(args.scenario)
    print(f"ok: {len(sc.graph.nodes)} nodes, {len(sc.graph.links)} links, {len(sc.routes)} routes, "
          f"{len(sc.events)} events, mode {sc.mode}")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "rank": _cmd_rank,
    "predict": _cmd_predict,
    "parse-event": _cmd_parse_event,
    "regular-harness": _cmd_regular_harness,
    "validate": _cmd_validate,
}


def _configure_logging():
    level = os.environ.get("CONGESTION_ENGINE_LOG", "WARNING").strip().upper()
    if level.isdigit():
        numeric = int(level)
    else:
        numeric = logging.getLevelName(level)
        if not isinstance(numeric, int):
            print(f"{PROG}: ignoring unknown log level {level!r}", file=sys.stderr)
            numeric = logging.WARNING
    logging.basicConfig(level=numeric, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[List[str]] = None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (ScenarioError, HarnessConfigError, NetworkError, EventParseError, RankingError, ValueError,
            OSError) as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
