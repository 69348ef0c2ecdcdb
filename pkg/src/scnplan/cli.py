"""Command-line front end.

Subcommands: plan, anneal, ilp-export, validate, oracle, gen-traffic,
experiment. Topologies come from JSON files or the bundled names
(n6s9, nsf14, walkthrough6); traffic and solutions are JSON documents.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .allocation import Solution
from .errors import ScnPlanError
from .harness import (
    ExperimentPlan,
    TrafficProfile,
    generate_traffic,
    run_experiment,
    write_result_files,
)
from .heuristic import plan as run_plan
from .ilp import (
    ModelPhase,
    emit_full_model,
    emit_relaxed_model,
    validate_solution,
    warm_start_values,
    weak_lower_bound,
    write_warm_start,
)
from .instance import Instance, dump_requests, load_requests
from .oracle import OracleLimits, exact_solve
from .physical import default_physics, load_physics, simplified_physics
from .siman import AnnealConfig, optimize_sequence, write_trace
from .topology import bundled_topology, lane_profile, load_topology


def _load_net(args):
    path = Path(args.topology)
    if path.exists():
        network, profile = load_topology(path)
    else:
        network, profile = bundled_topology(args.topology)
    if args.lane_mode:
        profile = lane_profile(network.lanes_per_link, args.lane_mode)
    return network, profile


def _load_physics(args):
    if args.physics == "full":
        return default_physics()
    if args.physics == "simplified":
        return simplified_physics()
    return load_physics(Path(args.physics))


def _build_instance(args) -> Instance:
    network, profile = _load_net(args)
    requests = load_requests(Path(args.traffic))
    return Instance(network, profile, requests, _load_physics(args), args.k)


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _add_common(p, traffic=True):
    p.add_argument("--topology", required=True,
                   help="topology JSON file or bundled name (n6s9, nsf14, walkthrough6)")
    if traffic:
        p.add_argument("--traffic", required=True, help="traffic JSON file")
    p.add_argument("--lane-mode", choices=["full", "ninth", "none"], default=None,
                   help="override the topology's lane mode")
    p.add_argument("--k", type=int, default=3, help="candidate paths per pair")
    p.add_argument("--physics", default="full",
                   help="'full', 'simplified', or a physics JSON file")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="scnplan", description=__doc__)
    parser.add_argument("--version", action="version", version=f"scnplan {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="run the three-phase planner once")
    _add_common(p)
    p.add_argument("--order", choices=["desc", "given"], default="desc",
                   help="service order: descending volume or file order")
    p.add_argument("--out", default="-", help="solution JSON output ('-' for stdout)")

    p = sub.add_parser("anneal", help="search service sequences with simulated annealing")
    _add_common(p)
    p.add_argument("--iterations", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-", help="solution JSON output")
    p.add_argument("--trace", default=None, help="write the iteration trace CSV here")

    p = sub.add_parser("ilp-export", help="emit the exact or relaxed model as an LP file")
    _add_common(p)
    p.add_argument("--variant", choices=["full", "relaxed"], default="full")
    p.add_argument("--phase", choices=["main", "minor"], default="main")
    p.add_argument("--obj1-bound", type=int, default=None,
                   help="lane budget for the minor phase")
    p.add_argument("--out", default="-", help="LP file output")
    p.add_argument("--warm-start", default=None,
                   help="solution JSON to convert into a warm-start file")
    p.add_argument("--warm-start-out", default=None)

    p = sub.add_parser("validate", help="audit a solution export against all constraints")
    _add_common(p)
    p.add_argument("--solution", required=True)

    p = sub.add_parser("oracle", help="exact optimum for a tiny instance")
    _add_common(p)
    p.add_argument("--max-requests", type=int, default=8)
    p.add_argument("--max-lanes", type=int, default=4)
    p.add_argument("--max-nodes", type=int, default=6)
    p.add_argument("--time-budget", type=float, default=120.0)
    p.add_argument("--out", default="-")

    p = sub.add_parser("gen-traffic", help="draw a random traffic matrix")
    p.add_argument("--topology", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--volumes", default="1000,4000,10000")
    p.add_argument("--probabilities", default="0.3,0.3,0.4")
    p.add_argument("--out", default="-")

    p = sub.add_parser("experiment", help="sweep lane profiles and traffic loads")
    p.add_argument("--topology", required=True)
    p.add_argument("--profiles", default="full,ninth,none")
    p.add_argument("--loads", default="20,40,60,80,100")
    p.add_argument("--matrices", type=int, default=50)
    p.add_argument("--iterations", type=int, default=1000)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--physics", default="full", choices=["full", "simplified"])
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-dir", required=True)

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except ScnPlanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    if args.command == "plan":
        instance = _build_instance(args)
        order = None if args.order == "desc" else list(instance.requests)
        solution = run_plan(instance, order)
        _write(args.out, solution.to_json() + "\n")
        _summary(solution)
        return 0 if solution.fully_served else 1

    if args.command == "anneal":
        instance = _build_instance(args)
        config = AnnealConfig(iterations=args.iterations, seed=args.seed)
        solution, sequence, trace = optimize_sequence(instance, config)
        _write(args.out, solution.to_json() + "\n")
        if args.trace:
            with Path(args.trace).open("w") as fh:
                write_trace(trace, fh)
        print(f"best sequence: {[r.id for r in sequence]}", file=sys.stderr)
        _summary(solution)
        return 0 if solution.fully_served else 1

    if args.command == "ilp-export":
        instance = _build_instance(args)
        if args.variant == "relaxed":
            model = emit_relaxed_model(instance)
        else:
            phase = ModelPhase(args.phase, args.obj1_bound)
            model = emit_full_model(instance, phase)
        _write(args.out, model.to_lp())
        print(f"weak lane lower bound: {weak_lower_bound(instance)}", file=sys.stderr)
        if args.warm_start:
            doc = json.loads(Path(args.warm_start).read_text())
            solution = Solution.from_dict(doc, instance.network)
            values = warm_start_values(instance, solution)
            _write(args.warm_start_out or "-", write_warm_start(values))
        return 0

    if args.command == "validate":
        instance = _build_instance(args)
        doc = json.loads(Path(args.solution).read_text())
        solution = Solution.from_dict(doc, instance.network)
        report = validate_solution(instance, solution)
        sys.stdout.write(report.render())
        return 0 if report.ok else 1

    if args.command == "oracle":
        instance = _build_instance(args)
        limits = OracleLimits(
            max_nodes=args.max_nodes,
            max_lanes=args.max_lanes,
            max_requests=args.max_requests,
            time_budget_s=args.time_budget,
        )
        solution = exact_solve(instance, limits)
        _write(args.out, solution.to_json() + "\n")
        _summary(solution)
        return 0

    if args.command == "gen-traffic":
        path = Path(args.topology)
        network, _profile = load_topology(path) if path.exists() else bundled_topology(args.topology)
        profile = TrafficProfile(
            volumes=tuple(int(v) for v in args.volumes.split(",")),
            probabilities=tuple(float(v) for v in args.probabilities.split(",")),
            seed=args.seed,
        )
        requests = generate_traffic(network.nodes, args.count, profile)
        _write(args.out, dump_requests(requests) + "\n")
        return 0

    if args.command == "experiment":
        path = Path(args.topology)
        network, _profile = load_topology(path) if path.exists() else bundled_topology(args.topology)
        plan_ = ExperimentPlan(
            network=network,
            profiles=tuple(args.profiles.split(",")),
            loads=tuple(int(v) for v in args.loads.split(",")),
            matrices=args.matrices,
            iterations=args.iterations,
            k=args.k,
            seed=args.seed,
            physics_name=args.physics,
        )
        result = run_experiment(plan_, workers=args.workers)
        paths = write_result_files(result, args.out_dir)
        for label, file_path in paths.items():
            print(f"{label}: {file_path}", file=sys.stderr)
        return 0

    raise ScnPlanError(f"unknown command {args.command!r}")


def _summary(solution: Solution) -> None:
    obj1, obj2 = solution.objectives
    status = "all demand served" if solution.fully_served else (
        f"{len(solution.unserved)} request(s) unserved, {solution.unserved_gbps} Gbps total"
    )
    print(f"lanes used: {obj1}, switching lanes used: {obj2}; {status}", file=sys.stderr)


if __name__ == "__main__":
    raise SystemExit(main())
