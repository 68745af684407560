"""Command line interface.

Subcommands: construct, augment, search, pipeline, bounds, threshold.
Graphs travel in the plain edge-list text format ("n m" header, one
"u v" line per edge); probability bounds print JSON.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import augment as aug
from . import bounds
from .absorption import assemble
from .constructions import (
    ExtremalSpec,
    blowup_kminus,
    dense_host,
    extremal_graph,
    pminus,
)
from .experiments import (
    emit_report,
    parse_config_file,
    pipeline_preset,
    run_batch,
)
from .graphs import Graph, read_edge_list, write_edge_list
from .search import ABSENT, FOUND, SearchBudget, find_power_ham_cycle


def _write_graph(G: Graph, out: str | None) -> None:
    if out is None:
        sys.stdout.write(f"{G.n} {G.num_edges}\n")
        for u, v in G.edges():
            sys.stdout.write(f"{u} {v}\n")
    else:
        write_edge_list(G, out)


def cmd_construct(args: argparse.Namespace) -> int:
    if args.kind == "extremal":
        spec = ExtremalSpec(args.k, args.n, Fraction(args.eps))
        G = extremal_graph(spec)
    elif args.kind == "pminus":
        G = pminus(args.k)
    elif args.kind == "blowup":
        G = blowup_kminus(args.k, args.m)
    else:
        G = dense_host(args.n, args.alpha, args.seed)
    _write_graph(G, args.out)
    return 0


def cmd_augment(args: argparse.Namespace) -> int:
    G = read_edge_list(args.input)
    p = min(1.0, args.C / G.n) if G.n else 0.0
    part = aug.sample_gnp(G.n, p, args.seed)
    H = aug.union(G, part)
    write_edge_list(H.graph, args.out)
    manifest = Path(args.out).with_suffix(Path(args.out).suffix + ".manifest.json")
    aug.write_manifest(
        part,
        manifest,
        extra={"C": args.C, "input": str(args.input), "union_edges": H.graph.num_edges},
    )
    return 0


def cmd_search(args: argparse.Namespace) -> int:
    H = read_edge_list(args.input)
    budget = SearchBudget(
        node_cap=args.budget_nodes,
        time_cap=args.budget_seconds,
    )
    result = find_power_ham_cycle(H, args.power, budget)
    if result.status == FOUND:
        print("FOUND")
        if args.cert:
            with open(args.cert, "w", encoding="ascii") as fh:
                for v in result.certificate.order:
                    fh.write(f"{v}\n")
    elif result.status == ABSENT:
        print("ABSENT")
    else:
        print("UNKNOWN")
    print(f"nodes={result.nodes} elapsed={result.elapsed:.3f}s", file=sys.stderr)
    return 0 if result.status == FOUND else 1


def cmd_pipeline(args: argparse.Namespace) -> int:
    G = read_edge_list(args.input)
    p = min(1.0, args.C / G.n) if G.n else 0.0
    part = aug.sample_gnp(G.n, p, args.seed)
    H = aug.union(G, part)
    alpha = args.k / (args.k + 1) + args.eps
    params = pipeline_preset(args.k, G.n, alpha, args.C, seed=args.seed)
    if args.gamma is not None:
        # an explicit gamma switches the reservoir and the caps to their
        # gamma-derived formulas instead of the preset sizes; a failure
        # then signals that n is too small for the chosen gamma and eps
        import dataclasses

        params = dataclasses.replace(
            params,
            gamma=args.gamma,
            reservoir_size=None,
            path_cap=None,
            absorb_cap=None,
            leftover_cap=None,
        )
    result = assemble(H, params, collect_trace=args.trace is not None)
    if args.trace:
        with open(args.trace, "w", encoding="ascii") as fh:
            for event in result.trace:
                fh.write(json.dumps(event, sort_keys=True))
                fh.write("\n")
    if result.success:
        print("SUCCESS")
        if args.emit_cert:
            with open(args.emit_cert, "w", encoding="ascii") as fh:
                for v in result.certificate.order:
                    fh.write(f"{v}\n")
        return 0
    print(f"FAILURE stage={result.stage} detail={result.detail}")
    return 1


def cmd_bounds(args: argparse.Namespace) -> int:
    if args.bound == "janson-paper":
        report = bounds.janson_forest_report(args.rho, args.p, args.n, args.cf)
    elif args.bound == "janson-generic":
        report = bounds.janson_generic_report(args.lam, args.delta_bar)
    elif args.bound == "chernoff":
        report = bounds.chernoff_report(args.mu, args.t)
    else:
        report = bounds.union_report(args.parts)
    print(json.dumps(report, sort_keys=True))
    return 0


def cmd_threshold(args: argparse.Namespace) -> int:
    cfg = parse_config_file(args.config)
    grid = cfg.c_grid if cfg.c_grid else (cfg.C,)
    records = []
    for c in grid:
        records.extend(run_batch(cfg, c))
    paths = emit_report(records, args.out, confidence=cfg.confidence)
    for name, path in sorted(paths.items()):
        print(f"{name}: {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hplab",
        description="Power-of-Hamiltonian-cycle laboratory for randomly augmented dense graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="emit a deterministic construction")
    c.add_argument("--kind", required=True, choices=["extremal", "pminus", "blowup", "dense"])
    c.add_argument("--k", type=int, default=1)
    c.add_argument("--n", type=int, default=12)
    c.add_argument("--eps", type=str, default="1/12", help="rational like 1/12")
    c.add_argument("--m", type=int, default=2)
    c.add_argument("--alpha", type=float, default=0.55)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", type=str, default=None)
    c.set_defaults(func=cmd_construct)

    a = sub.add_parser("augment", help="union a graph with a sampled binomial random graph")
    a.add_argument("--input", required=True)
    a.add_argument("--C", type=float, required=True, help="edge budget constant, p = C/n")
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--out", required=True)
    a.set_defaults(func=cmd_augment)

    s = sub.add_parser("search", help="exact search for a power of a Hamiltonian cycle")
    s.add_argument("--input", required=True)
    s.add_argument("--power", type=int, required=True)
    s.add_argument("--budget-nodes", type=int, default=5_000_000)
    s.add_argument("--budget-seconds", type=float, default=None)
    s.add_argument("--cert", type=str, default=None)
    s.set_defaults(func=cmd_search)

    p = sub.add_parser("pipeline", help="run the constructive pipeline on a host graph")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--C", type=float, required=True)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--emit-cert", type=str, default=None)
    p.add_argument("--trace", type=str, default=None)
    p.set_defaults(func=cmd_pipeline)

    b = sub.add_parser("bounds", help="evaluate a probability bound, JSON output")
    bsub = b.add_subparsers(dest="bound", required=True)
    bp = bsub.add_parser("janson-paper")
    bp.add_argument("--rho", type=float, required=True)
    bp.add_argument("--p", type=float, required=True)
    bp.add_argument("--n", type=int, required=True)
    bp.add_argument("--cf", type=float, default=1.0)
    bg = bsub.add_parser("janson-generic")
    bg.add_argument("--lam", type=float, required=True)
    bg.add_argument("--delta-bar", dest="delta_bar", type=float, default=0.0)
    bc = bsub.add_parser("chernoff")
    bc.add_argument("--mu", type=float, required=True)
    bc.add_argument("--t", type=float, required=True)
    bu = bsub.add_parser("union")
    bu.add_argument("parts", type=float, nargs="*")
    b.set_defaults(func=cmd_bounds)

    t = sub.add_parser("threshold", help="Monte Carlo success curve over a C grid")
    t.add_argument("--config", required=True, help="flat key=value config file")
    t.add_argument("--out", required=True, help="output directory")
    t.set_defaults(func=cmd_threshold)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
