"""Command-line entry point: ``secalloc <subcommand> ...``.

Exit codes: 0 success, 1 bad input, 3 infeasible SDP, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .allocation import ALL_STRATEGIES, AllocationContext, SolveCache, Strategy, allocate, gap_report
from .centrality import CentralityKind, centrality, top_monitor_sets
from .experiment import ExperimentConfig, emit_ieee14, emit_outputs, env_jobs, run_er_experiment, run_ieee14_case
from .graph import Graph, UnconnectableParametersError, generate_erdos_renyi, load_graph
from .model import SwingParams, build_consensus_model, build_swing_model, load_ieee14
from .sdp import BACKENDS, INFEASIBLE, OPTIMAL
from .wcai import ScenarioParams, solve_wcai

EXIT_INPUT = 1
EXIT_INFEASIBLE = 3
EXIT_NUMERICAL = 4


def _jobs(flag: int | None, fallback: int = 1) -> int:
    """Explicit ``--jobs`` wins, then SECALLOC_JOBS, then ``fallback``."""
    if flag is not None:
        if flag < 1:
            raise ValueError("--jobs must be at least 1")
        return flag
    return env_jobs(fallback)


def _progress(done: int, total: int) -> None:
    print(f"\r  {done}/{total}", end="" if done < total else "\n", file=sys.stderr, flush=True)


def cmd_gen_er(args) -> int:
    g = generate_erdos_renyi(args.n, args.p, args.seed, max_rejections=args.max_rejections)
    text = json.dumps(g.to_dict()) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}: n={g.n}, {g.num_edges} edges, {g.rejections} rejections")
    else:
        sys.stdout.write(text)
        print(f"{g.rejections} rejections", file=sys.stderr)
    return 0


def cmd_centrality(args) -> int:
    g = load_graph(args.graph)
    if args.unit_weights:
        g = g.unit_weight()
    scores = centrality(g, args.kind)
    print(f"vertex,{args.kind}")
    for v, s in enumerate(scores.values, start=1):
        print(f"{v},{s:.10g}")
    tops, truncated = top_monitor_sets(scores, args.budget)
    print(f"top sets of size {args.budget} (total score {tops[0].total_score:.10g}):")
    for c in tops:
        print("  " + " ".join(map(str, c.vertices)))
    if truncated:
        print(f"  ... truncated after {len(tops)} tied sets")
    return 0


def load_scenario(path):
    """Scenario JSON: network, attack and monitor sets, delta, A_e.

    ``{"graph": {...} | "g.json" | "ieee14", "attack": [..], "monitor": [..],
    "delta": 1, "attack_energy": 1}``. ``"monitors"`` is accepted for
    ``"monitor"``. A custom swing network is given as ``"model": "swing"``
    with ``"swing": {inertia, damping, susceptance_edges}``.
    """
    path = Path(path)
    data = json.loads(path.read_text(encoding="utf-8"))
    if "monitors" in data and "monitor" not in data:
        data["monitor"] = data["monitors"]
    kind = data.get("model", "swing" if data.get("graph") == "ieee14" else "consensus")
    params = ScenarioParams(float(data.get("delta", 1.0)), float(data.get("attack_energy", 1.0)))
    if "attack" not in data or "monitor" not in data:
        raise ValueError("scenario needs 'attack' and 'monitor' lists")
    if kind == "consensus":
        src = data.get("graph")
        if isinstance(src, str):
            g = load_graph(path.parent / src)
        elif isinstance(src, dict):
            g = Graph.from_dict(src)
        else:
            raise ValueError("consensus scenario needs a 'graph' object or file name")
        model = build_consensus_model(g, data["attack"], data["monitor"])
    elif kind == "swing":
        src = data.get("swing", "ieee14")
        swing = load_ieee14() if src == "ieee14" else SwingParams.from_dict(src)
        model = build_swing_model(swing, data["attack"], data["monitor"])
    else:
        raise ValueError(f"unknown model type {kind!r}")
    return model, params


def cmd_wcai(args) -> int:
    model, params = load_scenario(args.scenario)
    res = solve_wcai(model, params, backend=args.backend)
    print(f"status     {res.status}")
    print(f"J          {res.value:.10g}")
    print(f"beta       {res.beta:.10g}")
    print("gamma      " + " ".join(f"{g:.10g}" for g in res.gammas))
    print(f"solve time {res.solve_time:.4f} s")
    if args.emit_certificate:
        if not res.optimal:
            print("no certificate: solve did not succeed", file=sys.stderr)
        else:
            cert = res.to_dict()
            cert["P"] = res.storage_matrix().tolist()
            cert["P_reduced"] = res.p_mat.tolist()
            cert["basis"] = res.coords.fwd.tolist()
            Path(args.emit_certificate).write_text(json.dumps(cert, indent=2) + "\n", encoding="utf-8")
            print(f"certificate written to {args.emit_certificate}")
    if res.status == OPTIMAL:
        return 0
    return EXIT_INFEASIBLE if res.status == INFEASIBLE else EXIT_NUMERICAL


def _context(args) -> AllocationContext:
    params = ScenarioParams(args.delta, args.ae)
    common = dict(params=params, n_a=args.na, n_s=args.ns, prune=not args.no_prune, jobs=_jobs(args.jobs), backend=args.backend)
    if args.ieee14:
        return AllocationContext.for_swing(load_ieee14(), unit_weights=True, **common)
    if not args.graph:
        raise ValueError("pass --graph g.json or --ieee14")
    return AllocationContext(load_graph(args.graph), unit_weights=args.unit_weights, **common)


def cmd_allocate(args) -> int:
    ctx = _context(args)
    strategies = ALL_STRATEGIES if args.strategy == "all" else (Strategy(args.strategy),)
    results = [allocate(s, ctx, SolveCache()) for s in strategies]
    print(f"{'strategy':<12} {'monitors':<10} {'WCAI':>14} {'worst attack':<13} {'solves':>6} {'time (s)':>9}")
    for r in results:
        print(
            f"{r.strategy.value:<12} {' '.join(map(str, r.monitor_set)):<10} {r.wcai:>14.8g} "
            f"{' '.join(map(str, r.worst_attack)):<13} {r.inner_solves:>6} {r.solve_time:>9.3f}"
        )
    payload = [r.to_dict() for r in results]
    if Strategy.OPTIMAL in {r.strategy for r in results} and len(results) > 1:
        gaps = gap_report(results)
        print("gaps (%):  " + ", ".join(f"{s.value} wcai {gaps.wcai_gap[s]:.4g} / time {gaps.time_gap[s]:.4g}" for s in gaps.wcai_gap))
        for d in payload:
            s = Strategy(d["strategy"])
            d["wcai_gap"], d["time_gap"] = gaps.wcai_gap[s], gaps.time_gap[s]
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        print(f"wrote {args.out}")
    return 0


def cmd_experiment(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    cfg.jobs = _jobs(args.jobs, cfg.jobs)
    records, summary = run_er_experiment(cfg, progress=_progress)
    paths = emit_outputs(records, summary, args.out)
    for name, cell in summary["cells"].items():
        med = {s: cell["wcai_gap"][s]["median"] for s in cell["wcai_gap"]}
        print(f"{name}: {cell['graphs']} graphs, median WCAI gap (%) " + ", ".join(f"{k} {v:.3g}" for k, v in med.items()))
    print("wrote " + ", ".join(str(p) for p in paths))
    return 0


def cmd_ieee14(args) -> int:
    report = run_ieee14_case(ScenarioParams(args.delta, args.ae), n_a=args.na, jobs=_jobs(args.jobs), progress=_progress)
    print(f"{'bus':>3} {'WCAI':>12} {'gap %':>8} {'worst attack':<12} {'degree':>8} {'closeness':>9} {'betweenness':>11}")
    for b in sorted(report.wcai):
        sc = [report.scores[k][b - 1] for k in CentralityKind]
        print(
            f"{b:>3} {report.wcai[b]:>12.8g} {report.gap(b):>8.3f} {' '.join(map(str, report.worst_attack[b])):<12} "
            f"{sc[0]:>8.4g} {sc[1]:>9.4g} {sc[2]:>11.4g}"
        )
    print(f"optimal bus: {report.optimal_bus}")
    for k, bus in report.centrality_bus.items():
        print(f"{k.value} centrality picks bus {bus}, WCAI gap {report.gap(bus):.3f}%")
    if args.out:
        paths = emit_ieee14(report, args.out)
        print("wrote " + ", ".join(str(p) for p in paths))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="secalloc", description="Worst-case attack impact and monitor allocation.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress at INFO level")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-er", help="generate a connected Erdős–Rényi graph")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-rejections", type=int, default=10_000)
    p.add_argument("--out", help="output JSON path (default: stdout)")
    p.set_defaults(func=cmd_gen_er)

    p = sub.add_parser("centrality", help="centrality scores and top monitor sets")
    p.add_argument("--graph", required=True)
    p.add_argument("--kind", choices=[k.value for k in CentralityKind], required=True)
    p.add_argument("--unit-weights", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--budget", type=int, default=1)
    p.set_defaults(func=cmd_centrality)

    p = sub.add_parser("wcai", help="solve the impact SDP for one scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--emit-certificate", metavar="P_JSON")
    p.add_argument("--backend", choices=sorted(BACKENDS), default="clarabel")
    p.set_defaults(func=cmd_wcai)

    p = sub.add_parser("allocate", help="choose monitor vertices")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--graph")
    src.add_argument("--ieee14", action="store_true", help="use the 14-bus swing model")
    p.add_argument("--strategy", choices=[s.value for s in Strategy] + ["all"], default="all")
    p.add_argument("--ns", type=int, default=1)
    p.add_argument("--na", type=int, default=1)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--ae", type=float, default=1.0)
    p.add_argument("--no-prune", action="store_true")
    p.add_argument("--jobs", type=int)
    p.add_argument("--unit-weights", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--backend", choices=sorted(BACKENDS), default="clarabel")
    p.add_argument("--out")
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("experiment", help="run an Erdős–Rényi batch from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="results")
    p.add_argument("--jobs", type=int)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("ieee14", help="per-bus WCAI table for the 14-bus grid")
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--ae", type=float, default=1.0)
    p.add_argument("--na", type=int, default=1)
    p.add_argument("--jobs", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ieee14)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    np.set_printoptions(precision=6)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError, UnconnectableParametersError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
