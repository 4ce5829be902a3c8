"""Batch experiments: Erdős–Rényi studies and the IEEE 14-bus case.

``records.csv`` holds only quantities that are fully determined by the
configuration (values, sets, gaps, solve counts). Wall-clock timings and
time gaps live in ``timings.csv`` so that repeated runs give identical
records.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .allocation import (
    ALL_STRATEGIES,
    AllocationContext,
    SolveCache,
    Strategy,
    allocate,
    gap_report,
    worst_attack_for,
)
from .centrality import CentralityKind, centrality
from .graph import generate_erdos_renyi
from .model import load_ieee14
from .svg import bar_chart_svg, boxplot_svg
from .wcai import ScenarioParams

log = logging.getLogger(__name__)

JOBS_ENV = "SECALLOC_JOBS"


def env_jobs(default: int = 1) -> int:
    raw = os.environ.get(JOBS_ENV)
    if raw is None or raw.strip() == "":
        return default
    try:
        jobs = int(raw)
    except ValueError:
        raise ValueError(f"{JOBS_ENV} must be a positive integer, got {raw!r}") from None
    if jobs < 1:
        raise ValueError(f"{JOBS_ENV} must be a positive integer, got {raw!r}")
    return jobs


@dataclass
class ExperimentConfig:
    sizes: list[int] = field(default_factory=lambda: [10])
    graphs_per_size: int = 30
    p: float = 0.5
    n_a: list[int] = field(default_factory=lambda: [1])
    n_s: int = 1
    delta: float = 1.0
    attack_energy: float = 1.0
    seed: int = 0
    jobs: int = 1
    prune: bool = True

    def __post_init__(self):
        self.sizes = [int(s) for s in self.sizes]
        self.n_a = [int(a) for a in self.n_a]
        if not self.sizes or not self.n_a:
            raise ValueError("sizes and n_a must be non-empty")
        if min(self.sizes) < 1 or self.graphs_per_size < 1 or self.n_s < 1 or min(self.n_a) < 1 or self.jobs < 1:
            raise ValueError("all counts must be at least 1")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"edge probability must lie in [0, 1], got {self.p}")
        for n in self.sizes:
            if self.n_s > n or max(self.n_a) > n:
                raise ValueError(f"budgets n_s={self.n_s}, n_a={self.n_a} exceed graph size {n}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        ScenarioParams(self.delta, self.attack_energy)

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        data = dict(data)
        for key in ("sizes", "n_a"):
            if key in data and isinstance(data[key], int):
                data[key] = [data[key]]
        return cls(**data)

    @classmethod
    def load(cls, path) -> ExperimentConfig:
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def params(self) -> ScenarioParams:
        return ScenarioParams(self.delta, self.attack_energy)


def graph_seed(base: int, size: int, index: int) -> int:
    """Seed of the ``index``-th graph of a given size, independent of run order."""
    return int(np.random.SeedSequence([base, size, index]).generate_state(1, dtype=np.uint64)[0])


@dataclass
class ExperimentRecord:
    size: int
    graph_index: int
    graph_seed: int
    rejections: int
    n_a: int
    results: dict  # Strategy -> AllocationResult
    wcai_gap: dict
    time_gap: dict

    def row(self) -> dict:
        out = {
            "size": self.size,
            "graph_index": self.graph_index,
            "graph_seed": self.graph_seed,
            "rejections": self.rejections,
            "n_a": self.n_a,
        }
        for s in ALL_STRATEGIES:
            r = self.results[s]
            out[f"{s.value}_wcai"] = _fmt(r.wcai)
            out[f"{s.value}_set"] = _fmt_set(r.monitor_set)
            out[f"{s.value}_attack"] = _fmt_set(r.worst_attack)
            out[f"{s.value}_solves"] = r.inner_solves
            out[f"{s.value}_gap"] = _fmt(self.wcai_gap[s])
        return out

    def timing_row(self) -> dict:
        out = {"size": self.size, "graph_index": self.graph_index, "n_a": self.n_a}
        for s in ALL_STRATEGIES:
            out[f"{s.value}_time"] = _fmt(self.results[s].solve_time)
            out[f"{s.value}_time_gap"] = _fmt(self.time_gap[s])
        return out


RECORD_COLUMNS = ["size", "graph_index", "graph_seed", "rejections", "n_a"] + [
    f"{s.value}_{col}" for s in ALL_STRATEGIES for col in ("wcai", "set", "attack", "solves", "gap")
]
TIMING_COLUMNS = ["size", "graph_index", "n_a"] + [f"{s.value}_{col}" for s in ALL_STRATEGIES for col in ("time", "time_gap")]


def _fmt(x: float) -> str:
    if x == 0:
        return "0"
    return "nan" if math.isnan(x) else f"{x:.9g}"


def _fmt_set(vs) -> str:
    return " ".join(str(v) for v in vs)


def _run_task(task):
    """One (graph, n_a) pair. Each strategy gets its own cache so its time
    includes every solve it needs."""
    size, index, seed, n_a, cfg = task
    g = generate_erdos_renyi(size, cfg.p, seed)
    ctx = AllocationContext(g, cfg.params, n_a=n_a, n_s=cfg.n_s, prune=cfg.prune)
    try:
        results = {s: allocate(s, ctx, SolveCache()) for s in ALL_STRATEGIES}
    except RuntimeError as exc:
        log.warning("graph %d of size %d, n_a=%d failed: %s", index, size, n_a, exc)
        return None
    gaps = gap_report(results.values())
    return ExperimentRecord(size, index, seed, g.rejections, n_a, results, gaps.wcai_gap, gaps.time_gap)


def percentiles(values) -> dict:
    """25th/50th/75th percentiles by linear interpolation between order statistics."""
    v = np.asarray([x for x in values if not math.isnan(x)], dtype=float)
    if v.size == 0:
        return {"p25": math.nan, "median": math.nan, "p75": math.nan, "count": 0}
    p25, med, p75 = np.percentile(v, [25, 50, 75], method="linear")
    return {"p25": float(p25), "median": float(med), "p75": float(p75), "count": int(v.size)}


def cell_name(size: int, n_a: int) -> str:
    return f"N{size}_na{n_a}"


def summarize(records, cfg: ExperimentConfig, failures: dict | None = None) -> dict:
    cells = {}
    for size in cfg.sizes:
        for n_a in cfg.n_a:
            recs = [r for r in records if r.size == size and r.n_a == n_a]
            name = cell_name(size, n_a)
            cells[name] = {
                "size": size,
                "n_a": n_a,
                "graphs": len(recs),
                "failed_graphs": (failures or {}).get(name, 0),
                # from the rounded values the CSV files carry, so a recomputation matches
                "wcai_gap": {s.value: percentiles([float(_fmt(r.wcai_gap[s])) for r in recs]) for s in ALL_STRATEGIES},
                "time_gap": {s.value: percentiles([float(_fmt(r.time_gap[s])) for r in recs]) for s in ALL_STRATEGIES},
                "mean_time": {s.value: float(np.mean([r.results[s].solve_time for r in recs])) if recs else math.nan for s in ALL_STRATEGIES},
            }
    return {"config": cfg.to_dict(), "percentile_method": "linear", "cells": cells}


def run_er_experiment(cfg: ExperimentConfig, progress=None):
    """Run every (size, graph, n_a) task; returns ``(records, summary)``."""
    tasks = [
        (size, i, graph_seed(cfg.seed, size, i), n_a, cfg)
        for size in cfg.sizes
        for i in range(cfg.graphs_per_size)
        for n_a in cfg.n_a
    ]
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            outs = list(pool.map(_run_task, tasks))
    else:
        outs = []
        for k, task in enumerate(tasks):
            outs.append(_run_task(task))
            if progress:
                progress(k + 1, len(tasks))
    records, failures = [], {}
    for task, out in zip(tasks, outs):
        if out is None:
            name = cell_name(task[0], task[3])
            failures[name] = failures.get(name, 0) + 1
        else:
            records.append(out)
    return records, summarize(records, cfg, failures)


def _write_csv(path: Path, columns, rows) -> None:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(row)
    path.write_text(buf.getvalue(), encoding="utf-8")


def emit_outputs(records, summary: dict, out_dir) -> list[Path]:
    """Write records.csv, timings.csv, summary.json and per-cell box plots."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = [out / "records.csv", out / "timings.csv", out / "summary.json"]
        _write_csv(written[0], RECORD_COLUMNS, [r.row() for r in records])
        _write_csv(written[1], TIMING_COLUMNS, [r.timing_row() for r in records])
        written[2].write_text(json.dumps(summary, indent=2, sort_keys=True, allow_nan=True) + "\n", encoding="utf-8")
        cells = summary.get("cells") or {}
        if not cells:  # summary built elsewhere; derive cells from the records
            cells = {cell_name(r.size, r.n_a): {"size": r.size, "n_a": r.n_a} for r in records}
        for name, cell in cells.items():
            recs = [r for r in records if r.size == cell["size"] and r.n_a == cell["n_a"]]
            labels = [s.value for s in ALL_STRATEGIES]
            wcai = [[r.wcai_gap[s] for r in recs] for s in ALL_STRATEGIES]
            tgap = [[r.time_gap[s] for r in recs] for s in ALL_STRATEGIES]
            title = f"N = {cell['size']}, n_a = {cell['n_a']}, {len(recs)} graphs"
            p = out / f"boxplot_{name}.svg"
            p.write_text(boxplot_svg(wcai, labels, "Relative WCAI gap (%)", title), encoding="utf-8")
            q = out / f"timegap_{name}.svg"
            q.write_text(boxplot_svg(tgap, labels, "Relative solving-time gap (%)", title), encoding="utf-8")
            written += [p, q]
    except OSError as exc:
        raise OSError(f"cannot write experiment outputs to {out}: {exc}") from exc
    return written


@dataclass
class Ieee14Report:
    params: ScenarioParams
    n_a: int
    wcai: dict  # bus -> worst-case J
    worst_attack: dict
    scores: dict  # kind -> per-bus centrality scores
    centrality_bus: dict  # kind -> chosen bus
    optimal_bus: int
    solves: int
    solve_time: float

    def gap(self, bus: int) -> float:
        opt = self.wcai[self.optimal_bus]
        return 100.0 * (self.wcai[bus] - opt) / opt

    def to_dict(self) -> dict:
        return {
            "delta": self.params.delta,
            "attack_energy": self.params.attack_energy,
            "n_a": self.n_a,
            "optimal_bus": self.optimal_bus,
            "centrality_bus": {k.value: v for k, v in self.centrality_bus.items()},
            "buses": [
                {
                    "bus": b,
                    "wcai": self.wcai[b],
                    "worst_attack": list(self.worst_attack[b]),
                    "gap_percent": self.gap(b),
                    **{k.value: float(self.scores[k][b - 1]) for k in CentralityKind},
                }
                for b in sorted(self.wcai)
            ],
            "solves": self.solves,
            "solve_time": self.solve_time,
        }


def run_ieee14_case(params: ScenarioParams | None = None, n_a: int = 1, jobs: int = 1, progress=None) -> Ieee14Report:
    """Worst-case WCAI for every single-bus monitor choice on the 14-bus grid."""
    params = params or ScenarioParams()
    swing = load_ieee14()
    ctx = AllocationContext.for_swing(swing, params=params, n_a=n_a, n_s=1, jobs=jobs)
    cache = SolveCache()
    t0 = time.perf_counter()
    if jobs > 1:
        cache.prefetch(ctx, [(m, a) for m in ctx.monitor_sets() for a in ctx.attack_sets()])
    wcai, worst = {}, {}
    for k, (bus,) in enumerate(ctx.monitor_sets()):
        try:
            attack, j = worst_attack_for((bus,), ctx, cache)
        except RuntimeError as exc:
            log.warning("bus %d: %s", bus, exc)
            attack, j = (), math.nan
        wcai[bus], worst[bus] = j, attack
        if progress:
            progress(k + 1, swing.n)
    finite = [b for b in sorted(wcai) if not math.isnan(wcai[b])]
    if not finite:
        raise RuntimeError("every bus failed")
    best = finite[0]
    for b in finite[1:]:
        if wcai[b] < wcai[best] * (1 - 1e-6):
            best = b
    g = ctx.centrality_graph()
    scores = {k: centrality(g, k).values for k in CentralityKind}
    chosen = {}
    for k, vals in scores.items():
        top = max(vals)
        chosen[k] = next(i + 1 for i, v in enumerate(vals) if math.isclose(v, top, rel_tol=1e-9))
    return Ieee14Report(params, n_a, wcai, worst, scores, chosen, best, cache.solves, time.perf_counter() - t0)


def _bus_notes(report: Ieee14Report) -> dict:
    notes = {str(report.optimal_bus): ["optimal"]}
    for bus in sorted(set(report.centrality_bus.values())):
        notes.setdefault(str(bus), []).append("centrality")
    return {k: ", ".join(v) for k, v in notes.items()}


def emit_ieee14(report: Ieee14Report, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    data = report.to_dict()
    cols = ["bus", "wcai", "worst_attack", "gap_percent", "degree", "closeness", "betweenness"]
    rows = []
    for b in data["buses"]:
        row = {c: (_fmt(b[c]) if isinstance(b[c], float) else b[c]) for c in cols}
        row["worst_attack"] = _fmt_set(b["worst_attack"])
        rows.append(row)
    paths = [out / "ieee14.csv", out / "ieee14.json", out / "ieee14_gaps.svg"]
    _write_csv(paths[0], cols, rows)
    paths[1].write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")
    buses = [b["bus"] for b in data["buses"]]
    paths[2].write_text(
        bar_chart_svg(
            [str(b) for b in buses],
            [b["gap_percent"] for b in data["buses"]],
            "Relative WCAI gap per monitor bus (%)",
            highlight=_bus_notes(report),
        ),
        encoding="utf-8",
    )
    return paths
