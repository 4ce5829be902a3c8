"""Monitor placement: exact min-max enumeration and centrality heuristics.

The defender picks ``n_s`` monitor vertices to minimise the worst-case
impact over every attack set of size ``n_a``. ``allocate_optimal`` does this
exhaustively (with optional branch-and-bound pruning); the centrality
strategies only look at the highest-scoring sets and break ties by WCAI.

Ties in WCAI are decided lexicographically: a later set only replaces the
incumbent when it is better by more than ``VALUE_RTOL`` relative.
"""

from __future__ import annotations

import itertools
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

from .centrality import MAX_TIED_SETS, CentralityKind, centrality, top_monitor_sets
from .graph import Graph
from .model import SwingParams, build_consensus_model, build_swing_model, vertex_set
from .wcai import ScenarioParams, solve_wcai

log = logging.getLogger(__name__)

VALUE_RTOL = 1e-6


class Strategy(str, Enum):
    OPTIMAL = "optimal"
    DEGREE = "degree"
    CLOSENESS = "closeness"
    BETWEENNESS = "betweenness"
    COMBINED = "combined"


ALL_STRATEGIES = tuple(Strategy)


@dataclass
class AllocationContext:
    """Everything a strategy needs. With ``swing`` set the dynamics are the
    swing equation on ``swing.graph``; otherwise consensus on ``graph``."""

    graph: Graph
    params: ScenarioParams = field(default_factory=ScenarioParams)
    n_a: int = 1
    n_s: int = 1
    swing: SwingParams | None = None
    prune: bool = True
    unit_weights: bool = True
    backend: str = "clarabel"
    jobs: int = 1

    def __post_init__(self):
        n = self.graph.n
        if not 1 <= self.n_a <= n:
            raise ValueError(f"attack budget must satisfy 1 <= n_a <= {n}, got {self.n_a}")
        if not 1 <= self.n_s <= n:
            raise ValueError(f"monitor budget must satisfy 1 <= n_s <= {n}, got {self.n_s}")
        if self.swing is not None and self.swing.n != n:
            raise ValueError("swing parameters and graph disagree on the bus count")

    @classmethod
    def for_swing(cls, swing: SwingParams, **kw) -> AllocationContext:
        return cls(graph=swing.graph, swing=swing, **kw)

    @property
    def n(self) -> int:
        return self.graph.n

    def build_model(self, attack, monitors):
        if self.swing is not None:
            return build_swing_model(self.swing, attack, monitors)
        return build_consensus_model(self.graph, attack, monitors)

    def attack_sets(self):
        return list(itertools.combinations(range(1, self.n + 1), self.n_a))

    def monitor_sets(self):
        return list(itertools.combinations(range(1, self.n + 1), self.n_s))

    def centrality_graph(self) -> Graph:
        return self.graph.unit_weight() if self.unit_weights else self.graph


def _solve_value(args) -> float:
    ctx, monitors, attack = args
    res = solve_wcai(ctx.build_model(attack, monitors), ctx.params, backend=ctx.backend)
    if res.optimal:
        return res.value
    return math.inf if res.status == "infeasible" else math.nan


class SolveCache:
    """WCAI values keyed by (monitor set, attack set); counts actual solves."""

    def __init__(self):
        self.values: dict[tuple, float] = {}
        self.solves = 0

    def get(self, ctx: AllocationContext, monitors, attack) -> float:
        key = (tuple(monitors), tuple(attack))
        if key not in self.values:
            self.values[key] = _solve_value((ctx, *key))
            self.solves += 1
        return self.values[key]

    def prefetch(self, ctx: AllocationContext, pairs) -> None:
        """Fill the cache for many pairs at once using ``ctx.jobs`` processes."""
        todo = [(tuple(m), tuple(a)) for m, a in dict.fromkeys(pairs) if (tuple(m), tuple(a)) not in self.values]
        if not todo:
            return
        if ctx.jobs <= 1 or len(todo) == 1:
            for m, a in todo:
                self.get(ctx, m, a)
            return
        with ProcessPoolExecutor(max_workers=ctx.jobs) as pool:
            vals = list(pool.map(_solve_value, [(ctx, m, a) for m, a in todo], chunksize=max(1, len(todo) // (4 * ctx.jobs))))
        for key, v in zip(todo, vals):
            self.values[key] = v
        self.solves += len(todo)


@dataclass
class AllocationResult:
    strategy: Strategy
    monitor_set: tuple[int, ...]
    wcai: float
    worst_attack: tuple[int, ...]
    inner_solves: int
    solve_time: float
    candidates: list[tuple[tuple[int, ...], float]] = field(default_factory=list)
    truncated: bool = False
    failed: int = 0

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy.value,
            "monitor_set": list(self.monitor_set),
            "wcai": self.wcai,
            "worst_attack": list(self.worst_attack),
            "inner_solves": self.inner_solves,
            "solve_time": self.solve_time,
            "candidates": [{"monitor_set": list(m), "wcai": v} for m, v in self.candidates],
            "truncated": self.truncated,
            "failed": self.failed,
        }


def _better(new: float, incumbent: float) -> bool:
    return new < incumbent - VALUE_RTOL * abs(incumbent)


def _worse(new: float, incumbent: float) -> bool:
    return new > incumbent + VALUE_RTOL * abs(incumbent)


def _inner(ctx, cache, monitors, bound=math.inf):
    """Worst attack for one monitor set.

    Returns ``(attack, J, failed)`` or ``None`` when pruned, i.e. once the
    running maximum shows the set cannot beat ``bound``.
    """
    attacks = ctx.attack_sets()
    table = {}
    failed = 0
    running = -math.inf
    for attack in attacks:
        j = cache.get(ctx, monitors, attack)
        if math.isnan(j) or math.isinf(j):
            failed += 1
            log.warning("WCAI for monitors %s, attack %s is %s; scenario excluded", monitors, attack, j)
            continue
        table[attack] = j
        running = max(running, j)
        if math.isfinite(bound) and not _better(running, bound):
            return None
    best_attack, best = None, -math.inf
    for attack, j in table.items():
        if best_attack is None or _worse(j, best):
            best_attack, best = attack, j
    if best_attack is None:
        raise RuntimeError(f"every attack scenario failed for monitor set {monitors}")
    return best_attack, best, failed


def worst_attack_for(monitors, ctx: AllocationContext, cache: SolveCache | None = None):
    """Largest WCAI over all attack sets of size ``n_a`` (lexicographic ties)."""
    monitors = vertex_set(monitors, ctx.n, size=ctx.n_s, what="monitor")
    cache = cache or SolveCache()
    attack, j, _ = _inner(ctx, cache, monitors)
    return attack, j


def _minimax(ctx, cache, candidates, prune):
    """Pick the candidate monitor set with the smallest worst-case WCAI."""
    best = None  # (monitors, attack, J)
    scored = []
    failed = 0
    for monitors in candidates:
        bound = best[2] if (prune and best is not None) else math.inf
        out = _inner(ctx, cache, monitors, bound)
        if out is None:
            continue
        attack, j, nf = out
        failed += nf
        scored.append((monitors, j))
        if best is None or _better(j, best[2]):
            best = (monitors, attack, j)
    return best, scored, failed


def allocate_optimal(ctx: AllocationContext, cache: SolveCache | None = None) -> AllocationResult:
    cache = cache or SolveCache()
    t0 = time.perf_counter()
    start = cache.solves
    sets = ctx.monitor_sets()
    if ctx.jobs > 1:
        # parallel solves cannot prune, so fetch everything up front
        cache.prefetch(ctx, [(m, a) for m in sets for a in ctx.attack_sets()])
    best, scored, failed = _minimax(ctx, cache, sets, ctx.prune and ctx.jobs <= 1)
    return AllocationResult(
        Strategy.OPTIMAL,
        best[0],
        best[2],
        best[1],
        cache.solves - start,
        time.perf_counter() - t0,
        scored,
        failed=failed,
    )


def allocate_by_centrality(kind, ctx: AllocationContext, cache: SolveCache | None = None) -> AllocationResult:
    kind = CentralityKind(kind)
    cache = cache or SolveCache()
    t0 = time.perf_counter()
    start = cache.solves
    scores = centrality(ctx.centrality_graph(), kind)
    tops, truncated = top_monitor_sets(scores, ctx.n_s, MAX_TIED_SETS)
    if truncated:
        log.warning("%s centrality: more than %d tied monitor sets, list truncated", kind.value, MAX_TIED_SETS)
    sets = [c.vertices for c in tops]
    if ctx.jobs > 1 and len(sets) > 1:
        cache.prefetch(ctx, [(m, a) for m in sets for a in ctx.attack_sets()])
    # every tied candidate is scored in full, so no pruning here
    best, scored, failed = _minimax(ctx, cache, sets, prune=False)
    return AllocationResult(
        Strategy(kind.value),
        best[0],
        best[2],
        best[1],
        cache.solves - start,
        time.perf_counter() - t0,
        scored,
        truncated,
        failed,
    )


def allocate_combined(ctx: AllocationContext, cache: SolveCache | None = None) -> AllocationResult:
    """Best of the three centrality picks; the cache is shared between them."""
    cache = cache or SolveCache()
    t0 = time.perf_counter()
    start = cache.solves
    runs = [allocate_by_centrality(k, ctx, cache) for k in CentralityKind]
    best = runs[0]
    for r in runs[1:]:
        if r.wcai < best.wcai or (r.wcai == best.wcai and r.monitor_set < best.monitor_set):
            best = r
    return AllocationResult(
        Strategy.COMBINED,
        best.monitor_set,
        best.wcai,
        best.worst_attack,
        cache.solves - start,
        time.perf_counter() - t0,
        [(r.monitor_set, r.wcai) for r in runs],
        any(r.truncated for r in runs),
        sum(r.failed for r in runs),
    )


def allocate(strategy, ctx: AllocationContext, cache: SolveCache | None = None) -> AllocationResult:
    strategy = Strategy(strategy)
    if strategy is Strategy.OPTIMAL:
        return allocate_optimal(ctx, cache)
    if strategy is Strategy.COMBINED:
        return allocate_combined(ctx, cache)
    return allocate_by_centrality(strategy.value, ctx, cache)


@dataclass
class GapReport:
    wcai_gap: dict[Strategy, float]
    time_gap: dict[Strategy, float]

    def to_dict(self) -> dict:
        return {
            "wcai_gap": {s.value: v for s, v in self.wcai_gap.items()},
            "time_gap": {s.value: v for s, v in self.time_gap.items()},
        }


def gap_report(results, tol: float = 1e-12) -> GapReport:
    """Relative gaps in percent against the optimal result.

    WCAI gap is ``100 (J_s - J_opt) / J_opt``; time gap is
    ``100 (t_opt - t_s) / t_opt`` so a faster heuristic has a positive gap.
    Gaps are NaN when the reference is not positive.
    """
    by = {Strategy(r.strategy): r for r in results}
    if Strategy.OPTIMAL not in by:
        raise ValueError("gap report needs the optimal result")
    opt = by[Strategy.OPTIMAL]
    wg, tg = {}, {}
    for s, r in by.items():
        wg[s] = 0.0 if s is Strategy.OPTIMAL else (100.0 * (r.wcai - opt.wcai) / opt.wcai if opt.wcai > tol else math.nan)
        tg[s] = 100.0 * (opt.solve_time - r.solve_time) / opt.solve_time if opt.solve_time > 0 else math.nan
    return GapReport(wg, tg)
