"""Degree, closeness and betweenness centrality, and top-scoring vertex sets.

Distances are hop counts on every graph, weighted or not. Betweenness sums
over unordered source/target pairs, so a path graph 1-2-3 gives vertex 2 a
score of 1 rather than 2.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .graph import DisconnectedGraphError, Graph, all_pairs_hop_distance, is_connected

MAX_TIED_SETS = 1000
TIE_RTOL = 1e-9


class CentralityKind(str, Enum):
    DEGREE = "degree"
    CLOSENESS = "closeness"
    BETWEENNESS = "betweenness"


@dataclass(frozen=True, eq=False)
class CentralityScores:
    kind: CentralityKind
    values: np.ndarray

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class MonitorSetCandidate:
    vertices: tuple[int, ...]
    total_score: float


def degree_centrality(g: Graph) -> CentralityScores:
    return CentralityScores(CentralityKind.DEGREE, g.adjacency.sum(axis=1))


def closeness_centrality(g: Graph) -> CentralityScores:
    if g.n < 2:
        raise ValueError("closeness centrality needs at least two vertices")
    dist = all_pairs_hop_distance(g)
    return CentralityScores(CentralityKind.CLOSENESS, (g.n - 1) / dist.sum(axis=1))


def betweenness_centrality(g: Graph) -> CentralityScores:
    """Brandes' dependency accumulation over BFS shortest-path DAGs."""
    if not is_connected(g):
        raise DisconnectedGraphError("betweenness requires a connected graph")
    n = g.n
    nbrs = [np.flatnonzero(g.adjacency[v]) for v in range(n)]
    cb = np.zeros(n)
    for s in range(n):
        order = []
        preds = [[] for _ in range(n)]
        sigma = np.zeros(n)
        sigma[s] = 1.0
        dist = np.full(n, -1)
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            order.append(v)
            for w in nbrs[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = np.zeros(n)
        for w in reversed(order):
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                cb[w] += delta[w]
    # each unordered pair was seen from both endpoints
    return CentralityScores(CentralityKind.BETWEENNESS, cb / 2.0)


_MEASURES = {
    CentralityKind.DEGREE: degree_centrality,
    CentralityKind.CLOSENESS: closeness_centrality,
    CentralityKind.BETWEENNESS: betweenness_centrality,
}


def centrality(g: Graph, kind) -> CentralityScores:
    return _MEASURES[CentralityKind(kind)](g)


def top_monitor_sets(
    scores, n_s: int, cap: int = MAX_TIED_SETS
) -> tuple[list[MonitorSetCandidate], bool]:
    """All size-``n_s`` vertex sets with the largest total score.

    Returns the candidates in lexicographic order together with a flag that is
    true when more than ``cap`` sets tie and the list was cut short. Scores
    within a relative ``1e-9`` of each other count as equal.
    """
    values = np.asarray(getattr(scores, "values", scores), dtype=float)
    n = values.size
    if not 1 <= n_s <= n:
        raise ValueError(f"budget must satisfy 1 <= n_s <= {n}, got {n_s}")
    threshold = np.sort(values)[::-1][n_s - 1]

    def close(x):
        return math.isclose(x, threshold, rel_tol=TIE_RTOL, abs_tol=1e-12)

    above = [v + 1 for v in range(n) if values[v] > threshold and not close(values[v])]
    tied = [v + 1 for v in range(n) if close(values[v])]
    need = n_s - len(above)
    # for equal-size sets sharing ``above``, lexicographic order of the tied
    # part equals lexicographic order of the union, so islice keeps the order
    combos = list(itertools.islice(itertools.combinations(tied, need), cap + 1))
    truncated = len(combos) > cap
    out = []
    for combo in combos[:cap]:
        verts = tuple(sorted(above + list(combo)))
        out.append(MonitorSetCandidate(verts, float(sum(values[v - 1] for v in verts))))
    return out, truncated
