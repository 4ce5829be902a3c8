"""Weighted undirected graphs, Erdős–Rényi sampling and hop-count distances.

Vertices are 1-indexed everywhere a caller sees them (edge lists, JSON files,
vertex sets); adjacency and Laplacian arrays are ordinary 0-indexed numpy
arrays, so vertex ``v`` lives in row ``v - 1``.
"""

from __future__ import annotations

import json
import logging
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

MAX_REJECTIONS = 10_000
_SEED_MOD = 2**64


class DisconnectedGraphError(ValueError):
    pass


class UnconnectableParametersError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class Graph:
    n: int
    edges: tuple[tuple[int, int, float], ...]
    seed: int | None = None
    rejections: int = 0
    adjacency: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"vertex count must be >= 1, got {self.n}")
        adj = np.zeros((self.n, self.n))
        seen = set()
        clean = []
        for i, j, w in self.edges:
            i, j, w = int(i), int(j), float(w)
            if i > j:
                i, j = j, i
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if not (1 <= i and j <= self.n):
                raise ValueError(f"edge ({i}, {j}) out of range 1..{self.n}")
            if not (w > 0 and np.isfinite(w)):
                raise ValueError(f"edge ({i}, {j}) has non-positive weight {w}")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))
            clean.append((i, j, w))
            adj[i - 1, j - 1] = adj[j - 1, i - 1] = w
        adj.flags.writeable = False
        object.__setattr__(self, "edges", tuple(sorted(clean)))
        object.__setattr__(self, "adjacency", adj)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.edges == other.edges

    def __hash__(self):
        return hash((self.n, self.edges))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> list[int]:
        """1-indexed neighbours of 1-indexed vertex ``v``, ascending."""
        return [int(j) + 1 for j in np.flatnonzero(self.adjacency[v - 1])]

    def unit_weight(self) -> Graph:
        """Same topology with every edge weight set to 1."""
        return Graph(self.n, tuple((i, j, 1.0) for i, j, _ in self.edges))

    def relabel(self, perm) -> Graph:
        """Graph with vertex ``v`` renamed ``perm[v - 1]`` (``perm`` is 1-indexed)."""
        return Graph(self.n, tuple((perm[i - 1], perm[j - 1], w) for i, j, w in self.edges))

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [[i, j, w] for i, j, w in self.edges]}

    @classmethod
    def from_dict(cls, data: dict) -> Graph:
        try:
            n = int(data["n"])
            edges = [tuple(e) for e in data["edges"]]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed graph document: {exc}") from exc
        for e in edges:
            if len(e) != 3:
                raise ValueError(f"edge entry must be [i, j, w], got {list(e)}")
            if not e[0] < e[1]:
                raise ValueError(f"edge entries must satisfy i < j, got {list(e)}")
        return cls(n, tuple(edges))

    @classmethod
    def from_adjacency(cls, adj) -> Graph:
        adj = np.asarray(adj, dtype=float)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency must be square")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diag(adj) != 0):
            raise ValueError("adjacency must have a zero diagonal")
        iu, ju = np.nonzero(np.triu(adj, 1))
        return cls(adj.shape[0], tuple((int(i) + 1, int(j) + 1, float(adj[i, j])) for i, j in zip(iu, ju)))


def load_graph(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return Graph.from_dict(json.load(fh))


def save_graph(g: Graph, path) -> None:
    Path(path).write_text(json.dumps(g.to_dict()) + "\n", encoding="utf-8")


def path_graph(n: int) -> Graph:
    return Graph(n, tuple((i, i + 1, 1.0) for i in range(1, n)))


def cycle_graph(n: int) -> Graph:
    edges = [(i, i + 1, 1.0) for i in range(1, n)]
    if n > 2:
        edges.append((1, n, 1.0))
    return Graph(n, tuple(edges))


def complete_graph(n: int) -> Graph:
    return Graph(n, tuple((i, j, 1.0) for i in range(1, n + 1) for j in range(i + 1, n + 1)))


def star_graph(n: int, center: int = 1) -> Graph:
    return Graph(n, tuple((min(center, v), max(center, v), 1.0) for v in range(1, n + 1) if v != center))


def _sample_er(n: int, p: float, seed: int) -> Graph:
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < p
    return Graph(n, tuple((int(i) + 1, int(j) + 1, 1.0) for i, j in zip(iu[keep], ju[keep])), seed=seed)


def generate_erdos_renyi(n: int, p: float, seed: int, max_rejections: int = MAX_REJECTIONS) -> Graph:
    """Sample a connected G(n, p) graph with unit edge weights.

    Disconnected samples are thrown away and the generator is reseeded with
    ``seed + 1``, ``seed + 2``, ... The returned graph records the seed that
    was accepted and how many samples were rejected before it.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    seed = int(seed) % _SEED_MOD
    for k in range(max_rejections + 1):
        g = _sample_er(n, p, (seed + k) % _SEED_MOD)
        if is_connected(g):
            if k:
                log.debug("G(%d, %g) seed %d: %d disconnected samples rejected", n, p, seed, k)
            object.__setattr__(g, "rejections", k)
            return g
    raise UnconnectableParametersError(
        f"no connected G({n}, {p}) sample within {max_rejections} rejections (seed {seed})"
    )


def laplacian(g: Graph) -> np.ndarray:
    adj = g.adjacency
    return np.diag(adj.sum(axis=1)) - adj


def _bfs(adj: np.ndarray, source: int) -> np.ndarray:
    dist = np.full(adj.shape[0], -1, dtype=int)
    dist[source] = 0
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for w in np.flatnonzero(adj[v]):
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def is_connected(g: Graph) -> bool:
    return bool(np.all(_bfs(g.adjacency, 0) >= 0))


def all_pairs_hop_distance(g: Graph) -> np.ndarray:
    """Matrix of minimum edge counts between vertices; weights are ignored."""
    dist = np.vstack([_bfs(g.adjacency, s) for s in range(g.n)])
    if np.any(dist < 0):
        raise DisconnectedGraphError("graph is disconnected; some vertex pairs are unreachable")
    return dist
