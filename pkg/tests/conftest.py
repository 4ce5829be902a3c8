import itertools

import numpy as np
import pytest

from secalloc.graph import Graph, generate_erdos_renyi


def random_connected_graph(rng: np.random.Generator, n_lo: int = 2, n_hi: int = 7) -> Graph:
    n = int(rng.integers(n_lo, n_hi + 1))
    p = float(rng.uniform(0.2, 0.9))
    return generate_erdos_renyi(n, p, int(rng.integers(2**63)))


def random_scenario(rng: np.random.Generator, n_max: int = 12):
    """(graph, attack, monitors) with room left for one more monitor."""
    n = int(rng.integers(3, n_max + 1))
    g = generate_erdos_renyi(n, float(rng.uniform(0.3, 0.8)), int(rng.integers(2**63)))
    n_a = int(rng.integers(1, 3))
    attack = sorted(int(v) + 1 for v in rng.choice(n, n_a, replace=False))
    n_s = int(rng.integers(1, n))
    monitors = sorted(int(v) + 1 for v in rng.choice(n, n_s, replace=False))
    return g, attack, monitors


def all_shortest_paths(g: Graph, s: int, t: int):
    """Every shortest s-t path (0-indexed vertices) by exhaustive DFS over simple paths."""
    adj = g.adjacency
    best, paths = None, []

    def dfs(path, seen):
        nonlocal best, paths
        v = path[-1]
        if best is not None and len(path) - 1 > best:
            return
        if v == t:
            length = len(path) - 1
            if best is None or length < best:
                best, paths = length, [list(path)]
            elif length == best:
                paths.append(list(path))
            return
        for w in np.flatnonzero(adj[v]):
            if w not in seen:
                seen.add(w)
                path.append(w)
                dfs(path, seen)
                path.pop()
                seen.discard(w)

    dfs([s], {s})
    return best, paths


def brute_force_betweenness(g: Graph) -> np.ndarray:
    n = g.n
    cb = np.zeros(n)
    for s, t in itertools.combinations(range(n), 2):
        _, paths = all_shortest_paths(g, s, t)
        for v in range(n):
            if v in (s, t):
                continue
            cb[v] += sum(v in p[1:-1] for p in paths) / len(paths)
    return cb


def brute_force_closeness(g: Graph) -> np.ndarray:
    n = g.n
    total = np.zeros(n)
    for s in range(n):
        for t in range(n):
            if s != t:
                total[s] += all_shortest_paths(g, s, t)[0]
    return (n - 1) / total


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# lines collected by the acceptance suite, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
