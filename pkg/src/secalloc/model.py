"""LTI models of attacked networks and a fixed-step simulator for them.

Two families are built here:

* first-order consensus, ``x' = -L x + B zeta``, performance on every state;
* the linearised swing equation with state ``[theta; theta_dot]``, where the
  attack enters a bus's acceleration scaled by ``1 / I_a`` and performance
  is measured on the bus angles.

Monitors always read single state coordinates (a bus angle for swing models).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import simpson

from .graph import Graph, is_connected, laplacian


class SimulationDivergedError(FloatingPointError):
    def __init__(self, time: float):
        super().__init__(f"state became non-finite at t = {time:.6g}")
        self.time = time


def vertex_set(ids, n: int, size: int | None = None, what: str = "vertex") -> tuple[int, ...]:
    """Validate a collection of 1-indexed ids and return it as a sorted tuple."""
    ids = [int(v) for v in ids]
    if len(set(ids)) != len(ids):
        raise ValueError(f"duplicate {what} ids in {ids}")
    bad = [v for v in ids if not 1 <= v <= n]
    if bad:
        raise ValueError(f"{what} ids {bad} outside 1..{n}")
    if size is not None and len(ids) != size:
        raise ValueError(f"expected {size} {what} ids, got {len(ids)}")
    return tuple(sorted(ids))


@dataclass(frozen=True, eq=False)
class SystemModel:
    a_mat: np.ndarray
    b_cols: np.ndarray
    perf_rows: np.ndarray
    monitor_rows: np.ndarray
    attack: tuple[int, ...] = ()
    monitors: tuple[int, ...] = ()
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        n = self.a_mat.shape[0]
        if self.a_mat.shape != (n, n):
            raise ValueError(f"state matrix must be square, got {self.a_mat.shape}")
        if self.b_cols.ndim != 2 or self.b_cols.shape[0] != n:
            raise ValueError(f"attack map must have {n} rows, got {self.b_cols.shape}")
        for name in ("perf_rows", "monitor_rows"):
            rows = getattr(self, name)
            if rows.ndim != 2 or rows.shape[1] != n:
                raise ValueError(f"{name} must have {n} columns, got {rows.shape}")

    @property
    def state_dim(self) -> int:
        return self.a_mat.shape[0]

    @property
    def n_attack(self) -> int:
        return self.b_cols.shape[1]


def _selector(idx, dim: int) -> np.ndarray:
    rows = np.zeros((len(idx), dim))
    rows[np.arange(len(idx)), list(idx)] = 1.0
    return rows


def build_consensus_model(g: Graph, attack, monitors) -> SystemModel:
    if not is_connected(g):
        raise ValueError("consensus model needs a connected graph")
    attack = vertex_set(attack, g.n, what="attack")
    monitors = vertex_set(monitors, g.n, what="monitor")
    n = g.n
    b = np.zeros((n, len(attack)))
    for k, a in enumerate(attack):
        b[a - 1, k] = 1.0
    return SystemModel(
        a_mat=-laplacian(g),
        b_cols=b,
        perf_rows=np.eye(n),
        monitor_rows=_selector([m - 1 for m in monitors], n),
        attack=attack,
        monitors=monitors,
        labels=tuple(f"x{i}" for i in range(1, n + 1)),
    )


@dataclass(frozen=True, eq=False)
class SwingParams:
    inertia: np.ndarray
    damping: np.ndarray
    susceptance_edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        inertia = np.asarray(self.inertia, dtype=float)
        damping = np.asarray(self.damping, dtype=float)
        if inertia.shape != damping.shape or inertia.ndim != 1:
            raise ValueError("inertia and damping must be vectors of equal length")
        if np.any(inertia <= 0):
            raise ValueError("every inertia must be strictly positive")
        if np.any(damping < 0):
            raise ValueError("damping must be non-negative")
        edges = tuple((int(i), int(j), abs(float(w))) for i, j, w in self.susceptance_edges)
        object.__setattr__(self, "inertia", inertia)
        object.__setattr__(self, "damping", damping)
        object.__setattr__(self, "susceptance_edges", edges)
        self.graph  # validates the edge list

    @property
    def n(self) -> int:
        return self.inertia.size

    @property
    def graph(self) -> Graph:
        """Susceptance-weighted network (weights are line susceptance magnitudes)."""
        return Graph(self.n, self.susceptance_edges)

    def __eq__(self, other):
        if not isinstance(other, SwingParams):
            return NotImplemented
        return (
            np.array_equal(self.inertia, other.inertia)
            and np.array_equal(self.damping, other.damping)
            and self.graph == other.graph
        )

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "inertia": self.inertia.tolist(),
            "damping": self.damping.tolist(),
            "susceptance_edges": [list(e) for e in self.susceptance_edges],
        }

    @classmethod
    def from_dict(cls, data: dict) -> SwingParams:
        params = cls(data["inertia"], data["damping"], tuple(tuple(e) for e in data["susceptance_edges"]))
        if "n" in data and int(data["n"]) != params.n:
            raise ValueError(f"bus count {data['n']} does not match {params.n} inertia entries")
        return params


def load_ieee14() -> SwingParams:
    try:
        text = resources.files("secalloc").joinpath("data/ieee14.json").read_text(encoding="utf-8")
        return SwingParams.from_dict(json.loads(text))
    except (OSError, KeyError, ValueError) as exc:
        raise RuntimeError(f"IEEE 14-bus data asset is missing or corrupted: {exc}") from exc


def build_swing_model(params: SwingParams, attack, monitors) -> SystemModel:
    n = params.n
    attack = vertex_set(attack, n, what="attack bus")
    monitors = vertex_set(monitors, n, what="monitor bus")
    inv_inertia = 1.0 / params.inertia
    lap = laplacian(params.graph)
    a = np.zeros((2 * n, 2 * n))
    a[:n, n:] = np.eye(n)
    a[n:, :n] = -inv_inertia[:, None] * lap
    a[n:, n:] = -np.diag(inv_inertia * params.damping)
    b = np.zeros((2 * n, len(attack)))
    for k, bus in enumerate(attack):
        b[n + bus - 1, k] = inv_inertia[bus - 1]
    return SystemModel(
        a_mat=a,
        b_cols=b,
        perf_rows=_selector(range(n), 2 * n),
        monitor_rows=_selector([m - 1 for m in monitors], 2 * n),
        attack=attack,
        monitors=monitors,
        labels=tuple(f"theta{i}" for i in range(1, n + 1)) + tuple(f"omega{i}" for i in range(1, n + 1)),
    )


@dataclass(frozen=True, eq=False)
class SimulationResult:
    """Sampled outputs of one simulation.

    Energies are time averages ``(1/T) * integral ||.||^2 dt`` (Simpson's rule
    on the integration grid). ``perf_energy`` sums over all performance outputs,
    ``monitor_energy`` has one entry per monitor.
    """

    t: np.ndarray
    perf: np.ndarray
    monitor: np.ndarray
    attack: np.ndarray
    perf_energy: float
    monitor_energy: np.ndarray
    attack_energy: float


def _rk4_operators(a: np.ndarray, b: np.ndarray, h: float):
    """Matrices of one RK4 step: x+ = phi x + g0 u(t) + gm u(t + h/2) + g1 u(t + h)."""

    def step(x, u0, um, u1):
        k1 = a @ x + b @ u0
        k2 = a @ (x + 0.5 * h * k1) + b @ um
        k3 = a @ (x + 0.5 * h * k2) + b @ um
        k4 = a @ (x + h * k3) + b @ u1
        return x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)

    n, m = b.shape
    zx, zu, iu = np.zeros((n, m)), np.zeros((m, m)), np.eye(m)
    phi = step(np.eye(n), np.zeros((m, n)), np.zeros((m, n)), np.zeros((m, n)))
    return phi, step(zx, iu, zu, zu), step(zx, zu, iu, zu), step(zx, zu, zu, iu)


def _grid(horizon: float, step: float):
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    if not horizon >= step:
        raise ValueError(f"horizon {horizon} shorter than step {step}")
    k = int(round(horizon / step))
    h = horizon / k
    return k, h, np.linspace(0.0, horizon, k + 1)


def _attack_samples(signal, t: np.ndarray, h: float, m: int):
    """Attack values on the grid and at step midpoints, shaped (time, m, batch)."""
    if callable(signal):
        grid = np.asarray(signal(t), dtype=float)
        mid = np.asarray(signal(t[:-1] + 0.5 * h), dtype=float)
    else:
        grid = np.asarray(signal, dtype=float)
        if grid.shape[0] != t.size:
            raise ValueError(f"sampled attack needs {t.size} samples, got {grid.shape[0]}")
        mid = 0.5 * (grid[:-1] + grid[1:])
    out = []
    for arr, length in ((grid, t.size), (mid, t.size - 1)):
        if arr.ndim == 0:
            arr = np.full(length, float(arr))
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.shape[:2] != (length, m):
            raise ValueError(f"attack samples have shape {arr.shape}, expected ({length}, {m}, ...)")
        out.append(arr)
    return out


def propagate(model: SystemModel, u_grid: np.ndarray, u_mid: np.ndarray, h: float, rows: np.ndarray) -> np.ndarray:
    """Integrate from x(0) = 0 and return ``rows @ x`` at every grid point.

    ``u_grid`` has shape (K + 1, m, batch) and ``u_mid`` (K, m, batch); the
    result has shape (K + 1, len(rows), batch).
    """
    phi, g0, gm, g1 = _rk4_operators(model.a_mat, model.b_cols, h)
    steps, batch = u_mid.shape[0], u_grid.shape[2]
    x = np.zeros((model.state_dim, batch))
    out = np.empty((steps + 1, rows.shape[0], batch))
    out[0] = 0.0
    with np.errstate(over="ignore", invalid="ignore"):  # divergence is reported below
        for k in range(steps):
            x = phi @ x + g0 @ u_grid[k] + gm @ u_mid[k] + g1 @ u_grid[k + 1]
            if k % 256 == 255 and not np.all(np.isfinite(x)):
                raise SimulationDivergedError((k + 1) * h)
            out[k + 1] = rows @ x
    if not np.all(np.isfinite(x)):
        raise SimulationDivergedError(steps * h)
    return out


def time_average(values: np.ndarray, t: np.ndarray) -> np.ndarray:
    """(1/T) * integral over the grid along axis 0."""
    return simpson(values, x=t, axis=0) / (t[-1] - t[0])


def simulate(
    model: SystemModel,
    attack_signal: Callable | np.ndarray | Sequence,
    horizon: float = 20.0,
    step: float = 1e-3,
) -> SimulationResult:
    """Fixed-step RK4 response to one attack waveform, starting at rest.

    ``attack_signal`` is either a callable of a time array returning
    ``(len(t),)`` or ``(len(t), n_a)`` values, or samples on the grid
    ``0, h, ..., T`` (linearly interpolated at step midpoints).
    """
    k, h, t = _grid(horizon, step)
    u_grid, u_mid = _attack_samples(attack_signal, t, h, model.n_attack)
    n_perf = model.perf_rows.shape[0]
    y = propagate(model, u_grid, u_mid, h, np.vstack([model.perf_rows, model.monitor_rows]))[:, :, 0]
    perf, mon = y[:, :n_perf], y[:, n_perf:]
    zeta = u_grid[:, :, 0]
    return SimulationResult(
        t=t,
        perf=perf,
        monitor=mon,
        attack=zeta,
        perf_energy=float(time_average((perf**2).sum(axis=1), t)),
        monitor_energy=time_average(mon**2, t),
        attack_energy=float(time_average((zeta**2).sum(axis=1), t)),
    )
