"""Worst-case impact of stealthy attacks, computed as a dissipativity SDP.

For a model ``x' = A x + B zeta`` with performance rows ``C`` and monitor rows
``c_k`` the impact bound is::

    min   A_e * beta + delta * sum_k gamma_k
    s.t.  [[A'P + PA + C'C - sum_k gamma_k c_k'c_k,  P B    ],
           [B'P,                                      -beta I]]  <= 0,
          P >= 0,  beta >= eps,  gamma_k >= eps.

Any stealthy attack (monitor energies ``<= delta``) of energy ``<= A_e`` then
produces performance energy at most the optimal value; :func:`validate_bound`
checks this by simulation.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import sdp
from .model import SystemModel, _attack_samples, _grid, propagate, time_average

EPS = 1e-9
REACH_RTOL = 1e-9
COARSE_TOL = 1e-6
FINE_TOL = 1e-8
_USABLE = ("Solved", "AlmostSolved", "optimal")


@dataclass(frozen=True)
class ScenarioParams:
    delta: float = 1.0
    attack_energy: float = 1.0

    def __post_init__(self):
        if not (self.delta > 0 and self.attack_energy > 0):
            raise ValueError(f"delta and attack_energy must be positive, got {self.delta}, {self.attack_energy}")

    def scaled(self, c: float) -> ScenarioParams:
        return ScenarioParams(c * self.delta, c * self.attack_energy)


@dataclass(eq=False)
class WcaiResult:
    value: float
    beta: float
    gammas: np.ndarray
    p_mat: np.ndarray | None
    status: str
    solve_time: float
    residual: float = math.nan
    backend: str = "clarabel"
    coords: Coordinates | None = None

    def storage_matrix(self) -> np.ndarray | None:
        """``P`` in the original coordinates, valid on states reachable from rest."""
        if self.p_mat is None or self.coords is None:
            return self.p_mat
        return self.coords.inv.T @ self.p_mat @ self.coords.inv

    @property
    def optimal(self) -> bool:
        return self.status == sdp.OPTIMAL

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "beta": self.beta,
            "gammas": [float(g) for g in self.gammas],
            "status": self.status,
            "solve_time": self.solve_time,
            "residual": self.residual,
            "backend": self.backend,
        }


def _sym_basis(n: int):
    iu, ju = np.triu_indices(n)
    basis = np.zeros((iu.size, n, n))
    basis[np.arange(iu.size), iu, ju] = 1.0
    basis[np.arange(iu.size), ju, iu] = 1.0
    return basis


@dataclass(frozen=True, eq=False)
class Coordinates:
    """A change of state coordinates ``x = fwd @ z``, ``z = inv @ x``.

    ``fwd`` spans the states reachable from rest, so ``inv @ fwd`` is the
    identity even when there are fewer reduced states than original ones.
    """

    fwd: np.ndarray
    inv: np.ndarray

    @property
    def dim(self) -> int:
        return self.fwd.shape[1]

    def apply(self, model: SystemModel) -> SystemModel:
        return SystemModel(
            a_mat=self.inv @ model.a_mat @ self.fwd,
            b_cols=self.inv @ model.b_cols,
            perf_rows=model.perf_rows @ self.fwd,
            monitor_rows=model.monitor_rows @ self.fwd,
            attack=model.attack,
            monitors=model.monitors,
        )

    def then(self, t: np.ndarray, t_inv: np.ndarray) -> Coordinates:
        return Coordinates(self.fwd @ t, t_inv @ self.inv)


def reachable_basis(a: np.ndarray, b: np.ndarray, rtol: float = REACH_RTOL) -> np.ndarray:
    """Orthonormal basis of span{B, AB, A^2 B, ...} by block Arnoldi.

    Directions whose new component falls below ``rtol * max(1, ||A||)`` are
    treated as unreachable.
    """
    n = a.shape[0]
    floor = rtol * max(1.0, np.linalg.norm(a, 2), np.linalg.norm(b, 2))
    q = np.zeros((n, 0))
    block = b
    while q.shape[1] < n:
        for _ in range(2):  # re-orthogonalise once for stability
            block = block - q @ (q.T @ block)
        u, s, _ = np.linalg.svd(block, full_matrices=False)
        keep = s > floor
        if not keep.any():
            break
        fresh = u[:, keep]
        q = np.hstack([q, fresh])
        block = a @ fresh
    return q


def reachable_coordinates(model: SystemModel) -> Coordinates:
    q = reachable_basis(model.a_mat, model.b_cols)
    return Coordinates(q, q.T)


def assemble_wcai_sdp(model: SystemModel, params: ScenarioParams, eps: float = EPS) -> sdp.SdpProblem:
    """Variables are ``[upper-triangle entries of P, beta, gamma_1..gamma_k]``.

    The objective is divided by ``A_e`` so that scaling ``delta`` and ``A_e``
    together leaves the problem unchanged.
    """
    a, b = model.a_mat, model.b_cols
    c_perf, c_mon = model.perf_rows, model.monitor_rows
    n, m = model.state_dim, model.n_attack
    n_mon = c_mon.shape[0]
    if c_mon.shape[1] != n or c_perf.shape[1] != n or b.shape[0] != n:
        raise ValueError("model matrices have inconsistent dimensions")
    basis = _sym_basis(n)
    n_p = basis.shape[0]
    k = n_p + 1 + n_mon
    size = n + m

    const = np.zeros((size, size))
    cc = c_perf.T @ c_perf
    const[:n, :n] = 0.5 * (cc + cc.T)
    coeffs = np.zeros((k, size, size))
    pa = basis @ a
    coeffs[:n_p, :n, :n] = pa + pa.transpose(0, 2, 1)
    pb = basis @ b
    coeffs[:n_p, :n, n:] = pb
    coeffs[:n_p, n:, :n] = pb.transpose(0, 2, 1)
    coeffs[n_p, n:, n:] = -np.eye(m)
    for j in range(n_mon):
        coeffs[n_p + 1 + j, :n, :n] = -np.outer(c_mon[j], c_mon[j])
    dissipation = sdp.LmiBlock(const, coeffs)

    storage_coeffs = np.zeros((k, n, n))
    storage_coeffs[:n_p] = -basis
    storage = sdp.LmiBlock(np.zeros((n, n)), storage_coeffs)

    c = np.zeros(k)
    c[n_p] = 1.0
    c[n_p + 1 :] = params.delta / params.attack_energy
    lower = np.full(k, -np.inf)
    lower[n_p:] = eps
    names = {"state_dim": n, "n_p": n_p, "n_monitor": n_mon}
    return sdp.SdpProblem(c, [dissipation, storage], lower, names)


def unpack(problem: sdp.SdpProblem, x: np.ndarray):
    n, n_p = problem.names["state_dim"], problem.names["n_p"]
    p_mat = np.zeros((n, n))
    iu, ju = np.triu_indices(n)
    p_mat[iu, ju] = x[:n_p]
    p_mat[ju, iu] = x[:n_p]
    return p_mat, float(x[n_p]), np.array(x[n_p + 1 :])


def _whitening(p_mat: np.ndarray, mu: float = 1e-4):
    """Congruence that maps a storage estimate to roughly the identity."""
    w, v = np.linalg.eigh(0.5 * (p_mat + p_mat.T))
    w = np.maximum(w, 0.0)
    if not w.max() > 0:
        return None
    d = 1.0 / np.sqrt(w + mu * w.max())
    return v * d, (v / d).T


def _attempt(model, coords, params, backend, eps, tol):
    problem = assemble_wcai_sdp(coords.apply(model), params, eps)
    return problem, sdp.solve(problem, backend, tol=tol)


def solve_wcai(
    model: SystemModel,
    params: ScenarioParams,
    backend: str = "clarabel",
    eps: float = EPS,
    refine: bool = True,
) -> WcaiResult:
    """Solve the impact SDP on the reachable subspace.

    With ``refine`` a coarse first solve supplies a storage estimate, the
    state is rescaled so that estimate becomes well conditioned, and the
    problem is solved again to full accuracy. The optimal value does not
    depend on the coordinates; the rescaling only helps the solver, whose
    plain answer can be off by 1e-5 relative when ``P`` spans several
    orders of magnitude.
    """
    t0 = time.perf_counter()
    coords = reachable_coordinates(model)
    problem, sol = None, None
    if refine:
        _, coarse = _attempt(model, coords, params, backend, eps, COARSE_TOL)
        if coarse.x is not None and coarse.raw_status in _USABLE:
            p0, _, _ = unpack(assemble_wcai_sdp(coords.apply(model), params, eps), coarse.x)
            whiten = _whitening(p0)
            if whiten is not None:
                scaled = coords.then(*whiten)
                problem, sol = _attempt(model, scaled, params, backend, eps, FINE_TOL)
                if sol.status == sdp.OPTIMAL:
                    coords = scaled
    if sol is None or sol.status != sdp.OPTIMAL:
        problem, sol = _attempt(model, coords, params, backend, eps, FINE_TOL)
    elapsed = time.perf_counter() - t0
    if sol.status != sdp.OPTIMAL or sol.x is None:
        value = math.inf if sol.status == sdp.INFEASIBLE else math.nan
        return WcaiResult(value, math.nan, np.array([]), None, sol.status, elapsed, backend=sol.backend)
    p_mat, beta, gammas = unpack(problem, sol.x)
    value = params.attack_energy * beta + params.delta * float(gammas.sum())
    return WcaiResult(
        value=value,
        beta=beta,
        gammas=gammas,
        p_mat=p_mat,
        status=sol.status,
        solve_time=elapsed,
        residual=problem.max_residual(sol.x),
        backend=sol.backend,
        coords=coords,
    )


def lmi_residual(model: SystemModel, result: WcaiResult) -> float:
    """Largest eigenvalue of the dissipation LMI rebuilt from the certificate
    (in the reduced coordinates the certificate was computed in)."""
    reduced = result.coords.apply(model) if result.coords is not None else model
    a, b = reduced.a_mat, reduced.b_cols
    p = result.p_mat
    top = a.T @ p + p @ a + reduced.perf_rows.T @ reduced.perf_rows
    top -= sum(g * np.outer(r, r) for g, r in zip(result.gammas, reduced.monitor_rows))
    lmi = np.block([[top, p @ b], [b.T @ p, -result.beta * np.eye(b.shape[1])]])
    return float(np.linalg.eigvalsh(0.5 * (lmi + lmi.T))[-1])


@dataclass
class BoundReport:
    bound: float
    achieved: np.ndarray
    violations: list[int]
    best_ratio: float

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_bound(
    model: SystemModel,
    params: ScenarioParams,
    result: WcaiResult,
    trial_attacks,
    horizon: float = 20.0,
    step: float = 1e-3,
    rtol: float = 1e-3,
    batch: int = 16,
) -> BoundReport:
    """Simulate trial attacks, rescale each to the largest stealthy admissible
    amplitude, and compare the performance energy reached with the bound."""
    if not result.optimal:
        raise ValueError(f"cannot validate a {result.status} result")
    _, h, t = _grid(horizon, step)
    n_perf = model.perf_rows.shape[0]
    rows = np.vstack([model.perf_rows, model.monitor_rows])
    achieved = []
    trials = list(trial_attacks)
    for start in range(0, len(trials), batch):
        chunk = [_attack_samples(sig, t, h, model.n_attack) for sig in trials[start : start + batch]]
        u_grid = np.concatenate([g for g, _ in chunk], axis=2)
        u_mid = np.concatenate([m for _, m in chunk], axis=2)
        y = propagate(model, u_grid, u_mid, h, rows)
        perf = time_average((y[:, :n_perf] ** 2).sum(axis=1), t)
        mon = time_average(y[:, n_perf:] ** 2, t)
        energy = time_average((u_grid**2).sum(axis=1), t)
        for j in range(u_grid.shape[2]):
            limits = [params.attack_energy / energy[j] if energy[j] > 0 else math.inf]
            limits += [params.delta / e if e > 0 else math.inf for e in mon[:, j]]
            scale = min(limits)
            achieved.append(0.0 if not math.isfinite(scale) else scale * perf[j])
    achieved = np.array(achieved)
    violations = [i for i, v in enumerate(achieved) if v > result.value * (1 + rtol)]
    best = float(achieved.max() / result.value) if achieved.size and result.value > 0 else 0.0
    return BoundReport(result.value, achieved, violations, best)


def random_trial_attacks(n_attack: int, count: int, rng: np.random.Generator, horizon: float = 20.0) -> list:
    """A mix of sinusoid banks, ramps, steps and pulses on every attack channel."""
    trials = []
    for i in range(count):
        kind = i % 4
        if kind == 0:
            freqs = rng.uniform(0.05, 5.0, (3, n_attack))
            amps = rng.normal(size=(3, n_attack))
            phases = rng.uniform(0, 2 * np.pi, (3, n_attack))
            fn = lambda t, f=freqs, a=amps, p=phases: (a[None] * np.sin(2 * np.pi * f[None] * t[:, None, None] + p[None])).sum(axis=1)
        elif kind == 1:
            slope = rng.normal(size=n_attack)
            fn = lambda t, s=slope: np.minimum(t[:, None] / horizon * 4, 1.0) * s[None]
        elif kind == 2:
            level = rng.normal(size=n_attack)
            t_on = rng.uniform(0, horizon / 2)
            fn = lambda t, lv=level, t0=t_on: (t[:, None] >= t0) * lv[None]
        else:
            centre = rng.uniform(0, horizon, n_attack)
            width = rng.uniform(0.2, 3.0, n_attack)
            amp = rng.normal(size=n_attack)
            fn = lambda t, c=centre, w=width, a=amp: a[None] * np.exp(-(((t[:, None] - c[None]) / w[None]) ** 2))
        trials.append(fn)
    return trials
