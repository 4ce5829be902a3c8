"""A small standard form for linear-matrix-inequality programs and its solvers.

Problems are written as::

    minimize    c @ x
    subject to  F0_b + sum_i x_i F_ib  <=  0   (negative semidefinite, every block b)
                x >= lower                      (entrywise, -inf for free variables)

Two interior-point backends take this form: Clarabel (the default) and
CVXOPT's ``solvers.sdp``. Each can cross-check the other.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

GAP_RTOL = 1e-7
RESIDUAL_TOL = 1e-6

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
NUMERICAL_FAILURE = "numerical-failure"


@dataclass(eq=False)
class LmiBlock:
    const: np.ndarray
    coeffs: np.ndarray  # (num_vars, m, m)

    def __post_init__(self):
        m = self.const.shape[0]
        if self.const.shape != (m, m) or self.coeffs.shape[1:] != (m, m):
            raise ValueError("LMI block matrices must be square and of matching size")
        if not np.allclose(self.const, self.const.T) or not np.allclose(self.coeffs, self.coeffs.transpose(0, 2, 1)):
            raise ValueError("LMI block matrices must be symmetric")

    @property
    def size(self) -> int:
        return self.const.shape[0]

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return self.const + np.tensordot(x, self.coeffs, axes=1)


@dataclass(eq=False)
class SdpProblem:
    c: np.ndarray
    blocks: list[LmiBlock]
    lower: np.ndarray
    names: dict = field(default_factory=dict)

    def __post_init__(self):
        k = self.c.size
        if self.lower.shape != (k,):
            raise ValueError("lower bounds must match the number of variables")
        for blk in self.blocks:
            if blk.coeffs.shape[0] != k:
                raise ValueError(f"LMI block has {blk.coeffs.shape[0]} coefficient matrices, expected {k}")

    @property
    def num_vars(self) -> int:
        return self.c.size

    def max_residual(self, x: np.ndarray) -> float:
        """Largest eigenvalue over all blocks at ``x`` (<= 0 means feasible)."""
        return max(float(np.linalg.eigvalsh(b.evaluate(x))[-1]) for b in self.blocks)


@dataclass
class ConicSolution:
    x: np.ndarray | None
    status: str
    primal_objective: float
    dual_objective: float
    iterations: int
    solve_time: float
    backend: str
    raw_status: str

    @property
    def gap(self) -> float:
        return abs(self.primal_objective - self.dual_objective)


def _svec_index(m: int):
    """Upper-triangle column-major indices and the sqrt(2) off-diagonal scaling."""
    rows, cols = [], []
    for j in range(m):
        for i in range(j + 1):
            rows.append(i)
            cols.append(j)
    rows, cols = np.array(rows), np.array(cols)
    scale = np.where(rows == cols, 1.0, np.sqrt(2.0))
    return rows, cols, scale


def _gap_ok(p: float, d: float, rtol: float = GAP_RTOL) -> bool:
    return abs(p - d) <= rtol * max(1.0, abs(p), abs(d))


def solve_clarabel(problem: SdpProblem, verbose: bool = False, tol: float = 1e-8) -> ConicSolution:
    import clarabel

    k = problem.num_vars
    a_parts, b_parts, cones = [], [], []
    bounded = np.flatnonzero(np.isfinite(problem.lower))
    if bounded.size:
        a_parts.append(sp.csc_matrix((-np.ones(bounded.size), (np.arange(bounded.size), bounded)), shape=(bounded.size, k)))
        b_parts.append(-problem.lower[bounded])
        cones.append(clarabel.NonnegativeConeT(bounded.size))
    for blk in problem.blocks:
        r, c, s = _svec_index(blk.size)
        a_parts.append(sp.csc_matrix((blk.coeffs[:, r, c] * s).T))
        b_parts.append(-blk.const[r, c] * s)
        cones.append(clarabel.PSDTriangleConeT(blk.size))
    a_mat = sp.vstack(a_parts, format="csc")
    b_vec = np.concatenate(b_parts)

    settings = clarabel.DefaultSettings()
    settings.verbose = verbose
    settings.tol_gap_rel = tol
    settings.tol_gap_abs = 0.1 * tol
    settings.tol_feas = tol
    settings.max_iter = 200
    t0 = time.perf_counter()
    solver = clarabel.DefaultSolver(sp.csc_matrix((k, k)), problem.c.astype(float), a_mat, b_vec, cones, settings)
    sol = solver.solve()
    elapsed = time.perf_counter() - t0

    raw = str(sol.status)
    x = np.array(sol.x)
    p, d = float(sol.obj_val), float(getattr(sol, "obj_val_dual", sol.obj_val))
    # AlmostSolved shows up when the optimum is only approached in the limit
    # (marginally stable modes); accept it when gap and certificate both check out
    if raw in ("Solved", "AlmostSolved") and _gap_ok(p, d, max(tol, GAP_RTOL)) and problem.max_residual(x) <= RESIDUAL_TOL:
        status = OPTIMAL
    elif raw in ("PrimalInfeasible", "AlmostPrimalInfeasible"):
        status = INFEASIBLE
    else:
        status = NUMERICAL_FAILURE
    return ConicSolution(x, status, p, d, int(sol.iterations), elapsed, "clarabel", raw)


def solve_cvxopt(problem: SdpProblem, verbose: bool = False, tol: float = 1e-8) -> ConicSolution:
    from cvxopt import matrix, solvers

    k = problem.num_vars
    bounded = np.flatnonzero(np.isfinite(problem.lower))
    gl = np.zeros((bounded.size, k))
    gl[np.arange(bounded.size), bounded] = -1.0
    hl = -problem.lower[bounded]
    gs = [matrix(blk.coeffs.reshape(k, -1).T.copy()) for blk in problem.blocks]
    hs = [matrix(-blk.const) for blk in problem.blocks]
    opts = {
        "show_progress": verbose,
        "abstol": 0.01 * tol,
        "reltol": 0.1 * tol,
        "feastol": 0.1 * tol,
        "maxiters": 200,
    }
    t0 = time.perf_counter()
    try:
        sol = solvers.sdp(matrix(problem.c.astype(float)), Gl=matrix(gl), hl=matrix(hl), Gs=gs, hs=hs, options=opts)
    except (ArithmeticError, ValueError) as exc:
        elapsed = time.perf_counter() - t0
        return ConicSolution(None, NUMERICAL_FAILURE, np.nan, np.nan, 0, elapsed, "cvxopt", repr(exc))
    elapsed = time.perf_counter() - t0
    raw = sol["status"]
    x = None if sol["x"] is None else np.array(sol["x"]).ravel()
    p = float(sol["primal objective"]) if sol["primal objective"] is not None else np.nan
    d = float(sol["dual objective"]) if sol["dual objective"] is not None else np.nan
    if raw == "optimal" and _gap_ok(p, d, max(tol, GAP_RTOL)) and problem.max_residual(x) <= RESIDUAL_TOL:
        status = OPTIMAL
    elif raw == "primal infeasible":
        status = INFEASIBLE
    else:
        status = NUMERICAL_FAILURE
    return ConicSolution(x, status, p, d, int(sol["iterations"]), elapsed, "cvxopt", raw)


BACKENDS = {"clarabel": solve_clarabel, "cvxopt": solve_cvxopt}


def solve(problem: SdpProblem, backend: str = "clarabel", verbose: bool = False, tol: float = 1e-8) -> ConicSolution:
    try:
        fn = BACKENDS[backend]
    except KeyError:
        raise ValueError(f"unknown SDP backend {backend!r}; choose from {sorted(BACKENDS)}") from None
    return fn(problem, verbose=verbose, tol=tol)
