"""Dense convex QP solver: over-relaxed ADMM with an active-set polish pass.

minimize   1/2 x'Qx + c'x
subject to Ax = b,  Gx <= h,  lb <= x <= ub

The hot iteration loop lives in a compiled kernel (``palmplan._admm``) with a
numpy fallback; set PALMPLAN_PURE_PYTHON=1 to force the fallback.  Solves are
deterministic: identical inputs give identical outputs.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field

import numpy as np

from . import _admm_py

if os.environ.get("PALMPLAN_PURE_PYTHON"):
    _kernel = _admm_py
else:
    try:
        from . import _admm as _kernel  # type: ignore[no-redef]
    except ImportError:
        _kernel = _admm_py

KERNEL_NAME = "compiled" if _kernel is not _admm_py else "python"

_SIGMA = 1e-6
_RHO = 0.1
_RHO_EQ_SCALE = 1e3
_ALPHA = 1.6
_CHECK_EVERY = 25
_EPS_INF = 1e-6


class QpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    MAX_ITERATIONS = "max_iterations"


@dataclass
class QpProblem:
    """Dense QP data; Q is symmetrized on construction, dimensions checked."""

    q_mat: np.ndarray
    c: np.ndarray
    a_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    g_ineq: np.ndarray | None = None
    h_ineq: np.ndarray | None = None
    lb: np.ndarray | None = None
    ub: np.ndarray | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        q = np.asarray(self.q_mat, dtype=float).reshape(n, n)
        self.q_mat = 0.5 * (q + q.T)
        if (self.a_eq is None) != (self.b_eq is None):
            raise ValueError("a_eq and b_eq must be given together")
        if (self.g_ineq is None) != (self.h_ineq is None):
            raise ValueError("g_ineq and h_ineq must be given together")
        if self.a_eq is not None:
            self.a_eq = np.asarray(self.a_eq, dtype=float).reshape(-1, n)
            self.b_eq = np.asarray(self.b_eq, dtype=float).ravel()
            if self.a_eq.shape[0] != self.b_eq.size:
                raise ValueError("equality dimensions inconsistent")
        if self.g_ineq is not None:
            self.g_ineq = np.asarray(self.g_ineq, dtype=float).reshape(-1, n)
            self.h_ineq = np.asarray(self.h_ineq, dtype=float).ravel()
            if self.g_ineq.shape[0] != self.h_ineq.size:
                raise ValueError("inequality dimensions inconsistent")
        for name in ("lb", "ub"):
            v = getattr(self, name)
            if v is not None:
                setattr(self, name, np.asarray(v, dtype=float).ravel())
                if getattr(self, name).size != n:
                    raise ValueError(f"{name} has wrong length")

    @property
    def num_vars(self) -> int:
        return self.c.size

    def objective(self, x: np.ndarray) -> float:
        return float(0.5 * x @ self.q_mat @ x + self.c @ x)


@dataclass
class QpSolution:
    x: np.ndarray
    status: QpStatus
    objective: float
    primal_residual: float
    dual_residual: float
    complementarity: float = 0.0
    iterations: int = 0
    regularization: float = 0.0
    duals: np.ndarray = field(default_factory=lambda: np.zeros(0))


def _canonical(problem: QpProblem):
    """Stack all constraints into l <= Ax <= u rows."""
    n = problem.num_vars
    rows, lo, hi = [], [], []
    if problem.a_eq is not None and problem.a_eq.shape[0]:
        rows.append(problem.a_eq)
        lo.append(problem.b_eq)
        hi.append(problem.b_eq)
    if problem.g_ineq is not None and problem.g_ineq.shape[0]:
        rows.append(problem.g_ineq)
        lo.append(np.full(problem.g_ineq.shape[0], -np.inf))
        hi.append(problem.h_ineq)
    if problem.lb is not None or problem.ub is not None:
        lb = problem.lb if problem.lb is not None else np.full(n, -np.inf)
        ub = problem.ub if problem.ub is not None else np.full(n, np.inf)
        keep = np.isfinite(lb) | np.isfinite(ub)
        if np.any(keep):
            eye = np.eye(n)[keep]
            rows.append(eye)
            lo.append(lb[keep])
            hi.append(ub[keep])
    if rows:
        a = np.ascontiguousarray(np.vstack(rows))
        l = np.concatenate(lo)
        u = np.concatenate(hi)
    else:
        a = np.zeros((0, n))
        l = np.zeros(0)
        u = np.zeros(0)
    return a, l, u


def _polish(q_mat, c, a, l, u, x, z, y, tol):
    """Solve the KKT system on the active set read off the projected iterate."""
    act_lo = np.isfinite(l) & (z <= l + 1e-12)
    act_hi = np.isfinite(u) & (z >= u - 1e-12)
    eq = np.isfinite(l) & np.isfinite(u) & (u - l < 1e-14)
    act_lo |= eq
    active = act_lo | act_hi
    idx = np.flatnonzero(active)
    a_act = a[idx]
    b_act = np.where(act_lo[idx], l[idx], u[idx])
    n = c.size
    m = idx.size
    delta = 1e-9
    kkt = np.zeros((n + m, n + m))
    kkt[:n, :n] = q_mat + delta * np.eye(n)
    kkt[:n, n:] = a_act.T
    kkt[n:, :n] = a_act
    kkt[n:, n:] = -delta * np.eye(m)
    rhs = np.concatenate([-c, b_act])
    try:
        sol = np.linalg.solve(kkt, rhs)
        # one step of iterative refinement against the unregularized system
        kkt0 = kkt.copy()
        kkt0[:n, :n] -= delta * np.eye(n)
        kkt0[n:, n:] += delta * np.eye(m)
        sol = sol + np.linalg.solve(kkt, rhs - kkt0 @ sol)
    except np.linalg.LinAlgError:
        return None
    x_pol = sol[:n]
    y_pol = np.zeros_like(y)
    y_pol[idx] = sol[n:]
    ax = a @ x_pol
    if np.any(ax < l - tol) or np.any(ax > u + tol):
        return None
    if np.any(y_pol[idx] * np.where(act_lo[idx] & ~eq[idx], 1.0, -1.0) > tol):
        return None
    return x_pol, y_pol


def _residuals(q_mat, c, a, l, u, x, y):
    ax = a @ x
    r_prim = 0.0
    if ax.size:
        r_prim = float(np.max(np.maximum(ax - u, 0.0), initial=0.0))
        r_prim = max(r_prim, float(np.max(np.maximum(l - ax, 0.0), initial=0.0)))
    r_dual = float(np.max(np.abs(q_mat @ x + c + a.T @ y), initial=0.0))
    comp = 0.0
    for i in range(ax.size):
        if y[i] > 0 and np.isfinite(u[i]):
            comp = max(comp, y[i] * abs(u[i] - ax[i]))
        elif y[i] < 0 and np.isfinite(l[i]):
            comp = max(comp, -y[i] * abs(ax[i] - l[i]))
    return r_prim, r_dual, comp


def solve(problem: QpProblem, tol: float = 1e-8, max_iter: int = 100_000) -> QpSolution:
    """Solve the QP; see module docstring for the algorithm."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = problem.num_vars
    a, l, u = _canonical(problem)
    m = a.shape[0]
    regularization = 0.0
    q_mat = problem.q_mat

    for attempt in range(2):
        rho = np.full(m, _RHO)
        rho[np.isfinite(l) & np.isfinite(u) & (u - l < 1e-14)] = _RHO * _RHO_EQ_SCALE
        kinv = np.linalg.inv(
            q_mat + _SIGMA * np.eye(n) + a.T @ (rho[:, None] * a)
        )
        x0 = np.zeros(n)
        z0 = np.zeros(m)
        y0 = np.zeros(m)
        eps_admm = max(tol, 1e-7)
        x, z, y, status, iters, r_p, r_d = _kernel.run(
            np.ascontiguousarray(kinv), np.ascontiguousarray(q_mat),
            problem.c, a, l, u, rho, _SIGMA, _ALPHA, x0, z0, y0,
            int(max_iter), _CHECK_EVERY, eps_admm, eps_admm, _EPS_INF,
        )
        if status == _admm_py.STATUS_PRIMAL_INFEASIBLE:
            return QpSolution(
                x=x, status=QpStatus.INFEASIBLE, objective=np.nan,
                primal_residual=r_p, dual_residual=r_d, iterations=iters,
                regularization=regularization, duals=y,
            )
        if status == _admm_py.STATUS_SOLVED:
            polished = _polish(q_mat, problem.c, a, l, u, x, z, y, tol)
            if polished is not None:
                xp, yp = polished
                rp, rd, comp = _residuals(q_mat, problem.c, a, l, u, xp, yp)
                if rp <= tol and rd <= tol and comp <= tol:
                    return QpSolution(
                        x=xp, status=QpStatus.OPTIMAL,
                        objective=problem.objective(xp),
                        primal_residual=rp, dual_residual=rd,
                        complementarity=comp, iterations=iters,
                        regularization=regularization, duals=yp,
                    )
            # polish failed: push the ADMM itself to the target tolerance
            x, z, y, status, more, r_p, r_d = _kernel.run(
                np.ascontiguousarray(kinv), np.ascontiguousarray(q_mat),
                problem.c, a, l, u, rho, _SIGMA, _ALPHA, x, z, y,
                int(max_iter), _CHECK_EVERY, tol, 0.0, _EPS_INF,
            )
            iters += more
            rp, rd, comp = _residuals(q_mat, problem.c, a, l, u, x, y)
            if status == _admm_py.STATUS_SOLVED and max(rp, rd, comp) <= tol:
                return QpSolution(
                    x=x, status=QpStatus.OPTIMAL, objective=problem.objective(x),
                    primal_residual=rp, dual_residual=rd, complementarity=comp,
                    iterations=iters, regularization=regularization, duals=y,
                )
        # non-convergence: retry once with a ridge on a degenerate Q
        if attempt == 0 and np.linalg.matrix_rank(q_mat) < n:
            regularization = 1e-10
            q_mat = q_mat + regularization * np.eye(n)
            continue
        break

    rp, rd, comp = _residuals(q_mat, problem.c, a, l, u, x, y)
    return QpSolution(
        x=x, status=QpStatus.MAX_ITERATIONS, objective=problem.objective(x),
        primal_residual=rp, dual_residual=rd, complementarity=comp,
        iterations=iters, regularization=regularization, duals=y,
    )
