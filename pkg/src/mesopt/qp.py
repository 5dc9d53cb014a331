"""Convex quadratic programming by operator splitting.

Solves
    min 1/2 x'Qx + c'x + const
    s.t. A_eq x = b_eq,  A_in x <= b_in,  lb <= x <= ub

with a PSD Q, reporting primal/dual solutions, KKT residuals and primal
infeasibility certificates.  The three constraint groups are stacked into
the two-sided form l <= Ax <= u; equalities get a stiffer penalty weight.
Deterministic: identical inputs and options give identical output.
"""
from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

INF = np.inf

_RHO_EQ_FACTOR = 1e3
_RHO_MIN, _RHO_MAX = 1e-6, 1e6


@dataclass(frozen=True)
class QpProblem:
    """Problem data; matrices are converted to CSC on construction."""

    q: sp.csc_matrix
    c: np.ndarray
    a_eq: sp.csc_matrix
    b_eq: np.ndarray
    a_in: sp.csc_matrix
    b_in: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    constant: float = 0.0

    def __post_init__(self):
        n = len(self.c)
        object.__setattr__(self, "q", sp.csc_matrix(self.q))
        object.__setattr__(self, "a_eq", sp.csc_matrix(self.a_eq))
        object.__setattr__(self, "a_in", sp.csc_matrix(self.a_in))
        for name in ("c", "b_eq", "b_in", "lb", "ub"):
            object.__setattr__(self, name,
                               np.asarray(getattr(self, name), dtype=float))
        if self.q.shape != (n, n):
            raise ValueError(f"Q must be {n}x{n}, got {self.q.shape}")
        if self.a_eq.shape[1] != n or self.a_in.shape[1] != n:
            raise ValueError("constraint matrices must have one column per variable")
        if len(self.b_eq) != self.a_eq.shape[0] or len(self.b_in) != self.a_in.shape[0]:
            raise ValueError("constraint right-hand sides do not match row counts")
        if len(self.lb) != n or len(self.ub) != n:
            raise ValueError("bounds must have one entry per variable")

    @property
    def n(self) -> int:
        return len(self.c)

    def objective(self, x: np.ndarray) -> float:
        return float(0.5 * x @ (self.q @ x) + self.c @ x + self.constant)

    def max_constraint_violation(self, x: np.ndarray) -> float:
        """Worst violation of any equality, inequality or box constraint."""
        worst = 0.0
        if self.a_eq.shape[0]:
            worst = max(worst, float(np.max(np.abs(self.a_eq @ x - self.b_eq))))
        if self.a_in.shape[0]:
            worst = max(worst, float(np.max(self.a_in @ x - self.b_in, initial=0.0)))
        worst = max(worst, float(np.max(self.lb - x, initial=0.0)))
        worst = max(worst, float(np.max(x - self.ub, initial=0.0)))
        return worst


@dataclass(frozen=True)
class QpOptions:
    eps_abs: float = 1e-6
    eps_rel: float = 1e-6
    eps_infeas: float = 1e-8
    max_iter: int = 20000
    rho: float = 0.1
    sigma: float = 1e-6
    alpha: float = 1.6
    check_interval: int = 25
    scaling_iters: int = 10
    adaptive_rho: bool = True
    polish: bool = True
    warm_x: Optional[np.ndarray] = None
    warm_y: Optional[np.ndarray] = None


@dataclass(frozen=True)
class QpSolution:
    status: str                      # optimal | infeasible | iteration_limit
    x: np.ndarray                    #          | unbounded | error
    objective: float
    duals_eq: np.ndarray
    duals_in: np.ndarray
    duals_box: np.ndarray
    iterations: int
    primal_residual: float
    dual_residual: float
    message: str = ""

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _psd_check(q: sp.csc_matrix) -> None:
    # Cheap necessary checks; diagonal blocks of our problems are diagonal,
    # dense eigenvalue work would dominate solve time.
    if (q != q.T).nnz:
        raise ValueError("Q must be symmetric")
    if q.shape[0] and q.diagonal().min() < -1e-12:
        raise ValueError("Q has a negative diagonal entry; not PSD")


def _ruiz_scaling(q, c, a, iters):
    """Modified Ruiz equilibration; returns scaled data and scaling vectors."""
    n, m = q.shape[0], a.shape[0]
    d = np.ones(n)
    e = np.ones(m)
    cost_scale = 1.0
    q = q.copy().tocsc()
    a = a.copy().tocsc()
    c = c.copy()
    for _ in range(iters):
        q_abs = abs(q)
        a_abs = abs(a)
        col_norm_q = np.asarray(q_abs.max(axis=0).todense()).ravel() if n else np.zeros(0)
        col_norm_a = np.asarray(a_abs.max(axis=0).todense()).ravel() if m else np.zeros(n)
        dd = np.sqrt(np.maximum(col_norm_q, col_norm_a))
        dd[dd < 1e-8] = 1.0
        dd = 1.0 / np.sqrt(dd)
        if m:
            row_norm_a = np.asarray(a_abs.max(axis=1).todense()).ravel()
            ee = np.sqrt(row_norm_a)
            ee[ee < 1e-8] = 1.0
            ee = 1.0 / np.sqrt(ee)
        else:
            ee = np.ones(0)
        dm = sp.diags(dd)
        em = sp.diags(ee)
        q = (dm @ q @ dm).tocsc()
        c = dd * c
        a = (em @ a @ dm).tocsc()
        d *= dd
        e *= ee
        # cost equilibration
        q_col = np.asarray(abs(q).max(axis=0).todense()).ravel() if n else np.zeros(0)
        denom = max(float(np.mean(q_col)) if n else 0.0,
                    float(np.max(np.abs(c))) if n else 0.0)
        gamma = 1.0 / denom if denom > 1e-8 else 1.0
        q = q * gamma
        c = c * gamma
        cost_scale *= gamma
    return q, c, a, d, e, cost_scale


class _Workspace:
    """Scaled ADMM state with a factored reduced KKT system."""

    def __init__(self, prob: QpProblem, opts: QpOptions):
        self.prob = prob
        self.opts = opts
        m_eq, m_in, n = prob.a_eq.shape[0], prob.a_in.shape[0], prob.n
        self.m_eq, self.m_in, self.n = m_eq, m_in, n
        a_full = sp.vstack([prob.a_eq, prob.a_in, sp.eye(n, format="csc")],
                           format="csc")
        self.l_full = np.concatenate([prob.b_eq, np.full(m_in, -INF), prob.lb])
        self.u_full = np.concatenate([prob.b_eq, prob.b_in, prob.ub])
        self.m = a_full.shape[0]
        self.is_eq = np.zeros(self.m, dtype=bool)
        self.is_eq[:m_eq] = True
        # rows whose l == u behave like equalities for the penalty weight
        with np.errstate(invalid="ignore"):
            self.is_eq |= (self.u_full - self.l_full) < 1e-12

        if opts.scaling_iters > 0:
            (self.qs, self.cs, self.as_, self.d, self.e,
             self.cost_scale) = _ruiz_scaling(prob.q, prob.c, a_full,
                                              opts.scaling_iters)
        else:
            self.qs, self.cs, self.as_ = prob.q, prob.c, a_full
            self.d = np.ones(n)
            self.e = np.ones(self.m)
            self.cost_scale = 1.0
        self.ls = self.e * self.l_full
        self.us = self.e * self.u_full
        self.a_unscaled = a_full.tocsr()
        self.rho_bar = opts.rho
        self._set_rho(opts.rho)
        self._factor()

    def _set_rho(self, rho_bar: float) -> None:
        self.rho_bar = float(np.clip(rho_bar, _RHO_MIN, _RHO_MAX))
        rho = np.full(self.m, self.rho_bar)
        rho[self.is_eq] *= _RHO_EQ_FACTOR
        self.rho = rho
        self.rho_inv = 1.0 / rho

    def _factor(self) -> None:
        kkt = sp.vstack([
            sp.hstack([self.qs + self.opts.sigma * sp.eye(self.n), self.as_.T]),
            sp.hstack([self.as_, -sp.diags(self.rho_inv)]),
        ], format="csc")
        self.solve_kkt = spla.splu(kkt).solve

    def project(self, z: np.ndarray) -> np.ndarray:
        return np.clip(z, self.ls, self.us)


def solve(prob: QpProblem, opts: QpOptions = QpOptions()) -> QpSolution:
    """Solve one QP; never raises for solvable/infeasible problems, raises
    ValueError for structurally invalid data (asymmetric or indefinite Q)."""
    _psd_check(prob.q)
    n = prob.n
    if n == 0:
        return QpSolution("optimal", np.zeros(0), prob.constant, np.zeros(0),
                          np.zeros(0), np.zeros(0), 0, 0.0, 0.0)
    ws = _Workspace(prob, opts)
    m = ws.m
    x = np.zeros(n) if opts.warm_x is None else opts.warm_x / ws.d
    y = np.zeros(m) if opts.warm_y is None else opts.warm_y * ws.cost_scale / ws.e
    z = ws.project(ws.as_ @ x)
    alpha = opts.alpha

    status = "iteration_limit"
    iters = opts.max_iter
    r_prim = r_dual = np.inf
    y_check = y.copy()
    x_check = x.copy()
    rho_updates = 0

    for it in range(1, opts.max_iter + 1):
        rhs = np.concatenate([opts.sigma * x - ws.cs, z - ws.rho_inv * y])
        sol = ws.solve_kkt(rhs)
        x_tilde, nu = sol[:n], sol[n:]
        z_tilde = z + ws.rho_inv * (nu - y)
        x = alpha * x_tilde + (1.0 - alpha) * x
        z_relaxed = alpha * z_tilde + (1.0 - alpha) * z
        z_new = ws.project(z_relaxed + ws.rho_inv * y)
        y = y + ws.rho * (z_relaxed - z_new)
        z = z_new

        if it % opts.check_interval == 0 or it == opts.max_iter:
            # termination on unscaled residuals
            x_u = ws.d * x
            y_u = ws.e * y / ws.cost_scale
            z_u = z / ws.e
            ax = ws.a_unscaled @ x_u
            qx = prob.q @ x_u
            aty = ws.a_unscaled.T @ y_u
            r_prim = float(np.max(np.abs(ax - z_u), initial=0.0))
            r_dual = float(np.max(np.abs(qx + prob.c + aty), initial=0.0))
            eps_pri = opts.eps_abs + opts.eps_rel * max(
                float(np.max(np.abs(ax), initial=0.0)),
                float(np.max(np.abs(z_u), initial=0.0)))
            eps_dua = opts.eps_abs + opts.eps_rel * max(
                float(np.max(np.abs(qx), initial=0.0)),
                float(np.max(np.abs(aty), initial=0.0)),
                float(np.max(np.abs(prob.c), initial=0.0)))
            if r_prim <= eps_pri and r_dual <= eps_dua:
                status, iters = "optimal", it
                break

            dy = y - y_check
            if _primal_infeasible(ws, dy, opts.eps_infeas):
                status, iters = "infeasible", it
                break
            dx = x - x_check
            if _dual_infeasible(ws, prob, dx, opts.eps_infeas):
                status, iters = "unbounded", it
                break
            y_check = y.copy()
            x_check = x.copy()

            if opts.adaptive_rho and rho_updates < 12 and it % (4 * opts.check_interval) == 0:
                ratio = (r_prim / max(eps_pri, 1e-12)) / max(
                    r_dual / max(eps_dua, 1e-12), 1e-12)
                scale = np.sqrt(ratio)
                if scale > 5.0 or scale < 0.2:
                    ws._set_rho(ws.rho_bar * scale)
                    ws._factor()
                    rho_updates += 1

    x_u = ws.d * x
    y_u = ws.e * y / ws.cost_scale
    if status == "optimal" and opts.polish:
        polished = _polish(prob, ws, x_u, y_u)
        if polished is not None:
            x_u, y_u, r_prim, r_dual = polished

    duals_eq = y_u[:ws.m_eq]
    duals_in = y_u[ws.m_eq:ws.m_eq + ws.m_in]
    duals_box = y_u[ws.m_eq + ws.m_in:]
    obj = prob.objective(x_u) if status in ("optimal", "iteration_limit") else np.inf
    if status == "unbounded":
        obj = -np.inf
    return QpSolution(status, x_u, obj, duals_eq, duals_in, duals_box,
                      iters, r_prim, r_dual)


def _primal_infeasible(ws: _Workspace, dy: np.ndarray, eps: float) -> bool:
    norm = float(np.max(np.abs(dy), initial=0.0))
    if norm <= eps:
        return False
    v = dy / norm
    support = 0.0
    vp = np.maximum(v, 0.0)
    vm = np.minimum(v, 0.0)
    finite_u = np.isfinite(ws.us)
    finite_l = np.isfinite(ws.ls)
    if np.any(vp[~finite_u] > eps) or np.any(vm[~finite_l] < -eps):
        return False
    support = float(ws.us[finite_u] @ vp[finite_u] + ws.ls[finite_l] @ vm[finite_l])
    if support >= -eps:
        return False
    atv = ws.as_.T @ v
    return float(np.max(np.abs(atv), initial=0.0)) <= eps


def _dual_infeasible(ws: _Workspace, prob: QpProblem, dx: np.ndarray,
                     eps: float) -> bool:
    norm = float(np.max(np.abs(dx), initial=0.0))
    if norm <= eps:
        return False
    v = dx / norm
    if ws.cs @ v >= -eps:
        return False
    if float(np.max(np.abs(ws.qs @ v), initial=0.0)) > eps:
        return False
    av = ws.as_ @ v
    finite_u = np.isfinite(ws.us)
    finite_l = np.isfinite(ws.ls)
    if np.any(av[finite_u] > eps) or np.any(av[finite_l] < -eps):
        return False
    return True


def _polish(prob: QpProblem, ws: _Workspace, x: np.ndarray, y: np.ndarray):
    """Refine the iterate by solving the KKT system of the active set.

    Activity is read from the dual signs; the refined point is accepted only
    if it improves both residuals.
    """
    act_tol = 1e-7
    lower = y < -act_tol
    upper = y > act_tol
    active = lower | upper | ws.is_eq
    rhs_rows = np.where(lower & ~ws.is_eq, ws.l_full,
                        ws.u_full)  # equalities have l == u
    a_act = ws.a_unscaled[active]
    b_act = rhs_rows[active]
    n = prob.n
    k = a_act.shape[0]
    reg = 1e-9
    kkt = sp.vstack([
        sp.hstack([prob.q + reg * sp.eye(n), a_act.T]),
        sp.hstack([a_act, -reg * sp.eye(k)]),
    ], format="csc")
    rhs = np.concatenate([-prob.c, b_act])
    try:
        lu = spla.splu(kkt)
    except RuntimeError:
        return None
    sol = lu.solve(rhs)
    # one round of iterative refinement
    resid = rhs - kkt @ sol
    sol = sol + lu.solve(resid)
    x_new = sol[:n]
    y_new = np.zeros(ws.m)
    y_new[active] = sol[n:]

    ax = ws.a_unscaled @ x_new
    r_prim = float(max(np.max(ws.l_full - ax, initial=0.0),
                       np.max(ax - ws.u_full, initial=0.0)))
    r_dual = float(np.max(np.abs(prob.q @ x_new + prob.c
                                 + ws.a_unscaled.T @ y_new), initial=0.0))
    ax0 = ws.a_unscaled @ x
    r_prim0 = float(max(np.max(ws.l_full - ax0, initial=0.0),
                        np.max(ax0 - ws.u_full, initial=0.0)))
    r_dual0 = float(np.max(np.abs(prob.q @ x + prob.c
                                  + ws.a_unscaled.T @ y), initial=0.0))
    if r_prim <= r_prim0 + 1e-12 and r_dual <= r_dual0 + 1e-12:
        return x_new, y_new, r_prim, r_dual
    return None


def _solve_packed(args) -> QpSolution:
    prob, opts = args
    try:
        return solve(prob, opts)
    except Exception as exc:  # isolate per-instance failures
        return QpSolution("error", np.zeros(prob.n), np.inf, np.zeros(0),
                          np.zeros(0), np.zeros(0), 0, np.inf, np.inf,
                          message=str(exc))


def batch_solve(probs: Sequence[QpProblem], opts: QpOptions = QpOptions(),
                parallelism: int = 1) -> list[QpSolution]:
    """Solve several QPs, order-preserving; identical to sequential solve."""
    jobs = [(p, opts) for p in probs]
    if parallelism <= 1 or len(jobs) <= 1:
        return [_solve_packed(j) for j in jobs]
    with concurrent.futures.ProcessPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(_solve_packed, jobs))
