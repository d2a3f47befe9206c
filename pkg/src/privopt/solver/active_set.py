"""Primal active-set method for convex quadratic programs.

Minimizes ``x^T Q x + c^T x`` subject to ``A x <= b`` and the problem's sign
restrictions. A feasible start comes from simplex phase one. Each iteration
solves the equality-constrained subproblem on the working set in the null
space of the working rows; PSD (not only PD) Hessians are handled by taking
zero-curvature descent directions to the next blocking constraint.
"""

from __future__ import annotations

import numpy as np

from privopt.errors import SolverFailure
from privopt.solver.problem import ConstrainedProblem, Quadratic, Solution, Status
from privopt.solver.simplex import find_feasible_point


def _null_space(AW: np.ndarray, n: int) -> np.ndarray:
    if AW.shape[0] == 0:
        return np.eye(n)
    _, _, vt = np.linalg.svd(AW)
    return vt[AW.shape[0]:].T


def _independent_subset(A, rows):
    picked = []
    for i in rows:
        trial = picked + [i]
        if np.linalg.matrix_rank(A[trial], tol=1e-10) == len(trial):
            picked = trial
    return picked


def solve_qp(
    problem: ConstrainedProblem,
    *,
    tol: float = 1e-10,
    max_iter: int | None = None,
    x0: np.ndarray | None = None,
) -> Solution:
    obj = problem.objective
    if not isinstance(obj, Quadratic):
        raise TypeError("solve_qp needs a quadratic objective")
    A, b = problem.full_system()
    n = problem.n
    H = 2.0 * obj.Q
    c = obj.c
    if x0 is None:
        x0 = find_feasible_point(problem.A, problem.b, problem.nonneg)
        if x0 is None:
            return Solution(Status.INFEASIBLE)
    x = np.array(x0, dtype=float)
    scale_b = max(1.0, float(np.abs(b).max(initial=0.0)))
    active = np.flatnonzero(np.abs(A @ x - b) <= 1e-9 * scale_b)
    W = _independent_subset(A, active)
    if max_iter is None:
        max_iter = 20 * (A.shape[0] + n) + 200

    for it in range(1, max_iter + 1):
        g = H @ x + c
        AW = A[W]
        Z = _null_space(AW, n)
        zero_curvature = False
        if Z.shape[1] == 0:
            p = np.zeros(n)
        else:
            w, V = np.linalg.eigh(Z.T @ H @ Z)
            gr = Z.T @ g
            pos = w > 1e-10 * max(1.0, float(np.abs(w).max(initial=0.0)))
            Vn = V[:, ~pos]
            flat = Vn @ (Vn.T @ gr)
            if np.linalg.norm(flat) > 1e-12 * max(1.0, np.linalg.norm(g)):
                p = -Z @ flat
                zero_curvature = True
            else:
                Vp = V[:, pos]
                p = -Z @ (Vp @ ((Vp.T @ gr) / w[pos]))

        if not zero_curvature and np.linalg.norm(p) <= 1e-12 * (1.0 + np.linalg.norm(x)):
            lam = np.zeros(A.shape[0])
            if W:
                lw = np.linalg.lstsq(AW.T, -g, rcond=None)[0]
                lam[W] = lw
                worst = int(np.argmin(lw))
                if lw[worst] < -tol * max(1.0, np.linalg.norm(g)):
                    W.pop(worst)
                    continue
            return Solution(Status.OPTIMAL, x, obj.value(x), it, np.maximum(lam, 0.0))

        Ap = A @ p
        slack = b - A @ x
        alpha_max = np.inf if zero_curvature else 1.0
        in_w = np.zeros(A.shape[0], dtype=bool)
        in_w[W] = True
        blocking = np.flatnonzero(~in_w & (Ap > 1e-14 * max(1.0, np.linalg.norm(p))))
        alpha, hit = alpha_max, None
        if blocking.size:
            steps = np.maximum(slack[blocking], 0.0) / Ap[blocking]
            best = steps.min()
            if best < alpha_max:
                alpha = best
                hit = int(blocking[np.flatnonzero(steps <= best * (1 + 1e-12) + 1e-300)[0]])
        if not np.isfinite(alpha):
            return Solution(Status.UNBOUNDED, iterations=it)
        x = x + alpha * p
        if hit is not None:
            W.append(hit)

    raise SolverFailure(
        "active-set iteration limit reached",
        {"iterations": max_iter, "working_set": list(W), "objective": obj.value(x)},
    )


def kkt_residuals(problem: ConstrainedProblem, x, multipliers) -> dict:
    """Residuals of the optimality conditions at ``(x, multipliers)``.

    ``multipliers`` index the rows of ``problem.full_system()``.
    """
    A, b = problem.full_system()
    x = np.asarray(x, dtype=float)
    lam = np.asarray(multipliers, dtype=float)
    grad = problem.objective.gradient(x) if isinstance(problem.objective, Quadratic) else -problem.objective.c
    r = A @ x - b
    return {
        "stationarity": float(np.abs(grad + A.T @ lam).max(initial=0.0)),
        "primal": float(np.maximum(r, 0.0).max(initial=0.0)),
        "dual": float(np.maximum(-lam, 0.0).max(initial=0.0)),
        "complementarity": float(np.abs(lam * r).max(initial=0.0)),
    }
