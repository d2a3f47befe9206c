"""Dense two-phase tableau simplex.

Pivoting uses Bland's smallest-index rule by default, which rules out cycling
and keeps the pivot sequence a pure function of the input. A largest
reduced-cost rule is available for larger instances; it falls back to Bland's
rule after a run of degenerate pivots, so it terminates too.
"""

from __future__ import annotations

import numpy as np

from privopt.errors import SolverFailure
from privopt.solver.problem import ConstrainedProblem, ConstraintSystem, Linear, Solution, Status

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-8
_DEGENERATE_RUN = 50


class _Tableau:
    """Rows ``0..m-1`` hold ``[B^-1 A | B^-1 b]``; row ``m`` holds the reduced
    costs and minus the objective value."""

    def __init__(self, T, basis, pivot_tol, rule):
        self.T = T
        self.basis = basis
        self.pivot_tol = pivot_tol
        self.rule = rule
        self.iterations = 0

    @property
    def m(self):
        return self.T.shape[0] - 1

    def pivot(self, r, k):
        T = self.T
        T[r] /= T[r, k]
        col = T[:, k].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        T[:, k] = 0.0
        T[r, k] = 1.0
        np.maximum(T[:-1, -1], 0.0, out=T[:-1, -1])
        self.basis[r] = k
        self.iterations += 1

    def _entering(self, candidates, tol, degenerate_run):
        d = self.T[-1, :candidates]
        improving = np.flatnonzero(d > tol)
        if improving.size == 0:
            return None
        if self.rule == "dantzig" and degenerate_run < _DEGENERATE_RUN:
            return int(improving[np.argmax(d[improving])])
        return int(improving[0])

    def _leaving(self, k):
        col = self.T[:-1, k]
        rows = np.flatnonzero(col > self.pivot_tol)
        if rows.size == 0:
            return None
        ratios = self.T[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
        # Bland: among tied rows leave the basic variable of smallest index
        return int(min(ties, key=lambda r: self.basis[r]))

    def run(self, n_candidates, cost_tol, max_iter):
        """Iterate to optimality. Returns ``"optimal"`` or ``"unbounded"``."""
        degenerate_run = 0
        while True:
            k = self._entering(n_candidates, cost_tol, degenerate_run)
            if k is None:
                return "optimal"
            r = self._leaving(k)
            if r is None:
                return "unbounded"
            if self.iterations >= max_iter:
                raise SolverFailure(
                    "simplex iteration limit reached",
                    {"iterations": self.iterations, "objective": -float(self.T[-1, -1])},
                )
            degenerate_run = degenerate_run + 1 if self.T[r, -1] <= self.pivot_tol else 0
            self.pivot(r, k)


def solve_lp(
    problem: ConstrainedProblem,
    *,
    pivot_tol: float = PIVOT_TOL,
    feas_tol: float = FEAS_TOL,
    pivot_rule: str = "bland",
    max_iter: int | None = None,
) -> Solution:
    """Solve a linear program with a :class:`Linear` objective.

    Variables outside ``problem.nonneg`` are free and are split into a
    difference of two nonnegative columns.
    """
    obj = problem.objective
    if not isinstance(obj, Linear):
        raise TypeError("solve_lp needs a linear objective")
    if pivot_rule not in ("bland", "dantzig"):
        raise ValueError(f"unknown pivot rule {pivot_rule!r}")
    A, b = problem.A, problem.b
    m, n = A.shape
    c = obj.c if obj.sense == "max" else -obj.c
    free = np.flatnonzero(~problem.nonneg)
    Ay = np.hstack([A, -A[:, free]])
    cy = np.concatenate([c, -c[free]])
    ny = Ay.shape[1]

    neg = b < 0
    sign = np.where(neg, -1.0, 1.0)
    art_rows = np.flatnonzero(neg)
    k_art = art_rows.size
    n_cols = ny + m + k_art

    T = np.zeros((m + 1, n_cols + 1))
    T[:m, :ny] = sign[:, None] * Ay
    T[:m, ny:ny + m] = np.diag(sign)
    T[art_rows, ny + m + np.arange(k_art)] = 1.0
    T[:m, -1] = sign * b
    basis = [ny + i for i in range(m)]
    for j, r in enumerate(art_rows):
        basis[r] = ny + m + j

    scale_b = max(1.0, float(np.abs(b).max(initial=0.0)))
    scale_c = max(1.0, float(np.abs(c).max(initial=0.0)))
    if max_iter is None:
        max_iter = 50 * (m + n_cols) + 1000
    tab = _Tableau(T, basis, pivot_tol, pivot_rule)

    if k_art:
        # phase 1: maximize -sum(artificials)
        T[-1, :] = T[art_rows].sum(axis=0)
        T[-1, ny + m:n_cols] = 0.0
        tab.run(ny + m, pivot_tol, max_iter)
        if T[-1, -1] > feas_tol * scale_b:
            return Solution(Status.INFEASIBLE, iterations=tab.iterations)
        keep = []
        for r in range(m):
            if tab.basis[r] < ny + m:
                keep.append(r)
                continue
            cand = np.flatnonzero(np.abs(T[r, :ny + m]) > pivot_tol)
            if cand.size:
                tab.pivot(r, int(cand[0]))
                keep.append(r)
            # otherwise the row is redundant and is dropped
        keep_idx = np.array(keep + [m], dtype=int)
        T = np.hstack([T[keep_idx, :ny + m], T[keep_idx, -1:]])
        done = tab.iterations
        tab = _Tableau(T, [tab.basis[r] for r in keep], pivot_tol, pivot_rule)
        tab.iterations = done
    m_eff = tab.m

    cost = np.concatenate([cy, np.zeros(m)])
    basis_arr = np.asarray(tab.basis, dtype=int)
    T = tab.T
    cb = cost[basis_arr]
    T[-1, :-1] = cost - cb @ T[:m_eff, :-1]
    T[-1, -1] = -(cb @ T[:m_eff, -1])
    T[-1, basis_arr] = 0.0
    outcome = tab.run(ny + m, 1e-9 * scale_c, max_iter)
    if outcome == "unbounded":
        return Solution(Status.UNBOUNDED, iterations=tab.iterations)

    y = np.zeros(ny + m)
    y[np.asarray(tab.basis, dtype=int)] = T[:m_eff, -1]
    x = y[:n].copy()
    x[free] -= y[n:ny]
    return Solution(Status.OPTIMAL, x, obj.value(x), tab.iterations)


def find_feasible_point(A, b, nonneg=None, **kw) -> np.ndarray | None:
    """A point of ``{x : Ax <= b}`` (and ``x >= 0`` where masked), or None."""
    system = ConstraintSystem(A, b)
    p = ConstrainedProblem(Linear(np.zeros(system.n)), system, nonneg)
    sol = solve_lp(p, **kw)
    return sol.x if sol.optimal else None
