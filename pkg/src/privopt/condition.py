"""Condition numbers of linear inequality systems and the utility bounds.

``alpha_{p,q}(A)`` is the supremum of ``||u||_{p*}`` over ``u >= 0`` with
``||A^T u||_{q*} = 1`` whose support picks linearly independent rows of
``A``. The bounds take the aggregate ``inf_p alpha_{p,q}(A) * m**(1/p)``; we evaluate
that infimum over ``p in {1, 2, inf}`` only.
"""

from __future__ import annotations

import enum
import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from privopt.errors import DimensionTooLarge, NotStronglyStable, SingularMatrix, SolverFailure
from privopt.solver import ConstrainedProblem, ConstraintSystem, Linear, Status, solve_lp
from privopt.trunclap import PrivacyParams, log_growth, shift_width

INF = math.inf


class Method(enum.Enum):
    DIAGONAL = "diag"
    SIGMA_MIN = "sigma-min"
    STRONG_STABLE = "strong-stable"
    BRUTE_FORCE = "bruteforce"


@dataclass(frozen=True)
class CondSpec:
    p: float
    q: float
    method: Method

    def __post_init__(self):
        for v in (self.p, self.q):
            if v not in (1, 2, INF):
                raise ValueError(f"norm index must be 1, 2 or inf, got {v}")


@dataclass(frozen=True)
class BoundReport:
    upper: float
    lower: float | None
    alpha_used: float
    p_chosen: float


class AlphaBarInfeasible(SolverFailure):
    """The LP defining the strongly-stable constant has no feasible point."""


def dual_index(p: float) -> float:
    return {1: INF, 2: 2, INF: 1}[p]


def alpha_aggregate(alpha: float, m: int, p: float) -> float:
    """``alpha * m**(1/p)``."""
    return alpha if p == INF else alpha * m ** (1.0 / p)


def cond_diag(a) -> float:
    """``alpha_{inf,1}`` of ``diag(a)``, which equals ``sum(1/a_i)``."""
    a = np.asarray(a, dtype=float).ravel()
    if a.size == 0 or np.any(a <= 0):
        raise ValueError("diagonal entries must be positive")
    return float(np.sum(1.0 / a))


def cond_sigma_min(A) -> float:
    """``1 / sigma_min(A)``, an upper bound on ``alpha_{2,2}`` for nonsingular square A."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"A must be square, got {A.shape}")
    smin = float(np.linalg.svd(A, compute_uv=False).min())
    if smin <= 1e-12:
        raise SingularMatrix(f"sigma_min = {smin:.3g}")
    return 1.0 / smin


def is_strongly_stable(A, tol: float = 1e-9) -> bool:
    """Whether ``Ax < 0`` is solvable: ``min t`` s.t. ``Ax <= t 1``, ``|x|_inf <= 1``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    m, n = A.shape
    rows = np.block([
        [A, -np.ones((m, 1))],
        [np.eye(n), np.zeros((n, 1))],
        [-np.eye(n), np.zeros((n, 1))],
    ])
    rhs = np.concatenate([np.zeros(m), np.ones(2 * n)])
    c = np.zeros(n + 1)
    c[-1] = 1.0
    sol = solve_lp(ConstrainedProblem(Linear(c, "min"), ConstraintSystem(rows, rhs)))
    return sol.optimal and sol.objective < -tol


def cond_strong_stable(A) -> float:
    """Optimal value of ``max 1.u`` s.t. ``1 - z <= u^T A <= z``, ``u >= 0``, ``1.z = 1``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    m, n = A.shape
    if not is_strongly_stable(A):
        raise NotStronglyStable("Ax < 0 has no solution")
    # variables (u, z): u >= 0, z free
    At = A.T
    I = np.eye(n)
    rows = np.vstack([
        np.hstack([At, -I]),
        np.hstack([-At, -I]),
        np.concatenate([np.zeros(m), np.ones(n)])[None, :],
        np.concatenate([np.zeros(m), -np.ones(n)])[None, :],
    ])
    rhs = np.concatenate([np.zeros(n), -np.ones(n), [1.0, -1.0]])
    c = np.concatenate([np.ones(m), np.zeros(n)])
    nonneg = np.concatenate([np.ones(m, bool), np.zeros(n, bool)])
    sol = solve_lp(ConstrainedProblem(Linear(c, "max"), ConstraintSystem(rows, rhs), nonneg))
    if sol.status is Status.INFEASIBLE:
        raise AlphaBarInfeasible("the defining LP is infeasible for this matrix", {"shape": A.shape})
    if sol.status is Status.UNBOUNDED:
        raise SolverFailure("the defining LP is unbounded")
    return sol.objective


@functools.lru_cache(maxsize=None)
def _simplex_grid(k: int, r: int) -> np.ndarray:
    """All points of the (k-1)-simplex with coordinates in multiples of 1/r."""
    if k == 1:
        return np.ones((1, 1))
    # stars and bars: k-1 bar positions among r+k-1 slots
    bars = np.array(list(itertools.combinations(range(r + k - 1), k - 1)), dtype=np.int64)
    padded = np.hstack([np.full((bars.shape[0], 1), -1), bars, np.full((bars.shape[0], 1), r + k - 1)])
    grid = np.diff(padded, axis=1) - 1
    grid = grid.astype(float) / r
    grid.setflags(write=False)
    return grid


# grid resolution per support size; keeps each grid near 1e4..1e5 points
_GRID = {1: 1, 2: 10000, 3: 300, 4: 80, 5: 36}


def cond_bruteforce(A, p: float, q: float, *, max_rows: int = 5, polish: int = 3) -> float:
    """Grid-and-polish evaluation of ``alpha_{p,q}(A)`` (test oracle).

    For every linearly independent row support the homogeneous ratio
    ``||u||_{p*} / ||A_J^T u||_{q*}`` is maximized over the simplex by a grid
    followed by Nelder-Mead from the best grid points. Supports whose grid
    maximum falls more than 5% short of the running best are not polished.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    m = A.shape[0]
    if m > max_rows:
        raise DimensionTooLarge(f"brute force limited to {max_rows} rows, got {m}")
    ps, qs = dual_index(p), dual_index(q)
    best = 0.0
    for k in range(1, m + 1):
        for J in itertools.combinations(range(m), k):
            AJ = A[list(J)]
            if np.linalg.matrix_rank(AJ, tol=1e-10) < k:
                continue
            grid = _simplex_grid(k, _GRID.get(k, 20))
            num = np.linalg.norm(grid, ord=ps, axis=1)
            den = np.linalg.norm(grid @ AJ, ord=qs, axis=1)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(den > 0, num / den, 0.0)
            if np.any((den <= 1e-300) & (num > 0)):
                raise SolverFailure("A^T u vanishes on an independent support")
            top = float(ratio.max())
            # polish only supports whose grid maximum is competitive
            polish_this = k > 1 and top >= 0.95 * best
            best = max(best, top)
            if not polish_this:
                continue

            def neg_ratio(v, AJ=AJ):
                w = np.abs(v)
                s = w.sum()
                if s == 0:
                    return 0.0
                w = w / s
                d = np.linalg.norm(w @ AJ, ord=qs)
                return -np.linalg.norm(w, ord=ps) / d if d > 0 else 0.0

            for i in np.argsort(ratio)[::-1][:polish]:
                res = minimize(neg_ratio, grid[i], method="Nelder-Mead",
                               options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
                best = max(best, -float(res.fun))
    return best


def condition_number(A, spec: CondSpec) -> float:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if spec.method is Method.DIAGONAL:
        off = A - np.diag(np.diag(A))
        if A.shape[0] != A.shape[1] or np.any(off != 0):
            raise ValueError("diagonal method needs a diagonal matrix")
        return cond_diag(np.diag(A))
    if spec.method is Method.SIGMA_MIN:
        if not (spec.p == 2 and spec.q == 2):
            raise ValueError("sigma-min bound applies to p = q = 2")
        return cond_sigma_min(A)
    if spec.method is Method.STRONG_STABLE:
        return cond_strong_stable(A)
    return cond_bruteforce(A, spec.p, spec.q)


def upper_bound(L: float, delta_sens: float, privacy: PrivacyParams, m: int, alpha: float) -> float:
    """Worst-case objective loss ``2 L Delta/eps * alpha * ln(m (e^eps - 1)/delta + 1)``.

    ``alpha`` is the aggregate ``alpha_{p,q}(A) * m**(1/p)``.
    """
    if L <= 0 or alpha <= 0:
        raise ValueError("L and alpha must be positive")
    return 2.0 * L * alpha * shift_width(delta_sens, privacy, m)


def lower_bound(delta_sens: float, privacy: PrivacyParams, a) -> float:
    """Loss any always-feasible DP mechanism must incur on ``diag(a)``, ``g = <1, x>``."""
    if delta_sens <= 0:
        raise ValueError("sensitivity must be positive")
    if privacy.delta > 0.5:
        raise ValueError(f"lower bound needs delta <= 1/2, got {privacy.delta}")
    eps = privacy.epsilon
    t = log_growth(eps, 0.5 / privacy.delta) / eps
    return delta_sens / 4.0 * cond_diag(a) * t


def bound_report(A, L: float, q: float, delta_sens: float, privacy: PrivacyParams) -> BoundReport:
    """Best available upper bound over the applicable methods, plus the lower
    bound when ``A`` is a positive diagonal and ``q = 1``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    m = A.shape[0]
    candidates = []  # (aggregate, alpha, p)
    square = A.shape[0] == A.shape[1]
    diag = square and not np.any(A - np.diag(np.diag(A))) and np.all(np.diag(A) > 0)
    if diag and q == 1:
        a = cond_diag(np.diag(A))
        candidates.append((a, a, INF))
    if square and q == 2:
        try:
            a = cond_sigma_min(A)
            candidates.append((alpha_aggregate(a, m, 2), a, 2))
        except SingularMatrix:
            pass
    if m <= 5:
        for p in (1, 2, INF):
            a = cond_bruteforce(A, p, q)
            candidates.append((alpha_aggregate(a, m, p), a, p))
    if not candidates:
        raise ValueError("no condition-number method applies to this matrix")
    agg, alpha, p = min(candidates, key=lambda t: t[0])
    upper = upper_bound(L, delta_sens, privacy, m, agg)
    lower = lower_bound(delta_sens, privacy, np.diag(A)) if diag and q == 1 and privacy.delta <= 0.5 else None
    return BoundReport(upper, lower, alpha, p)
