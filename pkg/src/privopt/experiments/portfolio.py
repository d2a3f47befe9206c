"""Minimum-variance portfolio with a private total budget.

    minimize    x^T S x
    subject to  pbar . x >= r_min      (public)
                1 . x    <= b(D)       (private, sensitivity 1, floor 0)
                x >= 0

``b(D)`` is the sum of ``n`` investor contributions drawn from U(0, 1).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from privopt.errors import SolverFailure
from privopt.experiments.returns import ReturnsData
from privopt.mechanism import SensitivityModel, audit_feasibility, perturb_constraints
from privopt.rng import substream
from privopt.solver import ConstrainedProblem, ConstraintSystem, Quadratic, Status, solve_qp
from privopt.trunclap import PrivacyParams

# substream purposes
_BUDGET, _NOISE = 0, 1


def portfolio_instance(returns: ReturnsData, r_min: float, budget: float) -> tuple[ConstrainedProblem, SensitivityModel]:
    if not budget > 0:
        raise ValueError(f"budget must be positive, got {budget}")
    n = returns.n_assets
    A = np.vstack([-returns.mean, np.ones(n)])
    b = np.array([-float(r_min), float(budget)])
    problem = ConstrainedProblem(Quadratic(returns.covariance), ConstraintSystem(A, b), nonneg=True)
    sens = SensitivityModel(1.0, [-np.inf, 0.0], private=[False, True])
    return problem, sens


def draw_budget(n_investors: int, rng: np.random.Generator) -> float:
    return float(rng.random(n_investors).sum())


def unit_return_weight(returns: ReturnsData) -> float:
    """Total holding of the min-variance portfolio with return exactly 1 and no budget.

    The budget row is slack for ``r_min`` up to ``b / unit_return_weight``.
    """
    p = ConstrainedProblem(Quadratic(returns.covariance),
                           ConstraintSystem(-returns.mean[None, :], [-1.0]), nonneg=True)
    sol = solve_qp(p)
    if not sol.optimal:
        raise SolverFailure("unit-return portfolio has no solution")
    return float(sol.x.sum())


@dataclass(frozen=True)
class PortfolioSweepConfig:
    n_investors: int = 1000
    r_min: float = 2.5
    epsilon_grid: tuple[float, ...] = (0.5, 1.0, 1.5, 2.0, 2.5)
    delta_grid: tuple[float, ...] = (1e-6, 1e-5, 2.5e-4, 2e-3)
    trials: int = 50
    seed: int = 0
    redraw_budget: bool = False

    def __post_init__(self):
        if not self.epsilon_grid or not self.delta_grid:
            raise ValueError("grids must be nonempty")
        if self.trials < 1 or self.n_investors < 1:
            raise ValueError("trials and n_investors must be positive")


@dataclass(frozen=True)
class PortfolioCell:
    epsilon: float
    delta: float
    ratio_mean: float
    ratio_stderr: float
    n_trials: int
    n_infeasible: int
    all_feasible: bool
    ratios: np.ndarray = field(repr=False, compare=False)


def _mean_stderr(v):
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        return math.nan, math.nan
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
    return float(v.mean()), se


def _optimum(returns, r_min, budget):
    problem, sens = portfolio_instance(returns, r_min, budget)
    sol = solve_qp(problem)
    return problem, sens, sol


def run_cell(cfg: PortfolioSweepConfig, returns: ReturnsData, epsilon: float, delta: float) -> PortfolioCell:
    privacy = PrivacyParams(epsilon, delta)
    fixed = None
    if not cfg.redraw_budget:
        fixed = _optimum(returns, cfg.r_min, draw_budget(cfg.n_investors, substream(cfg.seed, _BUDGET)))
        if not fixed[2].optimal:
            return PortfolioCell(epsilon, delta, math.nan, math.nan, cfg.trials, cfg.trials, True, np.array([]))
    ratios, infeasible, feasible = [], 0, True
    for t in range(cfg.trials):
        if fixed is None:
            problem, sens, opt = _optimum(
                returns, cfg.r_min, draw_budget(cfg.n_investors, substream(cfg.seed, _BUDGET, t)))
        else:
            problem, sens, opt = fixed
        if not opt.optimal:
            infeasible += 1
            continue
        # the same uniforms are reused in every (eps, delta) cell
        b_bar = perturb_constraints(problem.b, sens, privacy, substream(cfg.seed, _NOISE, t))
        moved = b_bar < problem.b
        if np.all(problem.A[moved] @ opt.x <= b_bar[moved]):
            # the optimum survives in the shrunken set, so it is still optimal
            ratios.append(1.0)
            continue
        sol = solve_qp(problem.with_rhs(b_bar))
        if sol.status is not Status.OPTIMAL:
            infeasible += 1
            continue
        feasible &= audit_feasibility(problem.A, sol.x, problem.b).feasible
        ratios.append(sol.objective / opt.objective if opt.objective > 0 else 1.0)
    mean, se = _mean_stderr(ratios)
    return PortfolioCell(epsilon, delta, mean, se, cfg.trials, infeasible, feasible, np.array(ratios))


def run_portfolio_sweep(cfg: PortfolioSweepConfig, returns: ReturnsData, threads: int = 1) -> list[PortfolioCell]:
    """One cell per (epsilon, delta), in grid order (epsilon outer)."""
    grid = [(e, d) for e in cfg.epsilon_grid for d in cfg.delta_grid]
    if threads <= 1:
        return [run_cell(cfg, returns, e, d) for e, d in grid]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(lambda ed: run_cell(cfg, returns, *ed), grid))


def report_rows(cfg: PortfolioSweepConfig, cells: list[PortfolioCell]) -> list[dict]:
    """One row per cell. ``n_trials`` counts the trials that produced a ratio,
    so infeasible trials show up as a shortfall against ``cfg.trials``."""
    return [dict(epsilon=c.epsilon, delta=c.delta, metric="variance_ratio", mean=c.ratio_mean,
                 stderr=c.ratio_stderr, n_trials=c.n_trials - c.n_infeasible, seed=cfg.seed)
            for c in cells]
