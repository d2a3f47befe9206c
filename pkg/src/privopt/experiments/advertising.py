"""Revenue-maximizing ad allocation with private advertiser budgets.

    maximize    sum_ij c_ij x_ij
    subject to  sum_i x_ij      <= n_j     for each group j      (public)
                sum_j c_ij x_ij <= b_i     for each advertiser i (private)
                x >= 0

Variables are laid out advertiser-major: ``x[i * M + j]``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from privopt.errors import SolverFailure
from privopt.mechanism import SensitivityModel, baseline_laplace_perturb, perturb_constraints
from privopt.rng import substream
from privopt.solver import ConstrainedProblem, ConstraintSystem, Linear, Status, solve_lp
from privopt.trunclap import PrivacyParams, log_growth

_INSTANCE, _OURS, _BASELINE = 0, 1, 2

DEFAULT_EPSILONS = (1e-5, 3e-5, 1e-4, 3e-4, 1e-3, 1e-2, 1e-1, 1.0)


@dataclass(frozen=True)
class AdSweepConfig:
    M: int = 200
    N: int = 10
    impressions_per_group: float = 1e7
    budget_center: float = 1e7
    delta_sens: float = 100.0
    zero_prob: float = 0.2
    delta: float = 1e-4
    epsilon_grid: tuple[float, ...] = DEFAULT_EPSILONS
    sims: int = 50
    seed: int = 0
    shared_noise: bool = False
    pivot_rule: str = "dantzig"

    def __post_init__(self):
        if not 0.0 <= self.zero_prob <= 1.0:
            raise ValueError("zero_prob must lie in [0, 1]")
        if min(self.M, self.N, self.sims) < 1 or not self.epsilon_grid:
            raise ValueError("counts must be positive and the epsilon grid nonempty")
        if min(self.impressions_per_group, self.budget_center, self.delta_sens) <= 0:
            raise ValueError("impressions, budgets and sensitivity must be positive")


def build_problem(c, impressions, budgets) -> ConstrainedProblem:
    """LP for an N x M bid matrix ``c``; the last N rows are the private budgets."""
    c = np.atleast_2d(np.asarray(c, dtype=float))
    N, M = c.shape
    supply = np.tile(np.eye(M), (1, N))
    spend = np.zeros((N, N * M))
    for i in range(N):
        spend[i, i * M:(i + 1) * M] = c[i]
    A = np.vstack([supply, spend])
    b = np.concatenate([np.broadcast_to(np.asarray(impressions, dtype=float), (M,)),
                        np.asarray(budgets, dtype=float).ravel()])
    return ConstrainedProblem(Linear(c.ravel(), "max"), ConstraintSystem(A, b), nonneg=True)


def advertising_instance(cfg: AdSweepConfig, rng: np.random.Generator) -> tuple[ConstrainedProblem, SensitivityModel]:
    c = rng.uniform(0.0, 1.0, (cfg.N, cfg.M))
    c[rng.random((cfg.N, cfg.M)) < cfg.zero_prob] = 0.0
    half = cfg.delta_sens / 2
    budgets = rng.uniform(cfg.budget_center - half, cfg.budget_center + half, cfg.N)
    problem = build_problem(c, cfg.impressions_per_group, budgets)
    mask = np.concatenate([np.zeros(cfg.M, bool), np.ones(cfg.N, bool)])
    floors = np.where(mask, 0.0, -np.inf)
    return problem, SensitivityModel(cfg.delta_sens, floors, private=mask)


def budget_violations(problem: ConstrainedProblem, sens: SensitivityModel, x, rel_tol: float = 1e-9) -> int:
    """Number of private rows with ``(Ax)_i > b_i`` beyond a relative tolerance."""
    A, b = problem.A[sens.private], problem.b[sens.private]
    return int(np.count_nonzero(A @ x - b > rel_tol * np.maximum(np.abs(b), 1.0)))


def baseline_violation_probability(cfg: AdSweepConfig, epsilon: float) -> float:
    """``P[eta > s]`` for unbounded Laplace noise: ``1 / (2 (N (e^eps - 1)/delta + 1))``."""
    return 0.5 * math.exp(-log_growth(epsilon, cfg.N / cfg.delta))


@dataclass(frozen=True)
class AdRow:
    epsilon: float
    revenue_ratio: float
    revenue_ratio_stderr: float
    ours_revenue: float
    baseline_revenue: float
    baseline_violation_fraction: float
    baseline_violation_stderr: float
    our_violation_fraction: float
    predicted_violation: float
    n_sims: int


def _revenue(problem, b_bar, rule):
    sol = solve_lp(problem.with_rhs(b_bar), pivot_rule=rule)
    if sol.status is not Status.OPTIMAL:
        raise SolverFailure(f"advertising LP is {sol.status.value}")
    return sol


def run_sim(cfg: AdSweepConfig, k: int) -> np.ndarray:
    """Simulation ``k`` at every epsilon.

    Returns an array of shape (len(epsilon_grid), 4) holding our revenue,
    baseline revenue, our violated rows and baseline violated rows.
    """
    problem, sens = advertising_instance(cfg, substream(cfg.seed, _INSTANCE, k))
    out = np.zeros((len(cfg.epsilon_grid), 4))
    for e, eps in enumerate(cfg.epsilon_grid):
        privacy = PrivacyParams(eps, cfg.delta)
        ours = _revenue(problem, perturb_constraints(problem.b, sens, privacy, substream(cfg.seed, _OURS, k)),
                        cfg.pivot_rule)
        base_b = baseline_laplace_perturb(problem.b, sens, privacy, substream(cfg.seed, _BASELINE, k),
                                          floor_at_zero=True, shared_noise=cfg.shared_noise)
        base = _revenue(problem, base_b, cfg.pivot_rule)
        out[e] = (ours.objective, base.objective,
                  budget_violations(problem, sens, ours.x), budget_violations(problem, sens, base.x))
    return out


def _ratio_of_means(a, b):
    """``mean(a) / mean(b)`` with its first-order (delta-method) standard error."""
    mb = b.mean()
    if mb <= 0:
        return math.nan, math.nan
    r = a.mean() / mb
    if a.size < 2:
        return float(r), 0.0
    return float(r), float((a - r * b).std(ddof=1) / (mb * math.sqrt(a.size)))


def run_advertising_sweep(cfg: AdSweepConfig, threads: int = 1) -> list[AdRow]:
    if threads <= 1:
        sims = [run_sim(cfg, k) for k in range(cfg.sims)]
    else:
        with ThreadPoolExecutor(threads) as pool:
            sims = list(pool.map(lambda k: run_sim(cfg, k), range(cfg.sims)))
    # results are indexed by simulation, so the reduction order is fixed
    S = np.stack(sims)
    rows = []
    for e, eps in enumerate(cfg.epsilon_grid):
        ours, base = S[:, e, 0], S[:, e, 1]
        base_frac = S[:, e, 3] / cfg.N
        p = float(base_frac.mean())
        ratio, ratio_se = _ratio_of_means(ours, base)
        rows.append(AdRow(
            epsilon=eps,
            revenue_ratio=ratio,
            revenue_ratio_stderr=ratio_se,
            ours_revenue=float(ours.mean()),
            baseline_revenue=float(base.mean()),
            baseline_violation_fraction=p,
            baseline_violation_stderr=float(base_frac.std(ddof=1) / math.sqrt(cfg.sims)) if cfg.sims > 1 else 0.0,
            our_violation_fraction=float(S[:, e, 2].sum() / (cfg.N * cfg.sims)),
            predicted_violation=baseline_violation_probability(cfg, eps),
            n_sims=cfg.sims,
        ))
    return rows


def report_rows(cfg: AdSweepConfig, rows: list[AdRow]) -> list[dict]:
    out = []
    for r in rows:
        for metric, mean, se in (
            ("revenue_ratio", r.revenue_ratio, r.revenue_ratio_stderr),
            ("baseline_violation_fraction", r.baseline_violation_fraction, r.baseline_violation_stderr),
            ("our_violation_fraction", r.our_violation_fraction, 0.0),
        ):
            out.append(dict(epsilon=r.epsilon, delta=cfg.delta, metric=metric, mean=mean, stderr=se,
                            n_trials=r.n_sims, seed=cfg.seed))
    return out
