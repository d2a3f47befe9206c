"""Shipping from pharmacies to hospital branches with private demands.

    minimize    sum_ij c_ij x_ij
    subject to  sum_j x_ij <= supply_i     for each pharmacy i  (public)
                sum_i x_ij >= demand_j     for each branch j    (private)
                x >= 0

Demand rows are stored as ``-sum_i x_ij <= -demand_j``, so shrinking the
right-hand side only ever raises the amount delivered.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from privopt.condition import alpha_aggregate, cond_bruteforce, upper_bound
from privopt.errors import InfeasibleInstance, SolverFailure
from privopt.mechanism import SensitivityModel, solve_private
from privopt.solver import ConstrainedProblem, ConstraintSystem, Linear, solve_lp
from privopt.trunclap import PrivacyParams

DEMO_SUPPLIES = (4.0, 3.0)
DEMO_DEMANDS = (2.0, 3.0)
DEMO_COSTS = ((1.0, 2.0), (3.0, 1.0))


def transportation_instance(supplies, demands, costs, *, delta_sens: float = 1.0,
                            max_demand=None) -> tuple[ConstrainedProblem, SensitivityModel]:
    """Variables ``x[i * N + j]`` for pharmacy ``i`` and branch ``j``.

    ``max_demand`` (scalar or per branch) is the largest demand any database
    could produce; its negation is the floor of each demand row. It defaults
    to the given demands.
    """
    sup = np.asarray(supplies, dtype=float).ravel()
    dem = np.asarray(demands, dtype=float).ravel()
    c = np.atleast_2d(np.asarray(costs, dtype=float))
    M, N = sup.size, dem.size
    if c.shape != (M, N):
        raise ValueError(f"costs must be {M} x {N}, got {c.shape}")
    if sup.sum() < dem.sum():
        raise InfeasibleInstance(f"total supply {sup.sum()} cannot cover total demand {dem.sum()}")
    rmax = dem if max_demand is None else np.broadcast_to(np.asarray(max_demand, dtype=float), (N,))
    if np.any(rmax < dem):
        raise ValueError("max_demand lies below a demand")
    supply_rows = np.kron(np.eye(M), np.ones(N))
    demand_rows = -np.kron(np.ones(M), np.eye(N))
    A = np.vstack([supply_rows, demand_rows])
    b = np.concatenate([sup, -dem])
    problem = ConstrainedProblem(Linear(c.ravel(), "min"), ConstraintSystem(A, b), nonneg=True)
    mask = np.concatenate([np.zeros(M, bool), np.ones(N, bool)])
    floors = np.concatenate([np.full(M, -np.inf), -rmax])
    return problem, SensitivityModel(delta_sens, floors, private=mask)


@dataclass(frozen=True)
class TransportDemo:
    optimal_cost: float
    private_cost: float
    gap: float
    bound: float
    x_private: np.ndarray
    b_bar: np.ndarray
    seed: int


def demand_bound(problem: ConstrainedProblem, sens: SensitivityModel, privacy: PrivacyParams) -> float:
    """Worst-case cost increase of the private release.

    Uses ``L = max |c|``, the Lipschitz constant of the cost in the l1 norm,
    and the best brute-force condition number of the full system with the
    sign rows included.
    """
    A, _ = problem.full_system()
    L = float(np.abs(problem.objective.c).max())
    k = sens.m_private
    agg = min(alpha_aggregate(cond_bruteforce(A, p, 1, max_rows=A.shape[0]), k, p) for p in (1, 2, np.inf))
    return upper_bound(L, sens.delta_sens, privacy, k, agg)


def demo_transportation(privacy: PrivacyParams, seed: int = 0, *, supplies=DEMO_SUPPLIES,
                        demands=DEMO_DEMANDS, costs=DEMO_COSTS, max_demand=None,
                        delta_sens: float = 1.0) -> TransportDemo:
    """Solve the instance exactly and privately and compare the costs.

    ``max_demand`` defaults to per-branch demand plus the total supply slack,
    the largest value the floor system can accommodate.
    """
    if max_demand is None:
        dem = np.asarray(demands, dtype=float)
        max_demand = dem + (np.sum(supplies) - dem.sum()) / dem.size
    problem, sens = transportation_instance(supplies, demands, costs, delta_sens=delta_sens,
                                            max_demand=max_demand)
    opt = solve_lp(problem)
    if not opt.optimal:
        raise SolverFailure(f"transportation LP is {opt.status.value}")
    priv = solve_private(problem, sens, privacy, seed)
    return TransportDemo(opt.objective, priv.objective, priv.objective - opt.objective,
                         demand_bound(problem, sens, privacy), priv.x, priv.b_bar, seed)
