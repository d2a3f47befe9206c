"""Private release of linearly constrained optima.

The constraint vector ``b`` is replaced by

    b_bar_i = max(b_i - s + eta_i, floor_i)

with ``eta_i`` i.i.d. truncated Laplace on ``[-s, s]``. Since ``eta_i <= s``
the released vector never exceeds ``b``, so an optimizer of the perturbed
problem satisfies the original constraints, and since it never drops below
the floors the perturbed problem stays feasible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from privopt.errors import InfeasibleFloorSystem, NoPureDpMechanism, SolverFailure
from privopt.rng import substream
from privopt.solver import ConstrainedProblem, ConstraintSystem, Linear, Quadratic, Status, solve
from privopt.solver.simplex import find_feasible_point
from privopt.trunclap import PrivacyParams, TruncLaplace, shift_width

AUDIT_TOL = 1e-7


@dataclass(frozen=True)
class SensitivityModel:
    """Sensitivity of ``b(D)`` and the per-row floors ``inf_D b(D)_i``.

    Rows with ``private`` False are public: they are never perturbed and
    their floors are ignored. A floor of ``-inf`` means the row is unbounded
    below across databases.
    """

    delta_sens: float
    floors: np.ndarray
    private: np.ndarray | None = None

    def __post_init__(self):
        if not self.delta_sens > 0:
            raise ValueError(f"sensitivity must be positive, got {self.delta_sens}")
        floors = np.asarray(self.floors, dtype=float).ravel()
        mask = np.ones(floors.size, dtype=bool) if self.private is None else np.asarray(self.private, dtype=bool).ravel()
        if mask.size != floors.size:
            raise ValueError("private mask and floors differ in length")
        if not mask.any():
            raise ValueError("at least one row must be private")
        object.__setattr__(self, "floors", floors)
        object.__setattr__(self, "private", mask)

    @property
    def m(self) -> int:
        return self.floors.size

    @property
    def m_private(self) -> int:
        return int(self.private.sum())

    @property
    def finite_floors(self) -> bool:
        return bool(np.all(np.isfinite(self.floors[self.private])))

    def floor_rhs(self, b) -> np.ndarray:
        """``b`` with every private row replaced by its floor."""
        return np.where(self.private, self.floors, np.asarray(b, dtype=float))

    def check(self, b) -> np.ndarray:
        b = np.asarray(b, dtype=float).ravel()
        if b.size != self.m:
            raise ValueError(f"b has {b.size} entries, sensitivity model covers {self.m}")
        bad = np.flatnonzero(self.private & (b < self.floors))
        if bad.size:
            raise ValueError(f"b lies below its floor at rows {bad.tolist()}: inconsistent sensitivity model")
        return b


@dataclass(frozen=True)
class FeasibilityAudit:
    violated: tuple[int, ...]
    max_violation: float

    @property
    def feasible(self) -> bool:
        return not self.violated


@dataclass
class PrivateSolution:
    b_bar: np.ndarray
    x: np.ndarray
    objective: float
    seed: int | None
    audit: FeasibilityAudit = field(repr=False)

    @property
    def feasible_wrt_original(self) -> bool:
        return self.audit.feasible


def noise_distribution(sens: SensitivityModel, privacy: PrivacyParams) -> TruncLaplace:
    return TruncLaplace.for_mechanism(sens.delta_sens, privacy, sens.m_private)


def perturb_constraints(b, sens: SensitivityModel, privacy: PrivacyParams, rng: np.random.Generator,
                        *, noise=None) -> np.ndarray:
    """Release ``max(b_i - s + eta_i, floor_i)`` on the private rows.

    ``noise`` overrides the sampled ``eta`` (one entry per private row); it is
    meant for tests that pin the noise to boundary values.
    """
    b = sens.check(b)
    dist = noise_distribution(sens, privacy)
    s = dist.half_width
    if noise is None:
        eta = dist.sample(rng, sens.m_private)
    else:
        eta = np.clip(np.asarray(noise, dtype=float).ravel(), -s, s)
    out = b.copy()
    priv = sens.private
    # b - (s - eta) keeps the result <= b exactly in floating point
    out[priv] = np.maximum(b[priv] - (s - eta), sens.floors[priv])
    return out


def baseline_laplace_perturb(b, sens: SensitivityModel, privacy: PrivacyParams, rng: np.random.Generator,
                             *, floor_at_zero: bool = True, shared_noise: bool = False, noise=None) -> np.ndarray:
    """Same shift, untruncated Laplace(Delta/eps) noise: ``max(b_i - s + eta_i, 0)``.

    It can exceed ``b`` and is the constraint-violating comparison point.
    ``shared_noise`` draws a single ``eta`` for all private rows.
    """
    b = np.asarray(b, dtype=float).ravel()
    k = sens.m_private
    s = shift_width(sens.delta_sens, privacy, k)
    scale = sens.delta_sens / privacy.epsilon
    if noise is not None:
        eta = np.broadcast_to(np.asarray(noise, dtype=float), (k,))
    elif shared_noise:
        eta = np.full(k, rng.laplace(0.0, scale))
    else:
        eta = rng.laplace(0.0, scale, k)
    out = b.copy()
    vals = b[sens.private] - s + eta
    out[sens.private] = np.maximum(vals, 0.0) if floor_at_zero else vals
    return out


def audit_feasibility(A, x, b, tol: float = AUDIT_TOL) -> FeasibilityAudit:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    r = A @ np.asarray(x, dtype=float) - np.asarray(b, dtype=float)
    bad = np.flatnonzero(r > tol)
    return FeasibilityAudit(tuple(int(i) for i in bad), float(max(r.max(initial=0.0), 0.0)))


def check_floor_system(problem: ConstrainedProblem, sens: SensitivityModel) -> None:
    """Raise :class:`InfeasibleFloorSystem` if ``{x : Ax <= b*}`` is empty."""
    if not sens.finite_floors:
        return
    if find_feasible_point(problem.A, sens.floor_rhs(problem.b), problem.nonneg) is None:
        raise InfeasibleFloorSystem("the floor system {x : Ax <= b*} is empty")


def solve_private(problem: ConstrainedProblem, sens: SensitivityModel, privacy: PrivacyParams,
                  rng: np.random.Generator | int, *, probe: bool = True, noise=None,
                  audit_tol: float = AUDIT_TOL, **solver_kw) -> PrivateSolution:
    """Solve the problem against a privately perturbed right-hand side.

    ``rng`` may be a generator or an integer seed; a seed is recorded in the
    result. The floor-system probe runs only when every private floor is
    finite.
    """
    seed = None
    if not isinstance(rng, np.random.Generator):
        seed = int(rng)
        rng = substream(seed)
    if probe:
        check_floor_system(problem, sens)
    b_bar = perturb_constraints(problem.b, sens, privacy, rng, noise=noise)
    sol = solve(problem.with_rhs(b_bar), **solver_kw)
    if sol.status is not Status.OPTIMAL:
        raise SolverFailure(f"perturbed problem is {sol.status.value}", {"b_bar": b_bar.tolist()})
    audit = audit_feasibility(problem.A, sol.x, problem.b, audit_tol)
    return PrivateSolution(b_bar, sol.x, sol.objective, seed, audit)


def solve_pure_dp(objective: Linear | Quadratic, A, floors, nonneg=None):
    """The optimal (eps, 0)-DP release: optimize over ``{x : Ax <= b*}``.

    The result depends on the floors only, never on the database.
    """
    floors = np.asarray(floors, dtype=float).ravel()
    if not np.all(np.isfinite(floors)):
        raise ValueError("pure-DP release needs finite floors")
    problem = ConstrainedProblem(objective, ConstraintSystem(A, floors), nonneg)
    sol = solve(problem)
    if sol.status is Status.INFEASIBLE:
        raise NoPureDpMechanism("S* = {x : Ax <= b*} is empty")
    if sol.status is Status.UNBOUNDED:
        raise SolverFailure("objective is unbounded over S*")
    return sol


def family_floors(bs) -> np.ndarray:
    """Componentwise infimum over a family of constraint vectors."""
    return np.min(np.atleast_2d(np.asarray(bs, dtype=float)), axis=0)


# ----------------------------------------------------------------------------
# Empirical privacy audit for one-dimensional mechanisms

Mechanism1D = Callable[[float, int, np.random.Generator], np.ndarray]


def truncated_mechanism_1d(delta_sens: float, privacy: PrivacyParams, floor: float = -np.inf) -> Mechanism1D:
    dist = TruncLaplace.for_mechanism(delta_sens, privacy, 1)

    def release(b, n, rng):
        return np.maximum(b - (dist.half_width - dist.sample(rng, n)), floor)

    return release


def laplace_mechanism_1d(delta_sens: float, privacy: PrivacyParams, floor: float | None = None) -> Mechanism1D:
    s = shift_width(delta_sens, privacy, 1)
    scale = delta_sens / privacy.epsilon

    def release(b, n, rng):
        out = b - s + rng.laplace(0.0, scale, n)
        return out if floor is None else np.maximum(out, floor)

    return release


@dataclass(frozen=True)
class DpAuditReport:
    epsilon: float
    delta_hat: float
    delta_sigma: float
    max_ratio: float
    ratio_ok: bool
    n_overlap_bins: int

    def delta_within(self, delta: float, k: float = 3.0) -> bool:
        return self.delta_hat <= delta + k * self.delta_sigma


def empirical_dp_check(mechanism: Mechanism1D, b: float, b_prime: float, privacy: PrivacyParams,
                       n_samples: int, n_bins: int = 200, rng: np.random.Generator | int = 0,
                       *, min_count: int = 1000, k_sigma: float = 4.0) -> DpAuditReport:
    """Histogram estimate of the (eps, delta) trade-off between two inputs.

    Outputs are binned on ``n_bins`` equal-width bins spanning both sample
    ranges. Half of each sample picks the event ``V = {bins : P > e^eps Q}``
    and the other half estimates ``P[V] - e^eps Q[V]`` on it, which keeps the
    estimate free of the upward bias of summing clipped noisy differences;
    ``delta_sigma`` is its binomial standard error. The larger of the two
    directions is reported.

    The ratio test covers bins strictly inside both sample ranges with at
    least ``min_count`` hits per side and allows ``k_sigma`` standard errors
    of the log-ratio per bin.
    """
    if not isinstance(rng, np.random.Generator):
        rng = substream(int(rng))
    x = np.asarray(mechanism(b, n_samples, rng), dtype=float)
    y = np.asarray(mechanism(b_prime, n_samples, rng), dtype=float)
    lo, hi = min(x.min(), y.min()), max(x.max(), y.max())
    if hi <= lo:
        hi = lo + 1.0
    edges = np.linspace(lo, hi, n_bins + 1)
    half = n_samples // 2
    e = math.exp(privacy.epsilon)

    def hist(v):
        return np.histogram(v, edges)[0].astype(float)

    px, py = hist(x[:half]) / half, hist(y[:half]) / half
    n2 = n_samples - half
    qx, qy = hist(x[half:]) / n2, hist(y[half:]) / n2

    def one_way(sel_p, sel_q, est_p, est_q):
        event = sel_p > e * sel_q
        P, Q = est_p[event].sum(), est_q[event].sum()
        var = (P * (1 - P) + e * e * Q * (1 - Q)) / n2
        return float(P - e * Q), float(math.sqrt(var))

    d1 = one_way(px, py, qx, qy)
    d2 = one_way(py, px, qy, qx)
    delta_hat, delta_sigma = max(d1, d2)

    cx, cy = hist(x), hist(y)
    inner_lo, inner_hi = max(x.min(), y.min()), min(x.max(), y.max())
    inside = (edges[:-1] > inner_lo) & (edges[1:] < inner_hi) & (cx >= min_count) & (cy >= min_count)
    max_ratio, ok = 0.0, True
    if inside.any():
        ratio = np.maximum(cx[inside] / cy[inside], cy[inside] / cx[inside])
        slack = k_sigma * np.sqrt(1.0 / cx[inside] + 1.0 / cy[inside])
        max_ratio = float(ratio.max())
        ok = bool(np.all(ratio <= e * (1.0 + slack)))
    return DpAuditReport(privacy.epsilon, delta_hat, delta_sigma, max_ratio, ok, int(inside.sum()))
