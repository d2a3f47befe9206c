import math

import numpy as np
import pytest

from oracles import inverse_power_sigma_min
from privopt.condition import (
    INF,
    AlphaBarInfeasible,
    CondSpec,
    Method,
    alpha_aggregate,
    bound_report,
    cond_bruteforce,
    cond_diag,
    cond_sigma_min,
    cond_strong_stable,
    condition_number,
    is_strongly_stable,
    lower_bound,
    upper_bound,
)
from privopt.errors import DimensionTooLarge, NotStronglyStable, SingularMatrix
from privopt.mechanism import SensitivityModel, solve_private
from privopt.solver import ConstrainedProblem, ConstraintSystem, Linear, enumerate_vertices
from privopt.trunclap import PrivacyParams

# 2 * sqrt(4) * ln(4 (e - 1) / delta + 1) at eps = 1, from a 40-digit evaluation
EXAMPLE1_DELTA_01 = 16.978595596725132
EXAMPLE1_DELTA_1 = 8.253821420059314


def test_cond_diag_examples():
    assert cond_diag([1, 1]) == 2.0
    assert cond_diag([2, 4]) == 0.75
    for bad in ([1, 0], [-1, 2], []):
        with pytest.raises(ValueError):
            cond_diag(bad)


def test_cond_diag_matches_bruteforce():
    rng = np.random.default_rng(0)
    for m in (1, 2, 3, 4):
        a = rng.uniform(0.3, 3.0, m)
        assert cond_bruteforce(np.diag(a), INF, 1) == pytest.approx(cond_diag(a), rel=1e-3)


def test_sigma_min_examples():
    assert cond_sigma_min(np.eye(3)) == pytest.approx(1.0)
    assert cond_sigma_min(np.diag([2.0, 4.0])) == pytest.approx(0.5)
    with pytest.raises(SingularMatrix):
        cond_sigma_min([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(ValueError):
        cond_sigma_min(np.ones((2, 3)))


def test_sigma_min_matches_power_iteration():
    rng = np.random.default_rng(1)
    for _ in range(20):
        A = rng.normal(size=(3, 3))
        assert 1.0 / cond_sigma_min(A) == pytest.approx(inverse_power_sigma_min(A), rel=1e-8)


def test_sigma_min_dominates_bruteforce():
    rng = np.random.default_rng(2)
    for _ in range(5):
        A = rng.normal(size=(3, 3))
        assert cond_bruteforce(A, 2, 2) <= cond_sigma_min(A) * (1 + 1e-9)


def test_bruteforce_examples():
    assert cond_bruteforce(np.eye(2), INF, 1) == pytest.approx(2.0, abs=1e-3)
    assert cond_bruteforce(np.eye(2), 2, 2) == pytest.approx(1.0, abs=1e-3)
    for p in (1, 2, INF):
        assert cond_bruteforce([[2.5]], p, 1) == pytest.approx(0.4)
    with pytest.raises(DimensionTooLarge):
        cond_bruteforce(np.eye(6), 2, 2)


def test_strong_stability_check():
    assert is_strongly_stable(np.eye(2))
    assert is_strongly_stable(np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, 0.5]])) is False
    with pytest.raises(NotStronglyStable):
        cond_strong_stable([[1.0, 0.0], [0.0, 0.0]])


def test_alpha_bar_identity_matches_vertex_oracle():
    # variables (u1, u2, z1, z2); rows encode u^T A <= z, 1 - z <= u^T A, 1.z = 1, u >= 0
    value = cond_strong_stable(np.eye(2))
    A = np.array([
        [1, 0, -1, 0], [0, 1, 0, -1],
        [-1, 0, -1, 0], [0, -1, 0, -1],
        [0, 0, 1, 1], [0, 0, -1, -1],
        [-1, 0, 0, 0], [0, -1, 0, 0],
    ], dtype=float)
    b = np.array([0, 0, -1, -1, 1, -1, 0, 0], dtype=float)
    V = enumerate_vertices(A, b)
    assert value == pytest.approx(float((V[:, 0] + V[:, 1]).max()))
    assert value == pytest.approx(1.0)


def test_alpha_bar_lp_infeasible_is_flagged():
    # 1 - z <= u^T A <= z forces z >= 1/2, impossible with 1.z = 1 in three dimensions
    with pytest.raises(AlphaBarInfeasible):
        cond_strong_stable(np.eye(3))


def test_alpha_bar_bounds_observed_gap():
    # max x1 + x2 s.t. x <= b; l_inf Lipschitz constant is ||c||_1 = 2, p = inf
    b = np.array([5.0, 5.0])
    p = ConstrainedProblem(Linear([1.0, 1.0]), ConstraintSystem(np.eye(2), b))
    sens = SensitivityModel(1.0, [0.0, 0.0])
    privacy = PrivacyParams(1.0, 0.1)
    bound = upper_bound(2.0, 1.0, privacy, 2, alpha_aggregate(cond_strong_stable(np.eye(2)), 2, INF))
    worst = max(10.0 - solve_private(p, sens, privacy, seed, probe=False).objective for seed in range(1000))
    assert worst <= bound


def test_upper_bound_examples():
    privacy = PrivacyParams(1.0, 1.0)
    assert upper_bound(1, 1, privacy, 1, 1) == pytest.approx(2.0)
    assert upper_bound(1, 2, privacy, 1, 1) == pytest.approx(4.0)
    agg = alpha_aggregate(1.0 / 1.0, 4, 2)
    assert agg == 2.0
    assert upper_bound(1, 1, PrivacyParams(1.0, 0.1), 4, agg) == pytest.approx(EXAMPLE1_DELTA_01, rel=1e-13)
    assert upper_bound(1, 1, PrivacyParams(1.0, 1.0), 4, agg) == pytest.approx(EXAMPLE1_DELTA_1, rel=1e-13)
    with pytest.raises(ValueError):
        upper_bound(0, 1, privacy, 1, 1)
    with pytest.raises(ValueError):
        upper_bound(1, 1, privacy, 1, -1)


def test_lower_bound_examples():
    assert lower_bound(1.0, PrivacyParams(1.0, 0.5), [1.0]) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        lower_bound(1.0, PrivacyParams(1.0, 0.6), [1.0])
    with pytest.raises(ValueError):
        lower_bound(1.0, PrivacyParams(1.0, 0.1), [0.0])


def test_lower_below_upper_on_grid():
    rng = np.random.default_rng(3)
    for eps in (0.01, 0.1, 0.5, 1.0, 5.0):
        for delta in (1e-8, 1e-5, 1e-3, 0.1, 0.5):
            for m in (1, 2, 4, 8):
                a = rng.uniform(0.1, 10.0, m)
                privacy = PrivacyParams(eps, delta)
                assert lower_bound(1.0, privacy, a) <= upper_bound(1.0, 1.0, privacy, m, cond_diag(a))


def test_gap_domination_small():
    a = np.array([1.0, 3.0])
    b = np.array([4.0, 9.0])
    p = ConstrainedProblem(Linear([1.0, 1.0]), ConstraintSystem(np.diag(a), b))
    sens = SensitivityModel(1.0, [0.0, 0.0])
    privacy = PrivacyParams(1.0, 0.1)
    opt = float(np.sum(b / a))
    bound = upper_bound(1.0, 1.0, privacy, 2, cond_diag(a))
    worst = max(opt - solve_private(p, sens, privacy, s, probe=False).objective for s in range(200))
    assert 0 <= worst <= bound


def test_bound_report_diagonal():
    privacy = PrivacyParams(1.0, 0.1)
    r = bound_report(np.diag([1.0, 2.0]), 1.0, 1, 1.0, privacy)
    assert r.lower is not None and r.lower <= r.upper
    assert r.upper <= upper_bound(1.0, 1.0, privacy, 2, cond_diag([1.0, 2.0])) * (1 + 1e-9)


def test_cond_spec_and_dispatch():
    with pytest.raises(ValueError):
        CondSpec(3, 1, Method.DIAGONAL)
    A = np.diag([2.0, 4.0])
    assert condition_number(A, CondSpec(INF, 1, Method.DIAGONAL)) == 0.75
    assert condition_number(A, CondSpec(2, 2, Method.SIGMA_MIN)) == pytest.approx(0.5)
    assert condition_number(np.eye(2), CondSpec(INF, INF, Method.STRONG_STABLE)) == pytest.approx(1.0)
    assert condition_number(A, CondSpec(INF, 1, Method.BRUTE_FORCE)) == pytest.approx(0.75, rel=1e-3)
    with pytest.raises(ValueError):
        condition_number(np.ones((2, 2)), CondSpec(INF, 1, Method.DIAGONAL))
    with pytest.raises(ValueError):
        condition_number(A, CondSpec(1, 2, Method.SIGMA_MIN))


def test_alpha_aggregate():
    assert alpha_aggregate(3.0, 8, INF) == 3.0
    assert alpha_aggregate(3.0, 4, 2) == 6.0
    assert alpha_aggregate(3.0, 4, 1) == 12.0
    assert math.isclose(alpha_aggregate(1.0, 9, 2), 3.0)
