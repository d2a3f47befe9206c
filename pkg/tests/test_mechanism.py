import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import random_private_instance
from privopt.errors import InfeasibleFloorSystem, NoPureDpMechanism, SolverFailure
from privopt.mechanism import (
    SensitivityModel,
    audit_feasibility,
    baseline_laplace_perturb,
    empirical_dp_check,
    family_floors,
    laplace_mechanism_1d,
    noise_distribution,
    perturb_constraints,
    solve_private,
    solve_pure_dp,
    truncated_mechanism_1d,
)
from privopt.rng import substream
from privopt.solver import ConstrainedProblem, ConstraintSystem, Linear, Quadratic, enumerate_vertices
from privopt.trunclap import PrivacyParams, shift_width

# seed 42, b = (10, 10), floors 0, Delta 1, eps 1, delta 0.1; cross-checked by
# an mpmath root-finding inverse of the quadrature cdf on the same uniforms
GOLDEN_PERTURB = [4.802388861510588, 5.241507782472809]

P1 = PrivacyParams(1.0, 0.1)


def test_golden_perturbation():
    sens = SensitivityModel(1.0, [0.0, 0.0])
    out = perturb_constraints([10.0, 10.0], sens, P1, substream(42))
    np.testing.assert_allclose(out, GOLDEN_PERTURB, rtol=1e-13)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32), b=st.lists(st.floats(-50, 50), min_size=1, max_size=6))
def test_pinned_floor_identity(seed, b):
    sens = SensitivityModel(1.0, b)
    out = perturb_constraints(b, sens, P1, substream(seed))
    assert np.array_equal(out, np.asarray(b, dtype=float))


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32), gaps=st.lists(st.floats(0, 100), min_size=1, max_size=8),
       eps=st.floats(1e-3, 10), delta=st.floats(1e-8, 1), D=st.floats(1e-2, 10))
def test_monotone_release(seed, gaps, eps, delta, D):
    floors = np.linspace(-5, 5, len(gaps))
    b = floors + np.asarray(gaps)
    sens = SensitivityModel(D, floors)
    out = perturb_constraints(b, sens, PrivacyParams(eps, delta), substream(seed))
    assert np.all(out <= b)
    assert np.all(out >= floors)


def test_noise_boundary_values():
    sens = SensitivityModel(1.0, [-np.inf, -np.inf])
    s = shift_width(1.0, P1, 2)
    b = np.array([3.0, 7.0])
    np.testing.assert_array_equal(perturb_constraints(b, sens, P1, None, noise=[s, s]), b)
    np.testing.assert_allclose(perturb_constraints(b, sens, P1, None, noise=[-s, -s]), b - 2 * s)


def test_public_rows_untouched():
    sens = SensitivityModel(1.0, [-np.inf, 0.0], private=[False, True])
    out = perturb_constraints([5.0, 50.0], sens, P1, substream(1))
    assert out[0] == 5.0 and out[1] < 50.0
    # the shift uses the number of private rows only
    assert noise_distribution(sens, P1).half_width == pytest.approx(shift_width(1.0, P1, 1))


def test_inconsistent_model_rejected():
    with pytest.raises(ValueError):
        perturb_constraints([0.0], SensitivityModel(1.0, [1.0]), P1, substream(0))
    with pytest.raises(ValueError):
        perturb_constraints([0.0, 1.0], SensitivityModel(1.0, [0.0]), P1, substream(0))
    with pytest.raises(ValueError):
        SensitivityModel(0.0, [0.0])
    with pytest.raises(ValueError):
        SensitivityModel(1.0, [0.0], private=[False])


def test_zero_width_model_releases_floors():
    b = np.array([2.0, 3.0])
    p = ConstrainedProblem(Linear([1, 1]), ConstraintSystem(np.eye(2), b))
    sol = solve_private(p, SensitivityModel(1e-9, b), P1, 7)
    np.testing.assert_allclose(sol.x, b)
    assert sol.objective == pytest.approx(5.0)
    assert sol.seed == 7 and sol.feasible_wrt_original


def test_solve_private_is_seed_deterministic():
    p, sens = random_private_instance(np.random.default_rng(0), 4, 3)
    a = solve_private(p, sens, P1, 99)
    b = solve_private(p, sens, P1, 99)
    assert a.x.tobytes() == b.x.tobytes() and np.array_equal(a.b_bar, b.b_bar)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), inst=st.integers(0, 10**6), quadratic=st.booleans())
def test_hard_feasibility_property(seed, inst, quadratic):
    p, sens = random_private_instance(np.random.default_rng(inst), 4, 3, quadratic)
    sol = solve_private(p, sens, PrivacyParams(0.5, 1e-3), seed)
    assert np.all(p.A @ sol.x <= p.b + 1e-7)
    priv = sens.private
    assert np.all(sol.b_bar <= p.b) and np.all(sol.b_bar[priv] >= sens.floors[priv])
    assert np.all(p.A @ sol.x <= sol.b_bar + 1e-7)


def test_private_qp_is_feasible():
    Q = np.array([[2.0, 0.5], [0.5, 1.0]])
    A = np.array([[-1.0, -1.0], [1.0, 0.0]])
    p = ConstrainedProblem(Quadratic(Q), ConstraintSystem(A, [-1.0, 4.0]))
    sens = SensitivityModel(0.2, [-np.inf, 2.0], private=[False, True])
    for seed in range(20):
        sol = solve_private(p, sens, P1, seed)
        assert sol.feasible_wrt_original


def test_disjoint_regions_refused():
    # neighbors: x <= 0 & x >= 0 (x = 0) versus 1 <= x <= 2; floors give an empty system
    A = np.array([[1.0], [-1.0]])
    family = np.array([[0.0, 0.0], [2.0, -1.0]])
    p = ConstrainedProblem(Linear([1.0]), ConstraintSystem(A, family[0]))
    sens = SensitivityModel(3.0, family_floors(family))
    with pytest.raises(InfeasibleFloorSystem):
        solve_private(p, sens, P1, 0)


def test_intersection_identity():
    rng = np.random.default_rng(4)
    for _ in range(10):
        A = rng.normal(size=(4, 2))
        bs = rng.uniform(0.0, 2.0, (20, 4))
        floors = family_floors(bs)
        pts = rng.uniform(-3, 3, (2000, 2))
        in_all = np.all([np.all(pts @ A.T <= b, axis=1) for b in bs], axis=0)
        in_floor = np.all(pts @ A.T <= floors, axis=1)
        assert np.array_equal(in_all, in_floor)


def test_solver_failure_propagates():
    p = ConstrainedProblem(Linear([1.0, 0.0]), ConstraintSystem([[0.0, 1.0]], [1.0]))
    with pytest.raises(SolverFailure):
        solve_private(p, SensitivityModel(1.0, [0.0]), P1, 0)


def test_audit_feasibility():
    a = audit_feasibility(np.eye(2), [1.0, 2.0], [1.0, 1.5])
    assert a.violated == (1,) and a.max_violation == pytest.approx(0.5)
    assert audit_feasibility(np.eye(2), [1.0, 1.0 + 1e-9], [1.0, 1.0]).feasible


# baseline


def test_baseline_forced_noise():
    sens = SensitivityModel(1.0, [0.0, 0.0])
    s = shift_width(1.0, P1, 2)
    b = np.array([1.0, 10.0])
    np.testing.assert_allclose(baseline_laplace_perturb(b, sens, P1, None, noise=0.0), np.maximum(b - s, 0))
    out = baseline_laplace_perturb(b, sens, P1, None, noise=2 * s)
    np.testing.assert_allclose(out, b + s)
    assert np.all(out > b)
    raw = baseline_laplace_perturb(b, sens, P1, None, noise=-100.0, floor_at_zero=False)
    assert np.all(raw < 0)


def test_baseline_violation_frequency():
    eps, D = 0.01, 1.0
    privacy = PrivacyParams(eps, 0.1)
    sens = SensitivityModel(D, [0.0])
    s = shift_width(D, privacy, 1)
    p = 0.5 * math.exp(-eps * s / D)
    rng = substream(17)
    n = 10**4
    hits = sum(baseline_laplace_perturb([1e4], sens, privacy, rng)[0] > 1e4 for _ in range(n))
    assert abs(hits / n - p) <= 3 * math.sqrt(p * (1 - p) / n)


def test_baseline_shared_noise():
    sens = SensitivityModel(1.0, [-np.inf] * 3)
    out = baseline_laplace_perturb(np.zeros(3), sens, P1, substream(2), shared_noise=True, floor_at_zero=False)
    assert np.ptp(out) == 0.0


# pure DP


def test_pure_dp_example():
    sol = solve_pure_dp(Linear([1, 1]), np.eye(2), [1, 1])
    np.testing.assert_allclose(sol.x, [1, 1])
    assert sol.objective == pytest.approx(2.0)


def test_pure_dp_errors():
    with pytest.raises(NoPureDpMechanism):
        solve_pure_dp(Linear([1]), [[1.0], [-1.0]], [0.0, -1.0])
    with pytest.raises(ValueError):
        solve_pure_dp(Linear([1]), [[1.0]], [-np.inf])
    with pytest.raises(SolverFailure):
        solve_pure_dp(Linear([1, 0]), [[0.0, 1.0]], [1.0])


def test_pure_dp_matches_vertex_argmax():
    rng = np.random.default_rng(12)
    A = np.vstack([rng.normal(size=(3, 2)), np.eye(2), -np.eye(2)])
    bs = np.hstack([rng.uniform(0.5, 2.0, (20, 3)), np.full((20, 4), 3.0)])
    c = rng.normal(size=2)
    sol = solve_pure_dp(Linear(c), A, family_floors(bs))
    V = enumerate_vertices(np.vstack([A] * 20), bs.ravel())
    assert sol.objective == pytest.approx(float((V @ c).max()), rel=1e-9)


# empirical audit


def test_audit_identical_inputs():
    mech = truncated_mechanism_1d(1.0, P1)
    r = empirical_dp_check(mech, 0.0, 0.0, P1, 200_000, rng=3)
    assert abs(r.delta_hat) <= 3 * r.delta_sigma + 1e-12
    assert r.ratio_ok


def test_audit_truncated_within_delta():
    mech = truncated_mechanism_1d(1.0, P1)
    r = empirical_dp_check(mech, 0.0, 1.0, P1, 200_000, rng=4)
    assert r.delta_within(0.1)
    assert r.ratio_ok and r.n_overlap_bins > 0


def test_audit_laplace_is_pure():
    privacy = PrivacyParams(1.0, 1e-3)
    mech = laplace_mechanism_1d(1.0, privacy)
    r = empirical_dp_check(mech, 0.0, 1.0, privacy, 200_000, rng=5)
    assert r.delta_within(0.0)
    assert r.ratio_ok


def test_audit_detects_a_broken_mechanism():
    # noise calibrated for sensitivity 1 applied to inputs 5 apart
    mech = truncated_mechanism_1d(1.0, P1)
    r = empirical_dp_check(mech, 0.0, 5.0, P1, 200_000, rng=6)
    assert not r.delta_within(0.1)
