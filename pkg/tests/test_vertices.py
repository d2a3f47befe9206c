import numpy as np
import pytest

from privopt.errors import DimensionTooLarge
from privopt.solver import enumerate_vertices
from privopt.solver.vertices import tight_rows


def as_set(V):
    return {tuple(np.round(v, 9)) for v in V}


def test_unit_square():
    A = np.vstack([np.eye(2), -np.eye(2)])
    V = enumerate_vertices(A, [1, 1, 0, 0])
    assert as_set(V) == {(0, 0), (1, 0), (0, 1), (1, 1)}


def test_simplex_3d():
    A = np.vstack([-np.eye(3), np.ones((1, 3))])
    V = enumerate_vertices(A, [0, 0, 0, 1])
    assert len(V) == 4
    assert as_set(V) == {(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)}


def test_empty_polytope():
    assert enumerate_vertices([[1.0], [-1.0]], [0.0, -1.0]).shape == (0, 1)


def test_random_polytope_self_check():
    rng = np.random.default_rng(0)
    for _ in range(10):
        n = int(rng.integers(2, 5))
        A = np.vstack([rng.normal(size=(4, n)), np.eye(n), -np.eye(n)])
        b = np.concatenate([rng.uniform(0.2, 1.0, 4), np.ones(2 * n)])
        V = enumerate_vertices(A, b)
        assert len(V) >= n + 1
        for v in V:
            assert np.all(A @ v <= b + 1e-9)
            rows = tight_rows(A, b, v)
            assert np.linalg.matrix_rank(A[rows]) == n


def test_refuses_large_inputs():
    with pytest.raises(DimensionTooLarge):
        enumerate_vertices(np.eye(9), np.ones(9))
    with pytest.raises(DimensionTooLarge):
        enumerate_vertices(np.ones((40, 8)), np.ones(40))
