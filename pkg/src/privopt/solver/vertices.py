"""Brute-force vertex enumeration for small polyhedra (test oracle)."""

from __future__ import annotations

import itertools
import math

import numpy as np

from privopt.errors import DimensionTooLarge

MAX_DIM = 8
MAX_BASES = 20000


def enumerate_vertices(A, b, tol: float = 1e-9) -> np.ndarray:
    """All vertices of ``{x : Ax <= b}``, one per row of the result.

    Every ``n``-subset of rows with a nonsingular submatrix is solved as an
    equality system; solutions satisfying all rows within ``tol`` are kept
    and deduplicated.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    m, n = A.shape
    if n > MAX_DIM or math.comb(m, n) > MAX_BASES:
        raise DimensionTooLarge(f"vertex enumeration refused for m={m}, n={n}")
    scale = max(1.0, float(np.abs(b).max(initial=0.0)))
    found: list[np.ndarray] = []
    for rows in itertools.combinations(range(m), n):
        sub = A[list(rows)]
        if np.linalg.matrix_rank(sub, tol=1e-10) < n:
            continue
        v = np.linalg.solve(sub, b[list(rows)])
        if np.all(A @ v <= b + tol * scale):
            if not any(np.max(np.abs(v - w)) <= tol * max(1.0, np.abs(v).max()) for w in found):
                found.append(v)
    return np.array(found).reshape(len(found), n)


def tight_rows(A, b, v, tol: float = 1e-9) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    scale = max(1.0, float(np.abs(b).max(initial=0.0)))
    return np.flatnonzero(np.abs(A @ v - b) <= tol * scale)
