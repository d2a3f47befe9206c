"""Problem and solution containers, plus the JSON problem format.

JSON problem document::

    {
      "objective": {"kind": "linear", "sense": "max", "c": [...]}
                 | {"kind": "quadratic", "sense": "min", "Q": [[...]], "c": [...]},
      "A": [[...], ...],
      "b": [...],
      "nonneg": [true, false, ...]      # or true / false for all variables
    }

Quadratic objectives are ``x^T Q x + c^T x`` (no factor one half).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from privopt.errors import ParseError


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class Linear:
    c: np.ndarray
    sense: str = "max"

    def __post_init__(self):
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float).ravel())
        if self.sense not in ("max", "min"):
            raise ValueError(f"sense must be 'max' or 'min', got {self.sense!r}")

    @property
    def n(self) -> int:
        return self.c.size

    def value(self, x) -> float:
        return float(self.c @ np.asarray(x, dtype=float))


@dataclass(frozen=True)
class Quadratic:
    """Minimize ``x^T Q x + c^T x`` with ``Q`` symmetric PSD."""

    Q: np.ndarray
    c: np.ndarray | None = None
    sense: str = "min"

    def __post_init__(self):
        Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        n = Q.shape[0]
        if Q.shape != (n, n):
            raise ValueError(f"Q must be square, got shape {Q.shape}")
        scale = max(1.0, float(np.abs(Q).max(initial=0.0)))
        if not np.allclose(Q, Q.T, atol=1e-9 * scale, rtol=0):
            raise ValueError("Q must be symmetric")
        if n and np.linalg.eigvalsh(Q).min() < -1e-9 * scale:
            raise ValueError("Q must be positive semidefinite")
        c = np.zeros(n) if self.c is None else np.asarray(self.c, dtype=float).ravel()
        if c.size != n:
            raise ValueError("c and Q dimensions differ")
        if self.sense != "min":
            raise ValueError("quadratic objectives are minimized")
        object.__setattr__(self, "Q", 0.5 * (Q + Q.T))
        object.__setattr__(self, "c", c)

    @property
    def n(self) -> int:
        return self.c.size

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(x @ self.Q @ x + self.c @ x)

    def gradient(self, x) -> np.ndarray:
        return 2.0 * self.Q @ x + self.c


@dataclass(frozen=True)
class ConstraintSystem:
    """``A x <= b``."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float).ravel()
        A = np.asarray(self.A, dtype=float)
        if A.ndim == 1:
            A = A.reshape(b.size, -1) if b.size else A.reshape(0, A.size)
        if A.shape[0] != b.size:
            raise ValueError(f"A has {A.shape[0]} rows but b has {b.size} entries")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def with_rhs(self, b) -> "ConstraintSystem":
        return ConstraintSystem(self.A, b)


@dataclass(frozen=True)
class ConstrainedProblem:
    objective: Linear | Quadratic
    constraints: ConstraintSystem
    nonneg: np.ndarray = None

    def __post_init__(self):
        n = self.objective.n
        if self.constraints.n != n:
            if self.constraints.m:
                raise ValueError(f"objective has {n} variables, constraints have {self.constraints.n}")
            object.__setattr__(self, "constraints", ConstraintSystem(np.zeros((0, n)), []))
        mask = self.nonneg
        if mask is None or mask is False:
            mask = np.zeros(n, dtype=bool)
        elif mask is True:
            mask = np.ones(n, dtype=bool)
        mask = np.asarray(mask, dtype=bool).ravel()
        if mask.size != n:
            raise ValueError("nonneg mask length differs from the number of variables")
        object.__setattr__(self, "nonneg", mask)

    @property
    def n(self) -> int:
        return self.objective.n

    @property
    def A(self) -> np.ndarray:
        return self.constraints.A

    @property
    def b(self) -> np.ndarray:
        return self.constraints.b

    def with_rhs(self, b) -> "ConstrainedProblem":
        return replace(self, constraints=self.constraints.with_rhs(b))

    def full_system(self) -> tuple[np.ndarray, np.ndarray]:
        """Constraint rows with the sign restrictions appended as ``-x_j <= 0``."""
        idx = np.flatnonzero(self.nonneg)
        rows = -np.eye(self.n)[idx]
        return np.vstack([self.A, rows]), np.concatenate([self.b, np.zeros(idx.size)])


@dataclass
class Solution:
    status: Status
    x: np.ndarray | None = None
    objective: float = float("nan")
    iterations: int = 0
    # multipliers for the rows of full_system(); QP only
    multipliers: np.ndarray | None = field(default=None, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


def problem_to_dict(p: ConstrainedProblem) -> dict:
    obj = p.objective
    if isinstance(obj, Linear):
        o = {"kind": "linear", "sense": obj.sense, "c": obj.c.tolist()}
    else:
        o = {"kind": "quadratic", "sense": "min", "Q": obj.Q.tolist(), "c": obj.c.tolist()}
    return {"objective": o, "A": p.A.tolist(), "b": p.b.tolist(), "nonneg": p.nonneg.tolist()}


def problem_from_dict(doc: dict) -> ConstrainedProblem:
    try:
        o = doc["objective"]
        kind = o.get("kind", "linear")
        if kind == "linear":
            objective = Linear(o["c"], o.get("sense", "max"))
        elif kind == "quadratic":
            objective = Quadratic(o["Q"], o.get("c"), o.get("sense", "min"))
        else:
            raise ParseError(f"unknown objective kind {kind!r}")
        b = doc.get("b", [])
        A = doc.get("A", [])
        if len(b) == 0:
            A = np.zeros((0, objective.n))
        return ConstrainedProblem(objective, ConstraintSystem(A, b), doc.get("nonneg"))
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"invalid problem document: {exc}") from exc
