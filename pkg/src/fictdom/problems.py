"""Built-in manufactured problems and the problem configuration record."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .geometry import PolygonBoundary

MULTIPLIER_SPACES = ("fine", "macro")


@dataclass(frozen=True)
class Problem:
    """Data of a Poisson problem on a polygon embedded in the box ``[-a, 1+a]^2``.

    Callables take coordinate arrays ``x, y`` of equal shape.  ``lam`` is the
    exact multiplier on the boundary, ``None`` meaning identically zero.
    """

    name: str
    a: float
    gamma: PolygonBoundary
    f: Callable
    g: Callable
    u: Callable
    grad_u: Callable
    lam: Optional[Callable] = None

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        return (-self.a, 1.0 + self.a, -self.a, 1.0 + self.a)


def paper_problem(a: float = 0.5) -> Problem:
    """Unit square in ``[-a, 1+a]^2`` with ``u = (x+a)(1+a-x)(y+a)(1+a-y)``.

    ``u`` vanishes on the box boundary and is smooth across the unit square,
    so the exact multiplier (the normal-derivative jump) is zero.
    """
    if not a > 0:
        raise ValueError(f"box margin a must be positive, got {a!r}")

    def X(t):
        return (t + a) * (1.0 + a - t)

    def dX(t):
        return 1.0 - 2.0 * t

    def u(x, y):
        return X(x) * X(y)

    def grad_u(x, y):
        return np.stack([dX(x) * X(y), X(x) * dX(y)], axis=-1)

    def f(x, y):
        return 2.0 * (X(x) + X(y))

    square = PolygonBoundary.from_points([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
    return Problem("paper", float(a), square, f, u, u, grad_u, None)


PROBLEMS: dict[str, Callable[[float], Problem]] = {"paper": paper_problem}


def get_problem(problem_id: str, a: float) -> Problem:
    try:
        factory = PROBLEMS[problem_id]
    except KeyError:
        raise ValueError(f"unknown problem_id {problem_id!r}; known: {sorted(PROBLEMS)}") from None
    return factory(a)


@dataclass(frozen=True)
class ProblemSpec:
    a: float = 0.5
    n: int = 16
    c_s: float = 0.1
    multiplier_space: str = "fine"
    kmin: float = 3.0
    kmax: float = 6.0
    problem_id: str = "paper"
    h_ref: Optional[float] = None  # None: largest fine edge length

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not self.a > 0:
            raise ValueError(f"a must be positive, got {self.a!r}")
        if not self.c_s >= 0:
            raise ValueError(f"c_s must be non-negative, got {self.c_s!r}")
        if self.multiplier_space not in MULTIPLIER_SPACES:
            raise ValueError(f"multiplier_space must be one of {MULTIPLIER_SPACES}, got {self.multiplier_space!r}")
        if not (self.kmin >= 1 and self.kmax > self.kmin):
            raise ValueError(f"need kmin >= 1 and kmax > kmin, got {self.kmin}, {self.kmax}")
        if self.h_ref is not None and not self.h_ref > 0:
            raise ValueError(f"h_ref must be positive, got {self.h_ref!r}")
        if self.problem_id not in PROBLEMS:
            raise ValueError(f"unknown problem_id {self.problem_id!r}")

    def problem(self) -> Problem:
        return get_problem(self.problem_id, self.a)
