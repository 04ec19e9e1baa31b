"""Ten 2-D global-optimization benchmarks exposed as score-maximization tasks.

Formulas and domains follow the Virtual Library of Simulation Experiments
(sfu.ca/~ssurjano). Every problem is a minimization function f; the game and
all downstream analysis work with score(x) = -f(x), so higher is better.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import OutOfBounds, UnknownProblem

Bounds = tuple[tuple[float, float], tuple[float, float]]

_TWO_PI = 2.0 * math.pi


def _ackley(x: np.ndarray) -> float:
    a, b, c = 20.0, 0.2, _TWO_PI
    d = x.size
    s1 = np.sum(x**2) / d
    s2 = np.sum(np.cos(c * x)) / d
    return float(-a * math.exp(-b * math.sqrt(s1)) - math.exp(s2) + a + math.e)


def _beale(x: np.ndarray) -> float:
    x1, x2 = x
    return float(
        (1.5 - x1 + x1 * x2) ** 2
        + (2.25 - x1 + x1 * x2**2) ** 2
        + (2.625 - x1 + x1 * x2**3) ** 2
    )


def _branin(x: np.ndarray) -> float:
    x1, x2 = x
    a = 1.0
    b = 5.1 / (4.0 * math.pi**2)
    c = 5.0 / math.pi
    r = 6.0
    s = 10.0
    t = 1.0 / (8.0 * math.pi)
    return float(a * (x2 - b * x1**2 + c * x1 - r) ** 2 + s * (1 - t) * math.cos(x1) + s)


def _bukin6(x: np.ndarray) -> float:
    x1, x2 = x
    return float(100.0 * math.sqrt(abs(x2 - 0.01 * x1**2)) + 0.01 * abs(x1 + 10.0))


def _goldpr(x: np.ndarray) -> float:
    x1, x2 = x
    fact1 = 1 + (x1 + x2 + 1) ** 2 * (
        19 - 14 * x1 + 3 * x1**2 - 14 * x2 + 6 * x1 * x2 + 3 * x2**2
    )
    fact2 = 30 + (2 * x1 - 3 * x2) ** 2 * (
        18 - 32 * x1 + 12 * x1**2 + 48 * x2 - 36 * x1 * x2 + 27 * x2**2
    )
    return float(fact1 * fact2)


def _griewank(x: np.ndarray) -> float:
    idx = np.arange(1, x.size + 1, dtype=float)
    return float(np.sum(x**2) / 4000.0 - np.prod(np.cos(x / np.sqrt(idx))) + 1.0)


def _levy(x: np.ndarray) -> float:
    w = 1.0 + (x - 1.0) / 4.0
    term1 = math.sin(math.pi * w[0]) ** 2
    term3 = (w[-1] - 1) ** 2 * (1 + math.sin(_TWO_PI * w[-1]) ** 2)
    mid = w[:-1]
    term2 = np.sum((mid - 1) ** 2 * (1 + 10 * np.sin(math.pi * mid + 1) ** 2))
    return float(term1 + term2 + term3)


def _rastr(x: np.ndarray) -> float:
    return float(10.0 * x.size + np.sum(x**2 - 10.0 * np.cos(_TWO_PI * x)))


def _schwef(x: np.ndarray) -> float:
    return float(418.9829 * x.size - np.sum(x * np.sin(np.sqrt(np.abs(x)))))


def _stybtang(x: np.ndarray) -> float:
    return float(0.5 * np.sum(x**4 - 16.0 * x**2 + 5.0 * x))


@dataclass(frozen=True)
class TestProblem:
    """A 2-D benchmark played as a maximization game, score(x) = -f(x)."""

    id: str
    bounds: Bounds
    minimizer: tuple[float, float]
    f: Callable[[np.ndarray], float] = field(repr=False)
    dimension: int = 2

    @property
    def known_best_score(self) -> float:
        """Score at the documented global minimizer of f."""
        return -self.f(np.asarray(self.minimizer, dtype=float))

    def contains(self, x: Sequence[float]) -> bool:
        return all(lo <= xi <= hi for xi, (lo, hi) in zip(x, self.bounds))


_PROBLEMS: tuple[TestProblem, ...] = (
    TestProblem("ackley", ((-32.768, 32.768), (-32.768, 32.768)), (0.0, 0.0), _ackley),
    TestProblem("beale", ((-4.5, 4.5), (-4.5, 4.5)), (3.0, 0.5), _beale),
    TestProblem("branin", ((-5.0, 10.0), (0.0, 15.0)), (math.pi, 2.275), _branin),
    TestProblem("bukin6", ((-15.0, -5.0), (-3.0, 3.0)), (-10.0, 1.0), _bukin6),
    TestProblem("goldpr", ((-2.0, 2.0), (-2.0, 2.0)), (0.0, -1.0), _goldpr),
    TestProblem("griewank", ((-600.0, 600.0), (-600.0, 600.0)), (0.0, 0.0), _griewank),
    TestProblem("levy", ((-10.0, 10.0), (-10.0, 10.0)), (1.0, 1.0), _levy),
    TestProblem("rastr", ((-5.12, 5.12), (-5.12, 5.12)), (0.0, 0.0), _rastr),
    TestProblem("schwef", ((-500.0, 500.0), (-500.0, 500.0)), (420.9687, 420.9687), _schwef),
    TestProblem("stybtang", ((-5.0, 5.0), (-5.0, 5.0)), (-2.903534, -2.903534), _stybtang),
)

PROBLEM_IDS: tuple[str, ...] = tuple(p.id for p in _PROBLEMS)

_BY_ID = {p.id: p for p in _PROBLEMS}


def list_problems() -> list[TestProblem]:
    """All ten problems, in canonical (alphabetical) order."""
    return list(_PROBLEMS)


def get_problem(problem_id: str) -> TestProblem:
    try:
        return _BY_ID[problem_id]
    except KeyError:
        raise UnknownProblem(f"no such problem: {problem_id!r}") from None


def score(problem: TestProblem, x: Sequence[float]) -> float:
    """Evaluate -f(x); raises OutOfBounds instead of clamping."""
    xa = np.asarray(x, dtype=float)
    if xa.shape != (problem.dimension,):
        raise OutOfBounds(f"{problem.id}: expected {problem.dimension} coordinates, got shape {xa.shape}")
    for i, (lo, hi) in enumerate(problem.bounds):
        if not lo <= xa[i] <= hi:
            raise OutOfBounds(f"{problem.id}: coordinate {i} = {xa[i]} outside [{lo}, {hi}]")
    return -problem.f(xa)
