"""Choosing the index split that gives the tightest refinement.

An *instance* is any callable mapping a :class:`Partition` to a
:class:`ChainReport`, typically ``functools.partial`` of a chain evaluator
with everything but the partition bound. The middle term of the report is the
quantity being optimized.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .refinements import ASCENDING, ChainReport, Partition

MINIMIZE = "minimize_middle"
MAXIMIZE = "maximize_middle"

MAX_EXHAUSTIVE_N = 20

Instance = Callable[[Partition], ChainReport]


@dataclass(frozen=True)
class PartitionObjective:
    target: str = MINIMIZE
    scalarization: str = "trace"  # trace | max_eigenvalue, for matrix-valued middles

    def __post_init__(self):
        if self.target not in (MINIMIZE, MAXIMIZE):
            raise ValueError(f"unknown objective target {self.target!r}")
        if self.scalarization not in ("trace", "max_eigenvalue"):
            raise ValueError(f"unknown scalarization {self.scalarization!r}")

    @classmethod
    def for_report(cls, report: ChainReport, scalarization: str = "trace") -> "PartitionObjective":
        """Minimize for ascending chains, maximize for descending ones."""
        return cls(MINIMIZE if report.direction == ASCENDING else MAXIMIZE, scalarization)

    def score(self, report: ChainReport) -> float:
        value = report.middle
        if np.ndim(value) == 0:
            return float(value)
        if self.scalarization == "trace":
            return float(np.trace(value).real)
        return float(np.linalg.eigvalsh(value)[-1])

    def better(self, a: float, b: float) -> bool:
        """Strictly better, so ties keep the incumbent."""
        return a < b if self.target == MINIMIZE else a > b


def canonical_partitions(n: int):
    """One representative per ``{J, J^c}`` class, each containing index 0, in lexicographic order."""
    rest = range(1, n)
    reps = []
    for k in range(0, n - 1):
        for combo in itertools.combinations(rest, k):
            reps.append((0,) + combo)
    for J in sorted(reps):
        yield Partition(n, J)


@dataclass(frozen=True)
class SearchResult:
    partition: Partition
    value: float
    table: tuple = ()  # ((J, value), ...)
    evaluations: int = 0

    def to_dict(self) -> dict:
        return {
            "J": list(self.partition.J),
            "value": self.value,
            "evaluations": self.evaluations,
            "table": [{"J": list(J), "middle_value": v} for J, v in self.table],
        }


def exhaustive_best_partition(instance: Instance, n: int, objective: PartitionObjective) -> SearchResult:
    """Global optimum over all ``2^(n-1) - 1`` partition classes."""
    if n > MAX_EXHAUSTIVE_N:
        raise ValueError(f"n={n} exceeds {MAX_EXHAUSTIVE_N} for exhaustive search; use greedy_partition")
    table = []
    best = None
    for p in canonical_partitions(n):
        value = objective.score(instance(p))
        table.append((p.J, value))
        if best is None or objective.better(value, best[1]):
            best = (p, value)
    return SearchResult(best[0], best[1], tuple(table), len(table))


def greedy_partition(instance: Instance, n: int, objective: PartitionObjective) -> SearchResult:
    """Local search from the best singleton, moving one index per step."""
    if n < 3:
        raise ValueError("greedy search needs n >= 3")
    evaluations = 0
    cache = {}

    def score(J):
        nonlocal evaluations
        key = Partition(n, J).canonical().J
        if key not in cache:
            cache[key] = objective.score(instance(Partition(n, key)))
            evaluations += 1
        return cache[key]

    current, value = None, None
    for i in range(n):
        v = score((i,))
        if current is None or objective.better(v, value):
            current, value = frozenset((i,)), v
    while True:
        step = None
        for i in range(n):
            moved = current ^ {i}
            if not moved or len(moved) == n:
                continue
            v = score(tuple(sorted(moved)))
            if objective.better(v, value if step is None else step[1]):
                step = (moved, v)
        if step is None:
            break
        current, value = step
    return SearchResult(Partition(n, tuple(sorted(current))).canonical(), value, (), evaluations)
