"""Catalogue of real functions with their convexity and monotonicity facts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

# Slack for eigensolver noise at domain endpoints.
ENDPOINT_TOL = 1e-12

CONVEX = "convex"
CONCAVE = "concave"
OPERATOR_CONVEX = "operator_convex"
OPERATOR_CONCAVE = "operator_concave"
# The next two are meant on the domain intersected with [0, inf): the
# operator-norm chain only ever evaluates f at norms of positive matrices.
NONNEGATIVE = "nonnegative"
INCREASING = "increasing"


@dataclass(frozen=True)
class Interval:
    lo: float = -math.inf
    hi: float = math.inf
    lo_closed: bool = False
    hi_closed: bool = False

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"empty interval: lo={self.lo}, hi={self.hi}")
        if math.isinf(self.lo) and self.lo_closed or math.isinf(self.hi) and self.hi_closed:
            raise ValueError("infinite endpoints cannot be closed")

    @property
    def finite(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    def contains(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        lower = t >= self.lo - ENDPOINT_TOL if self.lo_closed else t >= self.lo + ENDPOINT_TOL
        upper = t <= self.hi + ENDPOINT_TOL if self.hi_closed else t <= self.hi - ENDPOINT_TOL
        if math.isinf(self.lo):
            lower = np.ones_like(t, dtype=bool)
        if math.isinf(self.hi):
            upper = np.ones_like(t, dtype=bool)
        return lower & upper

    def clip(self, t) -> np.ndarray:
        """Snap values that sit within tolerance outside a closed endpoint."""
        return np.clip(t, self.lo, self.hi)

    def __str__(self):
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{self.lo:g}, {self.hi:g}{right}"

    def to_dict(self) -> dict:
        return {"lo": _enc(self.lo), "hi": _enc(self.hi), "lo_closed": self.lo_closed, "hi_closed": self.hi_closed}

    @classmethod
    def from_dict(cls, data) -> "Interval":
        if isinstance(data, (list, tuple)):
            return cls(float(data[0]), float(data[1]))
        return cls(float(data["lo"]), float(data["hi"]), bool(data.get("lo_closed", False)), bool(data.get("hi_closed", False)))


def _enc(v: float):
    return v if math.isfinite(v) else ("inf" if v > 0 else "-inf")


REAL_LINE = Interval()
POSITIVE = Interval(0.0, math.inf)
NONNEGATIVE_LINE = Interval(0.0, math.inf, lo_closed=True)


@dataclass(frozen=True)
class ScalarFunction:
    """A vectorized real function with a domain and a set of catalogue flags.

    ``params`` holds the constructor arguments so the function can be
    serialized as ``{"id": ..., **params}`` and rebuilt with :func:`from_dict`.
    """

    id: str
    eval: Callable[[np.ndarray], np.ndarray] = field(compare=False, repr=False)
    domain: Interval
    flags: frozenset = frozenset()
    params: tuple = ()

    def __call__(self, t):
        return self.eval(np.asarray(t, dtype=float))

    def has(self, flag: str) -> bool:
        return flag in self.flags

    @property
    def affine(self) -> bool:
        return CONVEX in self.flags and CONCAVE in self.flags

    def to_dict(self) -> dict:
        return {"id": self.id, **dict(self.params)}


def square() -> ScalarFunction:
    return ScalarFunction(
        "square", np.square, REAL_LINE,
        frozenset({CONVEX, OPERATOR_CONVEX, NONNEGATIVE, INCREASING}),
    )


def identity() -> ScalarFunction:
    return ScalarFunction(
        "identity", lambda t: t + 0.0, REAL_LINE,
        frozenset({CONVEX, CONCAVE, OPERATOR_CONVEX, OPERATOR_CONCAVE, NONNEGATIVE, INCREASING}),
    )


def constant(c: float = 1.0) -> ScalarFunction:
    c = float(c)
    flags = {CONVEX, CONCAVE, OPERATOR_CONVEX, OPERATOR_CONCAVE}
    if c >= 0:
        flags.add(NONNEGATIVE)
    return ScalarFunction("constant", lambda t: np.full_like(t, c), REAL_LINE, frozenset(flags), (("c", c),))


def exp() -> ScalarFunction:
    # convex but not operator convex
    return ScalarFunction("exp", np.exp, REAL_LINE, frozenset({CONVEX, NONNEGATIVE, INCREASING}))


def log() -> ScalarFunction:
    return ScalarFunction("log", np.log, POSITIVE, frozenset({CONCAVE, OPERATOR_CONCAVE}))


def neg_log() -> ScalarFunction:
    return ScalarFunction("neg_log", lambda t: -np.log(t), POSITIVE, frozenset({CONVEX, OPERATOR_CONVEX}))


def sqrt() -> ScalarFunction:
    return ScalarFunction(
        "sqrt", np.sqrt, NONNEGATIVE_LINE,
        frozenset({CONCAVE, OPERATOR_CONCAVE, NONNEGATIVE, INCREASING}),
    )


def power(r: float) -> ScalarFunction:
    """``t^r`` on ``[0, inf)`` for ``r > 0`` and on ``(0, inf)`` otherwise."""
    r = float(r)
    flags = {NONNEGATIVE}
    if r <= 0 or r >= 1:
        flags.add(CONVEX)
    if 0 <= r <= 1:
        flags.add(CONCAVE)
    if -1 <= r <= 0 or 1 <= r <= 2:
        flags.add(OPERATOR_CONVEX)
    if 0 <= r <= 1:
        flags.add(OPERATOR_CONCAVE)
    if r >= 0:
        flags.add(INCREASING)
    domain = NONNEGATIVE_LINE if r > 0 else POSITIVE
    return ScalarFunction("power", lambda t: np.power(t, r), domain, frozenset(flags), (("r", r),))


def inverse() -> ScalarFunction:
    f = power(-1.0)
    return ScalarFunction("inverse", lambda t: 1.0 / t, f.domain, f.flags)


CATALOGUE = {
    "square": square,
    "identity": identity,
    "constant": constant,
    "exp": exp,
    "log": log,
    "neg_log": neg_log,
    "sqrt": sqrt,
    "power": power,
    "inverse": inverse,
}


def from_dict(data) -> ScalarFunction:
    """Build a catalogued function from ``"square"`` or ``{"id": "power", "r": 1.5}``."""
    if isinstance(data, str):
        data = {"id": data}
    data = dict(data)
    name = data.pop("id")
    try:
        factory = CATALOGUE[name]
    except KeyError:
        raise ValueError(f"unknown function {name!r}; known: {sorted(CATALOGUE)}") from None
    return factory(**data)
