"""Kubo-Ando operator means, the weighted geometric mean and operator perspectives."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import functions as fn
from .functions import ScalarFunction
from .hermitian import PositivityError, apply_function, hermitian, spectral_decompose


@dataclass(frozen=True)
class OperatorMean:
    """An operator mean given by its representing function ``f`` (``f(1) = 1``)."""

    id: str
    rep: ScalarFunction
    v: float | None = None

    def __post_init__(self):
        one = float(self.rep(np.array(1.0)))
        if abs(one - 1.0) > 1e-12:
            raise ValueError(f"representing function of {self.id} must satisfy f(1) = 1, got {one}")

    def to_dict(self) -> dict:
        return {"id": self.id} if self.v is None else {"id": self.id, "v": self.v}

    def __str__(self):
        return self.id if self.v is None else f"{self.id}_{self.v:g}"


def arithmetic() -> OperatorMean:
    rep = fn.ScalarFunction("arithmetic_rep", lambda t: (1 + t) / 2, fn.POSITIVE, frozenset({fn.INCREASING}))
    return OperatorMean("arithmetic", rep)


def harmonic() -> OperatorMean:
    rep = fn.ScalarFunction("harmonic_rep", lambda t: 2 * t / (1 + t), fn.POSITIVE, frozenset({fn.INCREASING}))
    return OperatorMean("harmonic", rep)


def geometric(v: float = 0.5) -> OperatorMean:
    v = float(v)
    if not 0 <= v <= 1:
        raise ValueError(f"weight v must lie in [0, 1], got {v}")
    rep = fn.ScalarFunction("geometric_rep", lambda t: np.power(t, v), fn.POSITIVE, frozenset({fn.INCREASING}))
    return OperatorMean("geometric", rep, v)


MEANS = {"arithmetic": arithmetic, "harmonic": harmonic, "geometric": geometric}


def mean_from_dict(data) -> OperatorMean:
    if isinstance(data, str):
        data = {"id": data}
    data = dict(data)
    name = data.pop("id")
    if name not in MEANS:
        raise ValueError(f"unknown operator mean {name!r}; known: {sorted(MEANS)}")
    return MEANS[name](**data)


def _sqrt_and_inv_sqrt(a: np.ndarray, name: str):
    lam, vec = spectral_decompose(a, name)
    floor = 1e-12 * max(1.0, float(np.max(np.abs(lam))))
    if lam[0] <= floor:
        raise PositivityError(f"{name} is not strictly positive (lambda_min = {lam[0]:.3e})")
    root = np.sqrt(lam)
    return (vec * root) @ vec.conj().T, (vec / root) @ vec.conj().T


def _congruence(f: ScalarFunction, a: np.ndarray, b: np.ndarray, name: str) -> np.ndarray:
    """``A^{1/2} f(A^{-1/2} B A^{-1/2}) A^{1/2}``."""
    half, inv_half = _sqrt_and_inv_sqrt(a, name)
    inner = hermitian(inv_half @ b @ inv_half)
    return hermitian(half @ apply_function(f, inner, name=f"A^(-1/2) B A^(-1/2) in {name}") @ half)


def kubo_ando_mean(sigma: OperatorMean, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _sqrt_and_inv_sqrt(b, f"right argument of {sigma}")
    return _congruence(sigma.rep, a, b, f"left argument of {sigma}")


def weighted_geometric(a: np.ndarray, b: np.ndarray, v: float) -> np.ndarray:
    """``A #_v B``; ``v = 1/2`` is the ordinary matrix geometric mean."""
    return kubo_ando_mean(geometric(v), a, b)


def perspective(f: ScalarFunction, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Operator perspective ``P_f(A | B)``; ``A`` must be strictly positive."""
    return _congruence(f, a, b, f"perspective of {f.id}")
