"""Normalized positive linear maps in constructive form, plus contraction families.

Every map is built from data that makes positivity structural (conjugations,
block restrictions, convex combinations of unitary conjugations), so only
unitality ever needs a numerical check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hermitian import DEFAULT_TOL, ToleranceConfig, hermitian, op_norm
from .serialize import decode_matrix, encode_matrix


class PositiveUnitalMap:
    kind: str
    input_dim: int
    output_dim: int

    def __call__(self, a: np.ndarray) -> np.ndarray:
        a = np.asarray(a)
        if a.shape != (self.input_dim, self.input_dim):
            raise ValueError(f"{self.kind} map expects {self.input_dim}x{self.input_dim} input, got {a.shape}")
        return hermitian(self._apply(a))

    def _apply(self, a: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def unitality_error(self) -> float:
        out = self._apply(np.eye(self.input_dim, dtype=complex))
        return float(np.max(np.abs(out - np.eye(self.output_dim))))

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class IdentityMap(PositiveUnitalMap):
    dim: int
    kind: str = field(default="identity", init=False)

    @property
    def input_dim(self):
        return self.dim

    @property
    def output_dim(self):
        return self.dim

    def _apply(self, a):
        return a

    def to_dict(self):
        return {"kind": self.kind, "dim": self.dim}


@dataclass(frozen=True, eq=False)
class IsometryConjugation(PositiveUnitalMap):
    """``A -> V^* A V`` with ``V`` of shape ``(input_dim, output_dim)``."""

    v: np.ndarray
    kind: str = field(default="isometry_conjugation", init=False)

    def __post_init__(self):
        v = np.array(self.v, dtype=complex)
        if v.ndim != 2 or v.shape[1] > v.shape[0]:
            raise ValueError(f"isometry must be tall (d_in >= d_out), got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "v", v)

    @property
    def input_dim(self):
        return self.v.shape[0]

    @property
    def output_dim(self):
        return self.v.shape[1]

    def _apply(self, a):
        return self.v.conj().T @ a @ self.v

    def to_dict(self):
        return {"kind": self.kind, "v": encode_matrix(self.v)}


@dataclass(frozen=True, eq=False)
class Pinching(PositiveUnitalMap):
    """Block-diagonal restriction: entries outside the diagonal blocks are zeroed."""

    dim: int
    blocks: tuple
    kind: str = field(default="pinching", init=False)

    def __post_init__(self):
        blocks = tuple(tuple(int(i) for i in b) for b in self.blocks)
        flat = sorted(i for b in blocks for i in b)
        if flat != list(range(self.dim)) or any(len(b) == 0 for b in blocks):
            raise ValueError(f"blocks {blocks} do not partition range({self.dim})")
        object.__setattr__(self, "blocks", blocks)
        mask = np.zeros((self.dim, self.dim), dtype=bool)
        for b in blocks:
            mask[np.ix_(b, b)] = True
        object.__setattr__(self, "_mask", mask)

    @classmethod
    def diagonal(cls, dim: int) -> "Pinching":
        return cls(dim, tuple((i,) for i in range(dim)))

    @property
    def input_dim(self):
        return self.dim

    @property
    def output_dim(self):
        return self.dim

    def _apply(self, a):
        return np.where(self._mask, a, 0)

    def to_dict(self):
        return {"kind": self.kind, "dim": self.dim, "blocks": [list(b) for b in self.blocks]}


@dataclass(frozen=True, eq=False)
class UnitaryMixture(PositiveUnitalMap):
    """``A -> sum_k c_k U_k^* A U_k`` with convex weights ``c``."""

    unitaries: tuple
    weights: tuple
    kind: str = field(default="unitary_mixture", init=False)

    def __post_init__(self):
        us = tuple(np.array(u, dtype=complex) for u in self.unitaries)
        c = np.asarray(self.weights, dtype=float)
        if len(us) == 0 or len(us) != c.size:
            raise ValueError("need one weight per unitary")
        if np.any(c < 0) or abs(c.sum() - 1) > 1e-12:
            raise ValueError(f"mixture weights must be a probability vector, got {c}")
        for u in us:
            u.setflags(write=False)
        object.__setattr__(self, "unitaries", us)
        object.__setattr__(self, "weights", tuple(float(x) for x in c))

    @property
    def input_dim(self):
        return self.unitaries[0].shape[0]

    @property
    def output_dim(self):
        return self.unitaries[0].shape[0]

    def _apply(self, a):
        return sum(c * (u.conj().T @ a @ u) for c, u in zip(self.weights, self.unitaries))

    def to_dict(self):
        return {"kind": self.kind, "weights": list(self.weights), "unitaries": [encode_matrix(u) for u in self.unitaries]}


def map_from_dict(data: dict) -> PositiveUnitalMap:
    kind = data["kind"]
    if kind == "identity":
        return IdentityMap(int(data["dim"]))
    if kind == "isometry_conjugation":
        return IsometryConjugation(decode_matrix(data["v"]))
    if kind == "pinching":
        return Pinching(int(data["dim"]), data["blocks"])
    if kind == "unitary_mixture":
        return UnitaryMixture([decode_matrix(u) for u in data["unitaries"]], data["weights"])
    raise ValueError(f"unknown map kind {kind!r}")


def apply_map(phi: PositiveUnitalMap, a: np.ndarray) -> np.ndarray:
    return phi(a)


@dataclass(frozen=True)
class MapVerdict:
    passed: bool
    unitality_error: float
    worst_positivity_margin: float
    failures: tuple = ()


def verify_map(phi: PositiveUnitalMap, trials: int = 20, tol: ToleranceConfig = DEFAULT_TOL, rng=None) -> MapVerdict:
    """Check unitality once and positivity on ``trials`` random PSD inputs.

    The positivity margin is ``lambda_min(Phi(A)) / max(1, ||A||)``; a margin
    below ``-1e-10`` counts as a failure.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(rng)
    failures = []
    unital = phi.unitality_error()
    if unital > 1e-10:
        failures.append(f"unitality: max |Phi(I) - I| = {unital:.3e}")
    worst = np.inf
    d = phi.input_dim
    for t in range(trials):
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        a = hermitian(g @ g.conj().T)
        margin = float(np.linalg.eigvalsh(phi(a))[0]) / max(1.0, op_norm(a))
        worst = min(worst, margin)
        if margin < -max(1e-10, tol.abs):
            failures.append(f"positivity: trial {t} lambda_min margin {margin:.3e}")
    return MapVerdict(not failures, unital, worst, tuple(failures))


@dataclass(frozen=True, eq=False)
class ContractionFamily:
    """Square matrices ``X_i`` with ``sum X_i^* X_i = I`` (plain) or ``sum w_i X_i^* X_i = I`` (weighted)."""

    matrices: tuple
    mode: str = "plain"
    weights: tuple | None = None

    def __post_init__(self):
        xs = tuple(np.array(x, dtype=complex) for x in self.matrices)
        if self.mode not in ("plain", "weighted"):
            raise ValueError(f"unknown contraction mode {self.mode!r}")
        if self.mode == "weighted":
            if self.weights is None or len(self.weights) != len(xs):
                raise ValueError("weighted mode needs one weight per matrix")
            object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        for x in xs:
            x.setflags(write=False)
        object.__setattr__(self, "matrices", xs)

    def resolution_error(self) -> float:
        if self.mode == "plain":
            total = sum(x.conj().T @ x for x in self.matrices)
        else:
            total = sum(w * (x.conj().T @ x) for w, x in zip(self.weights, self.matrices))
        return float(np.max(np.abs(total - np.eye(total.shape[0]))))

    def max_norm(self) -> float:
        return max(float(np.linalg.norm(x, 2)) for x in self.matrices)

    def check(self, atol: float = 1e-10) -> None:
        if self.max_norm() > 1 + atol:
            raise ValueError(f"not a contraction family: max ||X_i|| = {self.max_norm():.3e}")
        err = self.resolution_error()
        if err > atol:
            raise ValueError(f"resolution of identity violated by {err:.3e} ({self.mode} mode)")

    def conjugate(self, i: int, a: np.ndarray) -> np.ndarray:
        x = self.matrices[i]
        return hermitian(x.conj().T @ a @ x)

    def to_dict(self) -> dict:
        out = {"mode": self.mode, "matrices": [encode_matrix(x) for x in self.matrices]}
        if self.weights is not None:
            out["weights"] = list(self.weights)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ContractionFamily":
        return cls([decode_matrix(x) for x in data["matrices"]], data.get("mode", "plain"), data.get("weights"))
