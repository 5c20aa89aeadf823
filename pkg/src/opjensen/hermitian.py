"""Hermitian matrix arithmetic, functional calculus and the Loewner order.

Matrices are plain complex ``numpy`` arrays. :func:`hermitian` is the single
entry point that symmetrizes and freezes them, so code downstream of it never
re-checks Hermiticity.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .functions import ScalarFunction


class SpectralError(ArithmeticError):
    """The eigensolver failed to converge."""


class DomainError(ValueError):
    """A spectrum falls outside the domain of a scalar function."""


class PositivityError(ValueError):
    """A matrix expected to be (strictly) positive is not."""


@dataclass(frozen=True)
class ToleranceConfig:
    """Relative and absolute slack used by every order comparison."""

    rel: float = 1e-8
    abs: float = 1e-10

    def __post_init__(self):
        if not (self.rel > 0 and self.abs > 0):
            raise ValueError(f"tolerances must be strictly positive, got rel={self.rel}, abs={self.abs}")

    def threshold(self, *scales: float) -> float:
        return self.abs + self.rel * max((1.0, *scales))

    def scaled(self, factor: float) -> "ToleranceConfig":
        return ToleranceConfig(self.rel * factor, self.abs * factor)

    def to_dict(self) -> dict:
        return {"rel": self.rel, "abs": self.abs}

    @classmethod
    def from_dict(cls, data: dict | None) -> "ToleranceConfig":
        data = data or {}
        return cls(rel=float(data.get("rel", cls.rel)), abs=float(data.get("abs", cls.abs)))


DEFAULT_TOL = ToleranceConfig()


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def hermitian(a, strict: bool = False, atol: float = 1e-12, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a read-only complex Hermitian matrix.

    By default the input is replaced by its Hermitian part ``(a + a^*) / 2``.
    With ``strict=True`` an input whose anti-Hermitian part exceeds ``atol``
    (max entry modulus) raises ``ValueError`` instead of being repaired.
    """
    a = np.array(a, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    skew = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    if strict and skew > atol:
        raise ValueError(f"{name} is not Hermitian (max |a - a^*| = {skew:.3e})")
    return _freeze((a + a.conj().T) / 2)


def identity(dim: int) -> np.ndarray:
    return _freeze(np.eye(dim, dtype=complex))


def op_norm(a: np.ndarray) -> float:
    """Operator norm of a Hermitian matrix (largest absolute eigenvalue)."""
    return float(np.max(np.abs(np.linalg.eigvalsh(a))))


class SpectralDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def spectral_decompose(a: np.ndarray, name: str = "matrix") -> SpectralDecomposition:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues ascending."""
    try:
        lam, vec = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise SpectralError(f"eigensolver did not converge for {name} (shape {np.shape(a)})") from exc
    return SpectralDecomposition(lam, vec)


def _from_spectrum(vec: np.ndarray, values: np.ndarray) -> np.ndarray:
    out = (vec * values) @ vec.conj().T
    return _freeze((out + out.conj().T) / 2)


def apply_function(f: ScalarFunction, a: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Functional calculus ``f(A) = V diag(f(lambda)) V^*``.

    Raises
    ------
    DomainError
        If an eigenvalue of ``a`` lies outside ``f.domain``.
    """
    lam, vec = spectral_decompose(a, name)
    bad = lam[~f.domain.contains(lam)]
    if bad.size:
        raise DomainError(f"{name}: eigenvalue {bad[0]!r} outside domain {f.domain} of {f.id}")
    return _from_spectrum(vec, f(f.domain.clip(lam)))


def power(a: np.ndarray, r: float, name: str = "matrix") -> np.ndarray:
    """``A^r`` for positive ``A``; negative exponents need strict positivity."""
    lam, vec = spectral_decompose(a, name)
    scale = max(1.0, float(np.max(np.abs(lam))))
    floor = 1e-12 * scale
    if r < 0 and lam[0] <= floor:
        raise PositivityError(f"{name} is not strictly positive (lambda_min = {lam[0]:.3e})")
    if r >= 0 and lam[0] < -floor:
        raise PositivityError(f"{name} is not positive (lambda_min = {lam[0]:.3e})")
    return _from_spectrum(vec, np.clip(lam, 0.0, None) ** r)


def require_strictly_positive(a: np.ndarray, name: str = "matrix") -> float:
    """Return ``lambda_min(a)``, raising if it is at or below ``1e-12 max(1, ||a||)``."""
    lam = np.linalg.eigvalsh(a)
    if lam[0] <= 1e-12 * max(1.0, float(np.max(np.abs(lam)))):
        raise PositivityError(f"{name} is not strictly positive (lambda_min = {lam[0]:.3e})")
    return float(lam[0])


class Order(enum.Enum):
    LESS_EQ = "less_eq"
    GREATER_EQ = "greater_eq"
    EQUAL = "equal"
    INCOMPARABLE = "incomparable"


def loewner_margin(a: np.ndarray, b: np.ndarray) -> float:
    """Signed margin ``lambda_min(B - A)``; non-negative iff ``A <= B``."""
    if np.shape(a) != np.shape(b):
        raise ValueError(f"dimension mismatch: {np.shape(a)} vs {np.shape(b)}")
    diff = np.asarray(b) - np.asarray(a)
    return float(np.linalg.eigvalsh((diff + diff.conj().T) / 2)[0])


def loewner_compare(a: np.ndarray, b: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL) -> Order:
    if np.shape(a) != np.shape(b):
        raise ValueError(f"dimension mismatch: {np.shape(a)} vs {np.shape(b)}")
    slack = tol.threshold(op_norm(a), op_norm(b))
    diff = np.linalg.eigvalsh(np.asarray(b) - np.asarray(a))
    le = diff[0] >= -slack
    ge = -diff[-1] >= -slack
    if le and ge:
        return Order.EQUAL
    if le:
        return Order.LESS_EQ
    if ge:
        return Order.GREATER_EQ
    return Order.INCOMPARABLE


def unit_vector(x, atol: float = 1e-12) -> np.ndarray:
    x = np.array(x, dtype=complex).ravel()
    if x.size < 1:
        raise ValueError("state vector must be non-empty")
    norm = np.linalg.norm(x)
    if abs(norm - 1.0) > atol:
        raise ValueError(f"state vector must have unit norm, got {norm!r}")
    return _freeze(x)


def quadratic_form(a: np.ndarray, x: np.ndarray) -> float:
    """``<A x, x>`` for a unit vector ``x``."""
    a, x = np.asarray(a), np.asarray(x)
    if a.shape[0] != x.shape[0]:
        raise ValueError(f"dimension mismatch: matrix {a.shape}, vector {x.shape}")
    value = np.vdot(x, a @ x)
    assert abs(value.imag) <= 1e-12 * max(1.0, float(np.max(np.abs(a)))), value
    return float(value.real)


@dataclass(frozen=True)
class NormSpec:
    """A unitarily invariant norm: Schatten-``p`` or Ky Fan-``k``."""

    kind: str
    p: float = np.inf
    k: int = 1

    def __post_init__(self):
        if self.kind == "schatten":
            if not (self.p >= 1):
                raise ValueError(f"Schatten p must be >= 1 or inf, got {self.p}")
        elif self.kind == "ky_fan":
            if int(self.k) != self.k or self.k < 1:
                raise ValueError(f"Ky Fan k must be a positive integer, got {self.k}")
        else:
            raise ValueError(f"unknown norm kind {self.kind!r}")

    @classmethod
    def schatten(cls, p: float) -> "NormSpec":
        return cls("schatten", p=float(p))

    @classmethod
    def ky_fan(cls, k: int) -> "NormSpec":
        return cls("ky_fan", k=int(k))

    def __str__(self):
        return f"schatten({self.p:g})" if self.kind == "schatten" else f"ky_fan({self.k})"

    def to_dict(self) -> dict:
        if self.kind == "schatten":
            return {"kind": "schatten", "p": "inf" if np.isinf(self.p) else self.p}
        return {"kind": "ky_fan", "k": self.k}

    @classmethod
    def from_dict(cls, data: dict) -> "NormSpec":
        if data["kind"] == "schatten":
            return cls.schatten(float(data["p"]))
        return cls.ky_fan(int(data["k"]))


OPERATOR_NORM = NormSpec.schatten(np.inf)


def singular_values(x: np.ndarray) -> np.ndarray:
    """Singular values in descending order.

    Hermitian inputs use ``|lambda(X)|`` directly; anything else goes through
    the spectrum of ``X^* X``.
    """
    x = np.asarray(x, dtype=complex)
    if x.shape[0] == x.shape[1] and np.array_equal(x, x.conj().T):
        sv = np.abs(spectral_decompose(x).eigenvalues)
    else:
        gram = x.conj().T @ x
        sv = np.sqrt(np.clip(spectral_decompose((gram + gram.conj().T) / 2).eigenvalues, 0.0, None))
    return np.sort(sv)[::-1]


def ui_norm(x: np.ndarray, spec: NormSpec = OPERATOR_NORM) -> float:
    sv = singular_values(x)
    if spec.kind == "ky_fan":
        if spec.k > sv.size:
            raise ValueError(f"Ky Fan k={spec.k} exceeds matrix dimension {sv.size}")
        return float(np.sum(sv[: spec.k]))
    if np.isinf(spec.p):
        return float(sv[0])
    return float(np.sum(sv ** spec.p) ** (1.0 / spec.p))
