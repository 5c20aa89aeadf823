"""Seeded samplers for every instance ingredient.

Each trial draws from its own generator derived from ``(campaign seed, trial
index)`` only, so results do not depend on evaluation order or worker count.
"""

from __future__ import annotations

import numpy as np

from .functions import Interval
from .hermitian import hermitian, unit_vector
from .linear_maps import ContractionFamily, IdentityMap, IsometryConjugation, Pinching, UnitaryMixture
from .refinements import Partition

MIN_WEIGHT = 1e-6
MAP_KINDS = ("identity", "isometry_conjugation", "pinching", "unitary_mixture")


def trial_rng(seed: int, index: int) -> np.random.Generator:
    if not (0 <= seed < 2**64 and 0 <= index < 2**64):
        raise ValueError("seed and trial index must be unsigned 64-bit integers")
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def ginibre(shape, rng) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def haar_unitary(dim: int, rng) -> np.ndarray:
    q, r = np.linalg.qr(ginibre((dim, dim), rng))
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_isometry(rows: int, cols: int, rng) -> np.ndarray:
    """``rows x cols`` matrix with orthonormal columns (``rows >= cols``)."""
    if cols > rows:
        raise ValueError(f"isometry needs rows >= cols, got {rows}x{cols}")
    q, r = np.linalg.qr(ginibre((rows, cols), rng))
    d = np.diag(r)
    return q * (d / np.abs(d))


def sample_spectrum(dim: int, spectrum: Interval, rng) -> np.ndarray:
    if not spectrum.finite:
        raise ValueError(f"spectrum interval must be finite, got {spectrum}")
    lam = rng.uniform(spectrum.lo, spectrum.hi, size=dim)
    while np.any(lam <= spectrum.lo):
        lam = np.where(lam <= spectrum.lo, rng.uniform(spectrum.lo, spectrum.hi, size=dim), lam)
    return lam


def sample_hermitian(dim: int, spectrum: Interval, rng) -> np.ndarray:
    """Haar-rotated matrix with i.i.d. uniform eigenvalues inside ``spectrum``."""
    lam = sample_spectrum(dim, spectrum, rng)
    u = haar_unitary(dim, rng)
    a = hermitian((u * lam) @ u.conj().T)
    got = np.linalg.eigvalsh(a)
    inner = Interval(spectrum.lo, spectrum.hi, True, True)
    if not np.all(inner.contains(got)):
        raise AssertionError(f"sampled spectrum {got} escaped {spectrum}")
    return a


def sample_weights(n: int, rng) -> np.ndarray:
    """Dirichlet(1, ..., 1) weights with every entry at least ``MIN_WEIGHT``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    while True:
        e = rng.exponential(size=n)
        w = e / e.sum()
        if np.all(w >= MIN_WEIGHT):
            return w


def sample_unit_vector(dim: int, rng) -> np.ndarray:
    x = ginibre(dim, rng)
    return unit_vector(x / np.linalg.norm(x))


def sample_partition(n: int, rng) -> Partition:
    """Uniform over nonempty proper subsets of ``range(n)``."""
    while True:
        mask = rng.integers(0, 2, size=n).astype(bool)
        if 0 < mask.sum() < n:
            return Partition(n, tuple(np.flatnonzero(mask)))


def sample_blocks(dim: int, rng) -> tuple:
    perm = rng.permutation(dim)
    cuts = np.flatnonzero(rng.integers(0, 2, size=dim - 1)) + 1
    return tuple(tuple(sorted(int(i) for i in b)) for b in np.split(perm, cuts))


def sample_unital_map(kind: str, dim_in: int, dim_out: int | None, rng):
    dim_out = dim_in if dim_out is None else dim_out
    if kind == "isometry_conjugation":
        return IsometryConjugation(random_isometry(dim_in, dim_out, rng))
    if dim_out != dim_in:
        raise ValueError(f"{kind} maps need equal input and output dimensions, got {dim_in} -> {dim_out}")
    if kind == "identity":
        return IdentityMap(dim_in)
    if kind == "pinching":
        return Pinching(dim_in, sample_blocks(dim_in, rng))
    if kind == "unitary_mixture":
        k = int(rng.integers(1, 4))
        return UnitaryMixture([haar_unitary(dim_in, rng) for _ in range(k)], sample_weights(k, rng))
    raise ValueError(f"unknown map kind {kind!r}; known: {MAP_KINDS}")


def sample_contraction_family(n: int, dim: int, mode: str, rng, w=None) -> ContractionFamily:
    """Slice an ``(n dim) x dim`` isometry into ``n`` square blocks.

    In weighted mode the isometry is ``[sqrt(w_1) U_1; ...; sqrt(w_n) U_n]`` with
    Haar unitaries ``U_i``, and each block is rescaled by ``w_i^{-1/2}``. That is
    the only way contractions can satisfy ``sum w_i X_i^* X_i = I`` when the
    weights sum to one.
    """
    if mode == "plain":
        v = random_isometry(n * dim, dim, rng)
        return ContractionFamily([v[i * dim:(i + 1) * dim] for i in range(n)], "plain")
    if mode == "weighted":
        if w is None:
            raise ValueError("weighted contraction families need weights")
        w = np.asarray(w, dtype=float)
        v = np.vstack([np.sqrt(wi) * haar_unitary(dim, rng) for wi in w])
        blocks = [v[i * dim:(i + 1) * dim] / np.sqrt(w[i]) for i in range(n)]
        return ContractionFamily(blocks, "weighted", tuple(w))
    raise ValueError(f"unknown contraction mode {mode!r}")
