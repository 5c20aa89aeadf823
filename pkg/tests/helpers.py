"""Shared sampling helpers for the test modules."""

import numpy as np

from opjensen.functions import Interval
from opjensen.randgen import sample_hermitian


def random_pd(dim, rng, lo=0.1, hi=4.0):
    return sample_hermitian(dim, Interval(lo, hi), rng)


def random_herm(dim, rng, lo=-2.0, hi=2.0):
    return sample_hermitian(dim, Interval(lo, hi), rng)


def diag(*values):
    return np.diag(np.asarray(values, dtype=complex))


def seeds(n, base=0):
    return [np.random.default_rng([base, k]) for k in range(n)]
