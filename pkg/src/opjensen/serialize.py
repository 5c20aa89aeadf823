"""Matrix and vector encoding for case files and reports.

Complex entries are written as ``[re, im]`` pairs, row-major. Python's float
repr round-trips exactly through JSON, so decoded cases replay bit for bit.
"""

from __future__ import annotations

import json

import numpy as np


def encode_matrix(a) -> list:
    a = np.asarray(a, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def decode_matrix(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 2:  # real-only shorthand
        return arr.astype(complex)
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise ValueError(f"matrix must be nested [re, im] pairs, got array of shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def encode_vector(x) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(x, dtype=complex)]


def decode_vector(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 1:
        return arr.astype(complex)
    if arr.ndim != 2 or arr.shape[-1] != 2:
        raise ValueError(f"vector must be a list of [re, im] pairs, got array of shape {arr.shape}")
    return arr[:, 0] + 1j * arr[:, 1]


def encode_value(v):
    """Scalars stay floats; matrices become nested pairs."""
    if np.ndim(v) == 0:
        return float(np.real(v))
    return encode_matrix(v)


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, allow_nan=True) + "\n"
