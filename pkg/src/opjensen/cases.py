"""Case records: a complete, replayable description of one chain evaluation.

A case is a JSON object such as::

    {"chain": "jensen", "function": {"id": "square"},
     "A": [[[[1, 0]]], [[[2, 0]]], [[[4, 0]]]], "weights": [1, 1, 1],
     "x": [[1, 0]], "partition": [0]}

Matrices are nested ``[re, im]`` pairs (a plain real nested list is also
accepted) and ``partition`` lists the 0-based indices in ``J``. Campaigns
generate their trials as cases and evaluate them through :func:`evaluate_case`,
so any recorded case replays to the identical report.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import functions as fn
from .hermitian import NormSpec, ToleranceConfig, hermitian
from .linear_maps import ContractionFamily, map_from_dict
from .means import mean_from_dict
from .refinements import (
    PROOF_PARTIAL_SUMS,
    ChainReport,
    Partition,
    agh_scalar_chains,
    cdj_map_chain,
    holder_chain,
    jensen_functional_chain,
    mean_subadditivity_chain,
    operator_norm_chain,
    perspective_chain,
    ui_norm_chain,
)
from .serialize import decode_matrix, decode_vector

CHAINS = (
    "jensen", "agh_1", "agh_2", "operator_norm", "cdj",
    "ui_norm", "mean_subadditivity", "holder", "perspective",
)


class CaseError(ValueError):
    """A case record is malformed; ``location`` names the offending field."""

    def __init__(self, location: str, message: str):
        super().__init__(f"{location}: {message}")
        self.location = location


def _require(case: dict, key: str):
    if key not in case:
        raise CaseError(key, "missing required field")
    return case[key]


def _matrices(case: dict, key: str, strict: bool) -> list:
    raw = _require(case, key)
    if not isinstance(raw, list) or not raw:
        raise CaseError(key, "expected a non-empty list of matrices")
    out = []
    for i, m in enumerate(raw):
        try:
            out.append(hermitian(decode_matrix(m), strict=strict, name=f"{key}[{i}]"))
        except ValueError as exc:
            raise CaseError(f"{key}[{i}]", str(exc)) from None
    return out


def _maps(case: dict, n: int):
    raw = case.get("maps")
    if raw is None:
        return None
    if len(raw) != n:
        raise CaseError("maps", f"expected {n} map descriptors, got {len(raw)}")
    try:
        return [map_from_dict(m) for m in raw]
    except (KeyError, ValueError, TypeError) as exc:
        raise CaseError("maps", str(exc)) from None


def _partition(case: dict, n: int) -> Partition:
    raw = _require(case, "partition")
    try:
        return Partition(n, tuple(int(i) for i in raw))
    except (TypeError, ValueError) as exc:
        raise CaseError("partition", str(exc)) from None


def _weights(case: dict, n: int):
    w = case.get("weights")
    if w is None:
        return np.full(n, 1.0 / n)
    if len(w) != n:
        raise CaseError("weights", f"expected {n} weights, got {len(w)}")
    return w


def _function(case: dict):
    try:
        return fn.from_dict(_require(case, "function"))
    except (TypeError, ValueError) as exc:
        raise CaseError("function", str(exc)) from None


def evaluate_case(case: dict, tol: ToleranceConfig | None = None, strict: bool | None = None) -> ChainReport:
    """Evaluate one case record. ``tol`` and ``strict`` override the record's own."""
    chain = _require(case, "chain")
    if chain not in CHAINS:
        raise CaseError("chain", f"unknown chain {chain!r}; known: {', '.join(CHAINS)}")
    strict = bool(case.get("strict", False)) if strict is None else strict
    try:
        tol = tol or ToleranceConfig.from_dict(case.get("tolerance"))
    except (TypeError, ValueError) as exc:
        raise CaseError("tolerance", str(exc)) from None

    if chain in ("agh_1", "agh_2"):
        a = np.asarray(_require(case, "a"), dtype=float)
        p = _partition(case, a.size)
        first, second = agh_scalar_chains(a, _weights(case, a.size), p, tol)
        return first if chain == "agh_1" else second

    A = _matrices(case, "A", strict)
    n = len(A)
    w = _weights(case, n)
    p = _partition(case, n)

    if chain == "jensen":
        x = decode_vector(_require(case, "x"))
        return jensen_functional_chain(_function(case), A, w, x, p, tol)
    if chain == "operator_norm":
        return operator_norm_chain(_function(case), A, w, p, case.get("variant", PROOF_PARTIAL_SUMS), tol)
    if chain == "cdj":
        return cdj_map_chain(_function(case), A, _maps(case, n), w, p, tol)
    if chain == "ui_norm":
        if "contractions" in case:
            try:
                maps = ContractionFamily.from_dict(case["contractions"])
            except (KeyError, ValueError) as exc:
                raise CaseError("contractions", str(exc)) from None
        else:
            maps = _maps(case, n)
        norm = NormSpec.from_dict(case.get("norm", {"kind": "schatten", "p": "inf"}))
        return ui_norm_chain(A, maps, w, p, float(_require(case, "r")), norm, tol)

    B = _matrices(case, "B", strict)
    if len(B) != n:
        raise CaseError("B", f"expected {n} matrices to pair with A, got {len(B)}")
    if chain == "mean_subadditivity":
        try:
            sigma = mean_from_dict(_require(case, "mean"))
        except (TypeError, ValueError) as exc:
            raise CaseError("mean", str(exc)) from None
        return mean_subadditivity_chain(sigma, A, B, _maps(case, n), w, p, tol)
    if chain == "holder":
        return holder_chain(A, B, w, p, float(_require(case, "v")), tol)
    return perspective_chain(_function(case), A, B, _maps(case, n), w, p, tol)


def load_case(path) -> dict:
    text = Path(path).read_text()
    try:
        case = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CaseError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from None
    if not isinstance(case, dict):
        raise CaseError(str(path), "case file must contain a JSON object")
    return case
