"""Refined Jensen-type inequality chains evaluated as explicit term lists.

Every chain evaluator returns a :class:`ChainReport` holding three (or five)
terms in their claimed order together with a verdict and signed margin per
link. Nothing here presumes an inequality is true: each link is computed and
may come out violated. Whether a violated link counts against the artifact is
recorded per link in ``Link.asserted``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import functions as fn
from .functions import ScalarFunction
from .hermitian import (
    DEFAULT_TOL,
    OPERATOR_NORM,
    NormSpec,
    Order,
    PositivityError,
    ToleranceConfig,
    apply_function,
    hermitian,
    loewner_compare,
    loewner_margin,
    op_norm,
    power,
    quadratic_form,
    require_strictly_positive,
    ui_norm,
    unit_vector,
)
from .linear_maps import ContractionFamily, IdentityMap, PositiveUnitalMap
from .means import OperatorMean, geometric, kubo_ando_mean, perspective
from .serialize import encode_value

ASCENDING = "ascending"
DESCENDING = "descending"

PROOF_PARTIAL_SUMS = "proof_partial_sums"
PRINTED_FULL_SUMS = "printed_full_sums"


class ChainError(ValueError):
    """The inputs do not satisfy the hypotheses a chain evaluator requires."""


# ---------------------------------------------------------------------------
# inputs
# ---------------------------------------------------------------------------

def normalize_weights(w, n: int | None = None) -> np.ndarray:
    """Positive weights rescaled to sum to one."""
    w = np.array(w, dtype=float).ravel()
    if w.size < 1 or (n is not None and w.size != n):
        raise ChainError(f"expected {n} weights, got {w.size}")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise ChainError(f"weights must be finite and strictly positive, got {w.tolist()}")
    w = w / w.sum()
    w.setflags(write=False)
    return w


@dataclass(frozen=True)
class Partition:
    """A nonempty proper index subset ``J`` of ``range(n)`` (0-based)."""

    n: int
    J: tuple

    def __post_init__(self):
        members = tuple(sorted({int(i) for i in self.J}))
        if len(members) != len(tuple(self.J)):
            raise ChainError(f"partition indices must be distinct, got {self.J}")
        if any(i < 0 or i >= self.n for i in members):
            raise ChainError(f"partition indices must lie in range({self.n}), got {self.J}")
        if not members or len(members) == self.n:
            raise ChainError(f"J must be a nonempty proper subset of range({self.n}), got {list(members)}")
        object.__setattr__(self, "J", members)

    @property
    def complement(self) -> tuple:
        return tuple(i for i in range(self.n) if i not in self.J)

    def swapped(self) -> "Partition":
        return Partition(self.n, self.complement)

    def canonical(self) -> "Partition":
        """The representative of ``{J, J^c}`` that contains index 0."""
        return self if 0 in self.J else self.swapped()

    def omegas(self, w: np.ndarray) -> tuple[float, float]:
        omega_j = float(np.sum(w[list(self.J)]))
        return omega_j, 1.0 - omega_j

    def blocks(self):
        return self.J, self.complement


def as_operators(mats: Sequence, name: str = "A", min_count: int = 2) -> tuple:
    ops = tuple(hermitian(m, name=f"{name}[{i}]") for i, m in enumerate(mats))
    if len(ops) < min_count:
        raise ChainError(f"{name} needs at least {min_count} operators, got {len(ops)}")
    if len({m.shape for m in ops}) != 1:
        raise ChainError(f"{name} operators have unequal dimensions: {[m.shape for m in ops]}")
    return ops


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Term:
    label: str
    value: object  # float or Hermitian ndarray


@dataclass(frozen=True)
class Link:
    index: int
    source: str
    target: str
    holds: bool
    margin: float
    threshold: float
    asserted: bool
    relation: str | None = None

    def to_dict(self) -> dict:
        out = {
            "from": self.source,
            "to": self.target,
            "verdict": "holds" if self.holds else "violated",
            "margin": self.margin,
            "threshold": self.threshold,
            "asserted": self.asserted,
        }
        if self.relation is not None:
            out["relation"] = self.relation
        return out


@dataclass(frozen=True)
class ChainReport:
    chain: str
    terms: tuple
    mode: str  # scalar | loewner | norm
    direction: str
    links: tuple
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        """All asserted links hold."""
        return all(l.holds for l in self.links if l.asserted)

    @property
    def values(self) -> list:
        return [t.value for t in self.terms]

    @property
    def middle(self):
        return self.terms[len(self.terms) // 2].value

    def violations(self, asserted: bool | None = None) -> list:
        return [l for l in self.links if not l.holds and (asserted is None or l.asserted == asserted)]

    def to_dict(self) -> dict:
        return {
            "chain": self.chain,
            "mode": self.mode,
            "direction": self.direction,
            "terms": [{"label": t.label, "value": encode_value(t.value)} for t in self.terms],
            "links": [l.to_dict() for l in self.links],
            "pass": self.passed,
            **({"meta": self.meta} if self.meta else {}),
        }

    def table(self) -> str:
        """Human-readable term and link listing."""
        rows = [f"chain {self.chain} ({self.mode}, {self.direction})"]
        for i, t in enumerate(self.terms):
            if np.ndim(t.value) == 0:
                shown = f"{float(t.value):.10g}"
            else:
                lam = np.linalg.eigvalsh(t.value)
                shown = f"matrix {t.value.shape[0]}x{t.value.shape[0]}, spectrum [{lam[0]:.6g}, {lam[-1]:.6g}]"
            rows.append(f"  T{i} {t.label:<28s} {shown}")
        sym = "<=" if self.direction == ASCENDING else ">="
        for l in self.links:
            tag = "holds" if l.holds else "VIOLATED"
            extra = "" if l.asserted else " (not asserted)"
            rows.append(f"  link {l.index + 1}: {l.source} {sym} {l.target}: {tag}, margin {l.margin:+.6e}{extra}")
        rows.append(f"  result: {'pass' if self.passed else 'FAIL'}")
        return "\n".join(rows)


def _link(i: int, a: Term, b: Term, mode: str, direction: str, tol: ToleranceConfig, asserted: bool) -> Link:
    lo, hi = (a.value, b.value) if direction == ASCENDING else (b.value, a.value)
    if mode == "loewner":
        margin = loewner_margin(lo, hi)
        threshold = tol.threshold(op_norm(lo), op_norm(hi))
        relation = loewner_compare(a.value, b.value, tol).value
    else:
        lo, hi = float(lo), float(hi)
        margin = 0.0 if lo == hi else hi - lo  # inf == inf counts as equal, not nan
        threshold = tol.threshold(*(abs(v) for v in (lo, hi) if np.isfinite(v)))
        relation = None
    return Link(i, a.label, b.label, bool(margin >= -threshold), float(margin), float(threshold), asserted, relation)


def build_report(chain, terms, mode, direction, tol=DEFAULT_TOL, asserted=None, meta=None) -> ChainReport:
    terms = tuple(terms)
    if len(terms) < 2:
        raise ChainError("a chain needs at least two terms")
    if asserted is None:
        asserted = (True,) * (len(terms) - 1)
    links = tuple(
        _link(i, terms[i], terms[i + 1], mode, direction, tol, bool(asserted[i])) for i in range(len(terms) - 1)
    )
    return ChainReport(chain, terms, mode, direction, links, dict(meta or {}))


@dataclass(frozen=True)
class ChainCheck:
    passed: bool
    worst: Link


def check_chain(report: ChainReport, tol: ToleranceConfig | None = None, asserted_only: bool = False) -> ChainCheck:
    """Re-derive every link verdict and return the most violated link.

    ``passed`` is true iff every considered link follows the declared
    direction. The worst link is the one with the smallest margin.
    """
    if tol is not None:
        report = build_report(
            report.chain, report.terms, report.mode, report.direction, tol, [l.asserted for l in report.links]
        )
    links = [l for l in report.links if l.asserted or not asserted_only] or list(report.links)
    worst = min(links, key=lambda l: l.margin + l.threshold)
    return ChainCheck(all(l.holds for l in links), worst)


def _direction(f: ScalarFunction, convex: str, concave: str, what: str) -> str:
    if f.has(convex):
        return ASCENDING
    if f.has(concave):
        return DESCENDING
    raise ChainError(f"{what} needs f flagged {convex} or {concave}; {f.id} has {sorted(f.flags)}")


def _split(values, w, partition: Partition):
    """Block sums ``sum_{i in J} w_i v_i`` and ``sum_{i in J^c} w_i v_i``."""
    j, jc = partition.blocks()
    return sum(w[i] * values[i] for i in j), sum(w[i] * values[i] for i in jc)


def _check_partition(partition: Partition, n: int) -> Partition:
    if partition.n != n:
        raise ChainError(f"partition is over {partition.n} indices but {n} operators were given")
    return partition


# ---------------------------------------------------------------------------
# vector-state chain and scalar corollaries
# ---------------------------------------------------------------------------

def psi(f: ScalarFunction, values, w, partition: Partition) -> float:
    """Two-block refinement ``omega_J f(mean_J) + omega_Jc f(mean_Jc)`` of scalar values."""
    values = np.asarray(values, dtype=float)
    oj, oc = partition.omegas(w)
    sj, sc = _split(values, w, partition)
    return float(oj * f(sj / oj) + oc * f(sc / oc))


def jensen_functional_chain(
    f: ScalarFunction, A, w, x, partition: Partition, tol: ToleranceConfig = DEFAULT_TOL
) -> ChainReport:
    """``f(sum w_i <A_i x,x>) <= Psi <= sum w_i <f(A_i) x,x>``, reversed for concave ``f``."""
    direction = _direction(f, fn.CONVEX, fn.CONCAVE, "jensen_functional_chain")
    ops = as_operators(A)
    w = normalize_weights(w, len(ops))
    _check_partition(partition, len(ops))
    x = unit_vector(x)
    fa = [apply_function(f, a, name=f"A[{i}]") for i, a in enumerate(ops)]
    q = np.array([quadratic_form(a, x) for a in ops])
    first = float(f(np.dot(w, q)))
    middle = psi(f, q, w, partition)
    last = float(np.dot(w, [quadratic_form(b, x) for b in fa]))
    terms = [Term("f(sum w<Ax,x>)", first), Term("Psi", middle), Term("sum w<f(A)x,x>", last)]
    return build_report("jensen", terms, "scalar", direction, tol)


def agh_scalar_chains(a, w, partition: Partition, tol: ToleranceConfig = DEFAULT_TOL) -> tuple[ChainReport, ChainReport]:
    """The two five-term harmonic <= geometric <= arithmetic mean refinements."""
    a = np.asarray(a, dtype=float).ravel()
    if np.any(a <= 0):
        raise ChainError(f"all a_i must be positive, got {a.tolist()}")
    w = normalize_weights(w, a.size)
    _check_partition(partition, a.size)
    oj, oc = partition.omegas(w)
    j, jc = (list(b) for b in partition.blocks())

    hm = 1.0 / np.dot(w, 1.0 / a)
    gm = float(np.prod(a ** w))
    am = float(np.dot(w, a))

    inv_mean_j = np.dot(w[j], 1.0 / a[j]) / oj
    inv_mean_c = np.dot(w[jc], 1.0 / a[jc]) / oc
    split_hm = inv_mean_j ** -oj * inv_mean_c ** -oc
    split_am = (np.dot(w[j], a[j]) / oj) ** oj * (np.dot(w[jc], a[jc]) / oc) ** oc

    gm_j = np.prod(a[j] ** (w[j] / oj))
    gm_c = np.prod(a[jc] ** (w[jc] / oc))
    split_gm_inv = 1.0 / (oj / gm_j + oc / gm_c)
    split_gm = oj * gm_j + oc * gm_c

    first = [Term("HM", hm), Term("split HM (product)", split_hm), Term("GM", gm),
             Term("split AM (product)", split_am), Term("AM", am)]
    second = [Term("HM", hm), Term("split GM (inverted)", split_gm_inv), Term("GM", gm),
              Term("split GM (sum)", split_gm), Term("AM", am)]
    return (
        build_report("agh_1", [Term(t.label, float(t.value)) for t in first], "scalar", ASCENDING, tol),
        build_report("agh_2", [Term(t.label, float(t.value)) for t in second], "scalar", ASCENDING, tol),
    )


def operator_norm_chain(
    f: ScalarFunction,
    A,
    w,
    partition: Partition,
    variant: str = PROOF_PARTIAL_SUMS,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> ChainReport:
    """``f(||sum w A||) <= split middle <= ||sum w f(A)||`` in the operator norm.

    ``variant`` selects the middle term: block sums over ``J`` and ``J^c``
    (``proof_partial_sums``) or the full sum inside both norms
    (``printed_full_sums``). Only the first link for convex ``f`` is
    asserted; the second link and the concave reversal are reported only.
    """
    if variant not in (PROOF_PARTIAL_SUMS, PRINTED_FULL_SUMS):
        raise ChainError(f"unknown variant {variant!r}")
    if not (f.has(fn.NONNEGATIVE) and f.has(fn.INCREASING)):
        raise ChainError(f"operator_norm_chain needs a non-negative increasing f, {f.id} has {sorted(f.flags)}")
    direction = _direction(f, fn.CONVEX, fn.CONCAVE, "operator_norm_chain")
    ops = as_operators(A)
    w = normalize_weights(w, len(ops))
    _check_partition(partition, len(ops))
    for i, a in enumerate(ops):
        lam = np.linalg.eigvalsh(a)[0]
        if lam < -1e-12 * max(1.0, op_norm(a)):
            raise PositivityError(f"A[{i}] is not positive (lambda_min = {lam:.3e})")

    total = sum(wi * a for wi, a in zip(w, ops))
    oj, oc = partition.omegas(w)
    if variant == PROOF_PARTIAL_SUMS:
        sj, sc = _split(ops, w, partition)
        nj, nc = op_norm(sj), op_norm(sc)
    else:
        nj = nc = op_norm(total)
    first = float(f(op_norm(total)))
    middle = float(oj * f(nj / oj) + oc * f(nc / oc))
    last = op_norm(sum(wi * apply_function(f, a, name=f"A[{i}]") for i, (wi, a) in enumerate(zip(w, ops))))
    terms = [Term("f(||sum wA||)", first), Term(f"split middle [{variant}]", middle), Term("||sum w f(A)||", last)]
    asserted = (direction == ASCENDING, False)
    return build_report("operator_norm", terms, "norm", direction, tol, asserted, {"variant": variant})


# ---------------------------------------------------------------------------
# map-based chains
# ---------------------------------------------------------------------------

def _resolve_maps(phis, ops, name="maps") -> tuple:
    d = ops[0].shape[0]
    if phis is None:
        return tuple(IdentityMap(d) for _ in ops)
    phis = tuple(phis)
    if len(phis) != len(ops):
        raise ChainError(f"need one map per operator: {len(phis)} maps for {len(ops)} operators")
    if len({p.output_dim for p in phis}) != 1:
        raise ChainError(f"{name} have differing output dimensions")
    for i, p in enumerate(phis):
        if p.input_dim != d:
            raise ChainError(f"{name}[{i}] expects dimension {p.input_dim}, operators have {d}")
        err = p.unitality_error()
        if err > 1e-10:
            raise ChainError(f"{name}[{i}] ({p.kind}) is not unital: max |Phi(I) - I| = {err:.3e}")
    return phis


def cdj_map_chain(
    f: ScalarFunction, A, phis, w, partition: Partition, tol: ToleranceConfig = DEFAULT_TOL
) -> ChainReport:
    """``f(sum w Phi(A)) <= Delta <= sum w Phi(f(A))``; reversed for operator concave ``f``.

    Mere convexity is rejected: the chain needs operator convexity.
    """
    direction = _direction(f, fn.OPERATOR_CONVEX, fn.OPERATOR_CONCAVE, "cdj_map_chain")
    ops = as_operators(A)
    w = normalize_weights(w, len(ops))
    _check_partition(partition, len(ops))
    phis = _resolve_maps(phis, ops)
    mapped = [p(a) for p, a in zip(phis, ops)]
    oj, oc = partition.omegas(w)
    sj, sc = _split(mapped, w, partition)
    first = apply_function(f, hermitian(sj + sc), name="sum w Phi(A)")
    delta = hermitian(oj * apply_function(f, hermitian(sj / oj), name="J block")
                      + oc * apply_function(f, hermitian(sc / oc), name="J^c block"))
    last = hermitian(sum(wi * p(apply_function(f, a, name=f"A[{i}]"))
                         for i, (wi, p, a) in enumerate(zip(w, phis, ops))))
    terms = [Term("f(sum w Phi(A))", first), Term("Delta", delta), Term("sum w Phi(f(A))", last)]
    return build_report("cdj", terms, "loewner", direction, tol)


def ui_norm_chain(
    A,
    maps,
    w,
    partition: Partition,
    r: float,
    norm: NormSpec = OPERATOR_NORM,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> ChainReport:
    """Unitarily invariant norm chain for ``r >= 1``.

    ``maps`` is a sequence of unital maps, ``None`` for identities, or a
    :class:`ContractionFamily` whose members act as ``X -> X_i^* X X_i``.
    Links are asserted except for plain-mode contraction families.
    """
    if not r >= 1:
        raise ChainError(f"r must be >= 1, got {r}")
    ops = as_operators(A)
    w = normalize_weights(w, len(ops))
    _check_partition(partition, len(ops))
    for i, a in enumerate(ops):
        require_strictly_positive(a, f"A[{i}]")
    if isinstance(maps, ContractionFamily):
        if len(maps.matrices) != len(ops):
            raise ChainError(f"need one contraction per operator, got {len(maps.matrices)}")
        maps.check()
        apply = [lambda a, i=i: maps.conjugate(i, a) for i in range(len(ops))]
        asserted = maps.mode == "weighted"
        meta = {"contraction_mode": maps.mode}
    else:
        phis = _resolve_maps(maps, ops)
        apply = list(phis)
        asserted = True
        meta = {}
    meta.update({"r": float(r), "norm": norm.to_dict()})

    mapped = [hermitian(m(a)) for m, a in zip(apply, ops)]
    mapped_pow = [hermitian(m(power(a, r, f"A[{i}]"))) for i, (m, a) in enumerate(zip(apply, ops))]
    oj, oc = partition.omegas(w)
    mj, mc = (s / o for s, o in zip(_split(mapped_pow, w, partition), (oj, oc)))
    inner = hermitian(oj * power(hermitian(mj), 1 / r, "M_J") + oc * power(hermitian(mc), 1 / r, "M_Jc"))
    first = ui_norm(power(hermitian(sum(wi * m for wi, m in zip(w, mapped))), r, "sum w Phi(A)"), norm)
    middle = ui_norm(power(inner, r, "middle"), norm)
    last = ui_norm(hermitian(sum(wi * m for wi, m in zip(w, mapped_pow))), norm)
    terms = [Term("|||(sum w Phi(A))^r|||", first), Term("|||(split)^r|||", middle), Term("|||sum w Phi(A^r)|||", last)]
    return build_report("ui_norm", terms, "norm", ASCENDING, tol, (asserted, asserted), meta)


def mean_subadditivity_chain(
    sigma: OperatorMean, A, B, phis, w, partition: Partition, tol: ToleranceConfig = DEFAULT_TOL
) -> ChainReport:
    """``sum w Phi(A sigma B) <= sum over blocks of (block A) sigma (block B) <= (sum A) sigma (sum B)``."""
    a_ops = as_operators(A, "A")
    b_ops = as_operators(B, "B")
    if len(a_ops) != len(b_ops) or a_ops[0].shape != b_ops[0].shape:
        raise ChainError("A and B tuples must have equal length and dimension")
    w = normalize_weights(w, len(a_ops))
    _check_partition(partition, len(a_ops))
    phis = _resolve_maps(phis, a_ops)
    first = hermitian(sum(wi * p(kubo_ando_mean(sigma, a, b)) for wi, p, a, b in zip(w, phis, a_ops, b_ops)))
    pa = [p(a) for p, a in zip(phis, a_ops)]
    pb = [p(b) for p, b in zip(phis, b_ops)]
    aj, ac = _split(pa, w, partition)
    bj, bc = _split(pb, w, partition)
    middle = hermitian(kubo_ando_mean(sigma, hermitian(aj), hermitian(bj))
                       + kubo_ando_mean(sigma, hermitian(ac), hermitian(bc)))
    last = kubo_ando_mean(sigma, hermitian(aj + ac), hermitian(bj + bc))
    terms = [Term("sum w Phi(A sigma B)", first), Term("split means", middle), Term("(sum A) sigma (sum B)", last)]
    return build_report("mean_subadditivity", terms, "loewner", ASCENDING, tol, meta={"mean": sigma.to_dict()})


def holder_chain(A, B, w, partition: Partition, v: float, tol: ToleranceConfig = DEFAULT_TOL) -> ChainReport:
    """Weighted geometric mean (Hoelder) refinement with identity maps; ``v = 1/2`` is the Cauchy case."""
    report = mean_subadditivity_chain(geometric(v), A, B, None, w, partition, tol)
    return ChainReport("holder", report.terms, report.mode, report.direction, report.links, {"v": float(v)})


def perspective_chain(
    f: ScalarFunction, A, B, phis, w, partition: Partition, tol: ToleranceConfig = DEFAULT_TOL
) -> ChainReport:
    """Jointly convex perspective chain for operator convex ``f``."""
    if not f.has(fn.OPERATOR_CONVEX):
        raise ChainError(f"perspective_chain needs an operator convex f, {f.id} has {sorted(f.flags)}")
    a_ops = as_operators(A, "A")
    b_ops = as_operators(B, "B")
    if len(a_ops) != len(b_ops) or a_ops[0].shape != b_ops[0].shape:
        raise ChainError("A and B tuples must have equal length and dimension")
    w = normalize_weights(w, len(a_ops))
    _check_partition(partition, len(a_ops))
    phis = _resolve_maps(phis, a_ops)
    pa = [p(a) for p, a in zip(phis, a_ops)]
    pb = [p(b) for p, b in zip(phis, b_ops)]
    oj, oc = partition.omegas(w)
    aj, ac = _split(pa, w, partition)
    bj, bc = _split(pb, w, partition)
    first = perspective(f, hermitian(aj + ac), hermitian(bj + bc))
    middle = hermitian(oj * perspective(f, hermitian(aj / oj), hermitian(bj / oj))
                       + oc * perspective(f, hermitian(ac / oc), hermitian(bc / oc)))
    last = hermitian(sum(wi * p(perspective(f, a, b)) for wi, p, a, b in zip(w, phis, a_ops, b_ops)))
    terms = [Term("P_f(sum Phi(A) | sum Phi(B))", first), Term("split perspectives", middle),
             Term("sum w Phi(P_f(A|B))", last)]
    return build_report("perspective", terms, "loewner", ASCENDING, tol)
