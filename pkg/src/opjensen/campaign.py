"""Seeded verification campaigns over random chain instances.

Each trial turns ``(seed, index)`` into one or more case records (see
:mod:`opjensen.cases`) and evaluates them. Reports are assembled in trial-index
order, so the output file is byte-identical for any worker count.
"""

from __future__ import annotations

import functools
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import functions as fn
from . import randgen
from .cases import CHAINS, CaseError, evaluate_case, load_case
from .hermitian import NormSpec, ToleranceConfig
from .means import mean_from_dict
from .partition_search import PartitionObjective, exhaustive_best_partition, greedy_partition
from .refinements import PRINTED_FULL_SUMS, PROOF_PARTIAL_SUMS, ChainError, Partition
from .serialize import dumps, encode_matrix, encode_vector

WORKERS_ENV = "OPJENSEN_WORKERS"

FAMILIES = ("jensen", "agh", "operator_norm", "cdj", "ui_norm", "mean_subadditivity", "holder", "perspective")
POSITIVE_FAMILIES = ("agh", "operator_norm", "ui_norm", "mean_subadditivity", "holder", "perspective")
UI_MODES = ("maps", "plain", "weighted")

DEFAULT_FUNCTIONS = {
    "jensen": ["square", "exp", "inverse", "sqrt", "log"],
    "operator_norm": ["square", {"id": "power", "r": 3.0}, "sqrt"],
    "cdj": ["square", "inverse", {"id": "power", "r": 1.5}, {"id": "power", "r": 0.5}],
    "perspective": ["square", "inverse"],
}


class ConfigError(ValueError):
    pass


def _int_range(value, name, minimum):
    if isinstance(value, int):
        value = [value, value]
    try:
        lo, hi = (int(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be an integer or [lo, hi]") from None
    if lo < minimum or hi < lo:
        raise ConfigError(f"{name} range [{lo}, {hi}] is empty or below {minimum}")
    return lo, hi


def _choices(data, key, default):
    values = data.get(key, default)
    if not isinstance(values, list) or not values:
        raise ConfigError(f"{key} must be a non-empty list")
    return values


@dataclass(frozen=True)
class CampaignConfig:
    chain: str
    trials: int
    seed: int = 0
    dim: tuple = (1, 4)
    n: tuple = (2, 5)
    functions: tuple = ()
    means: tuple = ()
    maps: tuple = ("pinching", "isometry_conjugation", "unitary_mixture")
    r_values: tuple = (1.0, 1.5, 2.0)
    v_range: tuple = (0.0, 1.0)
    norms: tuple = ()
    ui_modes: tuple = UI_MODES
    variants: tuple = (PROOF_PARTIAL_SUMS, PRINTED_FULL_SUMS)
    partition_policy: str = "random"
    spectrum: tuple | None = None
    cases: tuple = ()
    tolerance: ToleranceConfig = field(default_factory=ToleranceConfig)
    max_exemplars: int = 10
    record_trials: bool = True
    output: str | None = None

    @classmethod
    def from_dict(cls, data: dict, base_dir: Path | None = None) -> "CampaignConfig":
        if not isinstance(data, dict):
            raise ConfigError("campaign config must be a JSON object")
        chain = data.get("chain")
        if chain not in FAMILIES:
            raise ConfigError(f"chain must be one of {FAMILIES}, got {chain!r}")
        trials = data.get("trials")
        if not isinstance(trials, int) or trials < 1:
            raise ConfigError(f"trials must be an integer >= 1, got {trials!r}")
        seed = data.get("seed", 0)
        if not isinstance(seed, int) or not 0 <= seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
        dim = _int_range(data.get("dim", [1, 4]), "dim", 1)
        n = _int_range(data.get("n", [2, 5]), "n", 2)

        functions = tuple(_choices(data, "functions", DEFAULT_FUNCTIONS.get(chain, ["square"])))
        for f in functions:
            try:
                fn.from_dict(f)
            except (TypeError, ValueError, KeyError) as exc:
                raise ConfigError(f"bad function {f!r}: {exc}") from None
        means = tuple(_choices(data, "means", ["arithmetic", "harmonic", {"id": "geometric"}]))
        for m in means:
            spec = {"id": m} if isinstance(m, str) else dict(m)
            if spec.get("id") not in ("arithmetic", "harmonic", "geometric"):
                raise ConfigError(f"bad mean {m!r}")
            if "v" in spec:
                mean_from_dict(spec)
        maps = tuple(_choices(data, "maps", list(cls.maps)))
        for k in maps:
            if k not in randgen.MAP_KINDS:
                raise ConfigError(f"unknown map kind {k!r}")
        r_values = tuple(float(r) for r in _choices(data, "r_values", list(cls.r_values)))
        if any(not r >= 1 for r in r_values):
            raise ConfigError("every r must be >= 1")
        v_range = tuple(float(v) for v in data.get("v_range", [0.0, 1.0]))
        if len(v_range) != 2 or not 0 <= v_range[0] <= v_range[1] <= 1:
            raise ConfigError(f"v_range must satisfy 0 <= lo <= hi <= 1, got {v_range}")
        norms_raw = _choices(data, "norms", [{"kind": "schatten", "p": "inf"}])
        try:
            norms = tuple(NormSpec.from_dict(x) for x in norms_raw)
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"bad norm: {exc}") from None
        for x in norms:
            if x.kind == "ky_fan" and chain == "ui_norm" and x.k > dim[0]:
                raise ConfigError(f"ky_fan k={x.k} exceeds the smallest dimension {dim[0]}")
        ui_modes = tuple(_choices(data, "ui_modes", list(UI_MODES)))
        if any(m not in UI_MODES for m in ui_modes):
            raise ConfigError(f"ui_modes must be drawn from {UI_MODES}")
        variants = tuple(_choices(data, "variants", [PROOF_PARTIAL_SUMS, PRINTED_FULL_SUMS]))
        if any(v not in (PROOF_PARTIAL_SUMS, PRINTED_FULL_SUMS) for v in variants):
            raise ConfigError(f"unknown operator-norm variant in {variants}")
        policy = data.get("partition_policy", "random")
        if policy not in ("random", "exhaustive", "greedy"):
            raise ConfigError(f"partition_policy must be random, exhaustive or greedy, got {policy!r}")
        if policy == "greedy" and n[0] < 3:
            raise ConfigError("greedy partition policy needs n >= 3")
        spectrum = data.get("spectrum")
        if spectrum is not None:
            try:
                interval = fn.Interval.from_dict(spectrum)
            except (TypeError, ValueError, KeyError) as exc:
                raise ConfigError(f"bad spectrum: {exc}") from None
            if not interval.finite:
                raise ConfigError("spectrum must be a finite interval")
            spectrum = (interval.lo, interval.hi)
        cases = []
        if not isinstance(data.get("cases", []), list):
            raise ConfigError("cases must be a list of case records or paths")
        for c in data.get("cases", []):
            if isinstance(c, str):
                path = Path(c) if base_dir is None or Path(c).is_absolute() else base_dir / c
                try:
                    c = load_case(path)
                except (OSError, CaseError) as exc:
                    raise ConfigError(f"cannot load case {path}: {exc}") from None
            cases.append(c)
        try:
            tol = ToleranceConfig.from_dict(data.get("tolerance"))
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        return cls(
            chain=chain, trials=trials, seed=seed, dim=dim, n=n, functions=functions, means=means, maps=maps,
            r_values=r_values, v_range=v_range, norms=norms, ui_modes=ui_modes, variants=variants,
            partition_policy=policy, spectrum=spectrum, cases=tuple(cases), tolerance=tol,
            max_exemplars=int(data.get("max_exemplars", 10)), record_trials=bool(data.get("record_trials", True)),
            output=data.get("output"),
        )

    def to_dict(self) -> dict:
        return {
            "chain": self.chain, "trials": self.trials, "seed": self.seed, "dim": list(self.dim), "n": list(self.n),
            "functions": list(self.functions), "means": list(self.means), "maps": list(self.maps),
            "r_values": list(self.r_values), "v_range": list(self.v_range),
            "norms": [x.to_dict() for x in self.norms], "ui_modes": list(self.ui_modes),
            "variants": list(self.variants), "partition_policy": self.partition_policy,
            "spectrum": None if self.spectrum is None else list(self.spectrum),
            "cases": list(self.cases), "tolerance": self.tolerance.to_dict(),
            "max_exemplars": self.max_exemplars, "record_trials": self.record_trials,
        }


# ---------------------------------------------------------------------------
# trial generation
# ---------------------------------------------------------------------------

def _spectrum_for(config: CampaignConfig, f: fn.ScalarFunction | None) -> fn.Interval:
    if config.spectrum is not None:
        return fn.Interval(*config.spectrum)
    if config.chain in POSITIVE_FAMILIES:
        return fn.Interval(0.1, 4.0)
    if f is not None and np.isfinite(f.domain.lo):
        return fn.Interval(f.domain.lo + 0.1, f.domain.lo + 4.0)
    return fn.Interval(-2.0, 2.0)


def _pick(rng, options):
    return options[int(rng.integers(len(options)))]


def _sample_maps(config: CampaignConfig, n: int, dim: int, rng, min_out: int = 1) -> list:
    kinds = [_pick(rng, config.maps) for _ in range(n)]
    if all(k == "isometry_conjugation" for k in kinds):
        dim_out = int(rng.integers(min(min_out, dim), dim + 1))
    else:
        dim_out = dim
    return [randgen.sample_unital_map(k, dim, dim_out, rng).to_dict() for k in kinds]


def _choose_partition(config: CampaignConfig, case: dict, n: int, rng) -> list:
    if config.partition_policy == "random":
        return list(randgen.sample_partition(n, rng).J)

    def instance(p: Partition):
        return evaluate_case({**case, "partition": list(p.J)}, config.tolerance)

    objective = PartitionObjective.for_report(instance(Partition(n, (0,))))
    search = exhaustive_best_partition if config.partition_policy == "exhaustive" else greedy_partition
    if n < 3:
        search = exhaustive_best_partition
    return list(search(instance, n, objective).partition.J)


def _function_tag(f: fn.ScalarFunction) -> str:
    if not f.params:
        return f.id
    return f"{f.id}({','.join(f'{v:g}' for _, v in f.params)})"


def generate_cases(config: CampaignConfig, index: int) -> list[tuple[str, dict]]:
    """The tagged case records for one trial, a pure function of ``(seed, index)``."""
    rng = randgen.trial_rng(config.seed, index)
    dim = int(rng.integers(config.dim[0], config.dim[1] + 1))
    n = int(rng.integers(config.n[0], config.n[1] + 1))
    chain = config.chain
    base = {"tolerance": config.tolerance.to_dict()}

    f_spec = _pick(rng, config.functions) if chain in ("jensen", "operator_norm", "cdj", "perspective") else None
    f = fn.from_dict(f_spec) if f_spec is not None else None
    if f is not None:
        base["function"] = f.to_dict()
    spectrum = _spectrum_for(config, f)
    w = randgen.sample_weights(n, rng)
    base["weights"] = [float(x) for x in w]

    if chain == "agh":
        base["a"] = [float(x) for x in randgen.sample_spectrum(n, spectrum, rng)]
        base["partition"] = list(randgen.sample_partition(n, rng).J)
        return [("agh_1", {**base, "chain": "agh_1"}), ("agh_2", {**base, "chain": "agh_2"})]

    base["A"] = [encode_matrix(randgen.sample_hermitian(dim, spectrum, rng)) for _ in range(n)]
    if chain in ("mean_subadditivity", "holder", "perspective"):
        base["B"] = [encode_matrix(randgen.sample_hermitian(dim, spectrum, rng)) for _ in range(n)]

    fid = None if f is None else _function_tag(f)
    if chain == "jensen":
        base.update(chain="jensen", x=encode_vector(randgen.sample_unit_vector(dim, rng)))
        variants = [(fid, base)]
    elif chain == "operator_norm":
        base["chain"] = "operator_norm"
        variants = [(f"{v}/{fid}", {**base, "variant": v}) for v in config.variants]
    elif chain == "cdj":
        base.update(chain="cdj", maps=_sample_maps(config, n, dim, rng))
        variants = [(fid, base)]
    elif chain == "perspective":
        base.update(chain="perspective", maps=_sample_maps(config, n, dim, rng))
        variants = [(fid, base)]
    elif chain == "mean_subadditivity":
        spec = _pick(rng, config.means)
        spec = {"id": spec} if isinstance(spec, str) else dict(spec)
        if spec["id"] == "geometric" and "v" not in spec:
            spec["v"] = float(rng.uniform(*config.v_range))
        base.update(chain="mean_subadditivity", mean=spec, maps=_sample_maps(config, n, dim, rng))
        variants = [(spec["id"], base)]
    elif chain == "holder":
        base.update(chain="holder", v=float(rng.uniform(*config.v_range)))
        variants = [("holder", base)]
    else:  # ui_norm
        norm = _pick(rng, config.norms)
        base.update(chain="ui_norm", r=float(_pick(rng, config.r_values)), norm=norm.to_dict())
        min_out = norm.k if norm.kind == "ky_fan" else 1
        variants = []
        for mode in config.ui_modes:
            if mode == "maps":
                variants.append(("maps", {**base, "maps": _sample_maps(config, n, dim, rng, min_out)}))
            else:
                family = randgen.sample_contraction_family(n, dim, mode, rng, w=w)
                variants.append((mode, {**base, "contractions": family.to_dict()}))

    # Partition is chosen on the first variant and shared, so variants stay comparable.
    partition = _choose_partition(config, variants[0][1], n, rng)
    return [(tag, {**case, "partition": partition}) for tag, case in variants]


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------

@dataclass
class Outcome:
    index: int | str
    tag: str
    case: dict
    report: dict | None
    error: str | None = None


def run_trial(config: CampaignConfig, index: int) -> list[Outcome]:
    out = []
    for tag, case in generate_cases(config, index):
        try:
            report = evaluate_case(case, config.tolerance)
            out.append(Outcome(index, tag, case, report.to_dict()))
        except (ChainError, ValueError, ArithmeticError) as exc:
            out.append(Outcome(index, tag, case, None, f"{type(exc).__name__}: {exc}"))
    return out


def _run_chunk(config: CampaignConfig, indices: list[int]) -> list[Outcome]:
    return [o for i in indices for o in run_trial(config, i)]


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def _quantiles(values: list[float]) -> dict:
    arr = np.asarray(values, dtype=float)
    qs = np.quantile(arr, [0.0, 0.01, 0.1, 0.5, 0.9, 1.0])
    return dict(zip(["min", "p01", "p10", "median", "p90", "max"], (float(q) for q in qs)))


@dataclass
class CampaignReport:
    config: CampaignConfig
    outcomes: list
    wall_time: float = 0.0

    @property
    def asserted_violations(self) -> list[Outcome]:
        return [o for o in self.outcomes if o.report and any(
            l["verdict"] == "violated" and l["asserted"] for l in o.report["links"])]

    @property
    def unasserted_violations(self) -> list[Outcome]:
        return [o for o in self.outcomes if o.report and any(
            l["verdict"] == "violated" and not l["asserted"] for l in o.report["links"])]

    @property
    def errors(self) -> list[Outcome]:
        return [o for o in self.outcomes if o.error is not None]

    @property
    def exit_code(self) -> int:
        return 1 if self.asserted_violations or self.errors else 0

    def statistics(self) -> dict:
        """Per tag and link: evaluation and violation counts and margin quantiles."""
        groups: dict = {}
        for o in self.outcomes:
            if o.report is None:
                continue
            for k, link in enumerate(o.report["links"]):
                g = groups.setdefault(f"{o.tag}/link{k + 1}", {"asserted": link["asserted"], "margins": [], "violations": 0})
                g["margins"].append(link["margin"])
                g["violations"] += link["verdict"] == "violated"
        return {
            key: {
                "asserted": g["asserted"],
                "evaluated": len(g["margins"]),
                "violations": g["violations"],
                "violation_rate": g["violations"] / len(g["margins"]),
                "margin": _quantiles(g["margins"]),
            }
            for key, g in sorted(groups.items())
        }

    def _exemplars(self, outcomes: list[Outcome]) -> list:
        return [
            {"trial": o.index, "tag": o.tag, "case": o.case, "report": o.report}
            for o in [o for o in outcomes if isinstance(o.index, str)]
            + [o for o in outcomes if not isinstance(o.index, str)][: self.config.max_exemplars]
        ]

    def to_dict(self, include_wall_time: bool = False) -> dict:
        out = {
            "config": self.config.to_dict(),
            "trials": self.config.trials,
            "evaluations": len(self.outcomes),
            "asserted_violations": len(self.asserted_violations),
            "unasserted_violations": len(self.unasserted_violations),
            "errors": [{"trial": o.index, "tag": o.tag, "error": o.error, "case": o.case} for o in self.errors],
            "statistics": self.statistics(),
            "exemplars": {
                "asserted": self._exemplars(self.asserted_violations),
                "not_asserted": self._exemplars(self.unasserted_violations),
            },
        }
        if self.config.record_trials:
            out["per_trial"] = [
                {
                    "trial": o.index,
                    "tag": o.tag,
                    "pass": o.report["pass"] if o.report else False,
                    "margins": [l["margin"] for l in o.report["links"]] if o.report else None,
                }
                for o in self.outcomes
            ]
        if include_wall_time:
            out["wall_time"] = self.wall_time
        return out

    def dumps(self, include_wall_time: bool = False) -> str:
        return dumps(self.to_dict(include_wall_time))


def run_campaign(config: CampaignConfig, workers: int | None = None) -> CampaignReport:
    """Run ``config.trials`` random trials plus any listed cases."""
    start = time.perf_counter()
    workers = worker_count() if workers is None else max(1, workers)
    indices = list(range(config.trials))
    if workers == 1:
        outcomes = _run_chunk(config, indices)
    else:
        chunks = [indices[k::workers] for k in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(functools.partial(_run_chunk, config), chunks)
            outcomes = [o for part in parts for o in part]
        outcomes.sort(key=lambda o: o.index)
    for k, case in enumerate(config.cases):
        tag = f"case{k}"
        try:
            outcomes.append(Outcome(f"case{k}", tag, case, evaluate_case(case, config.tolerance).to_dict()))
        except (ChainError, ValueError, ArithmeticError) as exc:
            outcomes.append(Outcome(f"case{k}", tag, case, None, f"{type(exc).__name__}: {exc}"))
    return CampaignReport(config, outcomes, time.perf_counter() - start)


def load_config(path, overrides: dict | None = None) -> CampaignConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError("campaign config must be a JSON object")
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return CampaignConfig.from_dict(data, base_dir=path.parent)
