"""Command line interface: ``opjensen campaign | check | partition-search``.

Exit codes: 0 when every asserted link holds, 1 when one is violated, 2 for
invalid input (unparsable case or config, violated preconditions, I/O errors).
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .campaign import ConfigError, load_config, run_campaign
from .cases import CaseError, evaluate_case, load_case
from .hermitian import ToleranceConfig
from .partition_search import PartitionObjective, exhaustive_best_partition, greedy_partition
from .refinements import PRINTED_FULL_SUMS, PROOF_PARTIAL_SUMS, ChainError, Partition
from .serialize import dumps

EXIT_OK, EXIT_VIOLATION, EXIT_INVALID = 0, 1, 2


def _tolerance(args, base: dict | None) -> ToleranceConfig | None:
    if args.tol_rel is None and args.tol_abs is None:
        return None
    base = ToleranceConfig.from_dict(base)
    return ToleranceConfig(
        base.rel if args.tol_rel is None else args.tol_rel,
        base.abs if args.tol_abs is None else args.tol_abs,
    )


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _error(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_INVALID


def cmd_campaign(args) -> int:
    overrides = {"seed": args.seed, "trials": args.trials}
    if args.variant is not None:
        overrides["variants"] = [args.variant]
    try:
        config = load_config(args.config, overrides)
        tol = _tolerance(args, config.tolerance.to_dict())
        if tol is not None:
            config = dataclasses.replace(config, tolerance=tol)
        report = run_campaign(config)
        out = args.out or config.output
        _write(report.dumps(include_wall_time=args.timing), out)
    except (ConfigError, ValueError) as exc:
        return _error(f"invalid config: {exc}")
    except OSError as exc:
        return _error(str(exc))
    print(
        f"{config.chain}: {config.trials} trials, {len(report.outcomes)} evaluations, "
        f"{len(report.asserted_violations)} asserted violations, "
        f"{len(report.unasserted_violations)} non-asserted violations, "
        f"{len(report.errors)} errors, {report.wall_time:.2f} s",
        file=sys.stderr,
    )
    return EXIT_VIOLATION if report.exit_code else EXIT_OK


def _load(args) -> dict:
    case = load_case(args.case)
    if getattr(args, "variant", None) is not None:
        case = {**case, "variant": args.variant}
    return case


def cmd_check(args) -> int:
    try:
        case = _load(args)
        report = evaluate_case(case, _tolerance(args, case.get("tolerance")), strict=True if args.strict else None)
    except (OSError, CaseError, ChainError, ValueError, ArithmeticError) as exc:
        return _error(str(exc))
    print(report.table())
    _write(dumps(report.to_dict()), args.out)
    return EXIT_OK if report.passed else EXIT_VIOLATION


def cmd_partition_search(args) -> int:
    try:
        case = _load(args)
        tol = _tolerance(args, case.get("tolerance"))
        n = len(case["a"]) if "a" in case else len(case["A"])

        def instance(p: Partition):
            return evaluate_case({**case, "partition": list(p.J)}, tol)

        objective = PartitionObjective.for_report(instance(Partition(n, (0,))), args.scalarization)
        method = args.method or ("exhaustive" if n <= 12 else "greedy")
        search = exhaustive_best_partition if method == "exhaustive" or n < 3 else greedy_partition
        result = search(instance, n, objective)
    except KeyError as exc:
        return _error(f"{exc.args[0]}: missing required field")
    except (OSError, CaseError, ChainError, ValueError, ArithmeticError) as exc:
        return _error(str(exc))
    print(f"{objective.target} ({objective.scalarization}) over {n} indices, {method} search")
    for J, value in result.table:
        print(f"  J={list(J)}  middle={value:.10g}")
    print(f"best J={list(result.partition.J)}  middle={result.value:.10g}")
    _write(dumps({"objective": objective.target, "scalarization": objective.scalarization,
                  "method": method, **result.to_dict()}), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="opjensen", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--tol-rel", type=float, default=None)
        p.add_argument("--tol-abs", type=float, default=None)
        p.add_argument("--variant", choices=[PROOF_PARTIAL_SUMS, PRINTED_FULL_SUMS], default=None,
                       help="operator-norm chain middle term")
        p.add_argument("--out", default=None, help="write the JSON report here instead of stdout")

    p = sub.add_parser("campaign", help="run a seeded verification campaign")
    p.add_argument("config")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--timing", action="store_true", help="record wall time in the report (breaks byte-identity)")
    common(p)
    p.set_defaults(func=cmd_campaign)

    p = sub.add_parser("check", help="evaluate a single case file")
    p.add_argument("case")
    p.add_argument("--strict", action="store_true", help="reject non-Hermitian matrices instead of symmetrizing")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("partition-search", help="find the tightest partition for a case")
    p.add_argument("case")
    p.add_argument("--method", choices=["exhaustive", "greedy"], default=None)
    p.add_argument("--scalarization", choices=["trace", "max_eigenvalue"], default="trace")
    common(p)
    p.set_defaults(func=cmd_partition_search)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
