"""Command-line entry point: ``cgacdts run|compare|validate <scenario.json>``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..solvers import SingularityError
from .runlog import LogWriteError, export_csv
from .runner import RunResult, compare_stacked_vs_cooperative, run_scenario
from .scenario import ScenarioError, load_scenario

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_SOLVER = 2
EXIT_IO = 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cgacdts", description="Dual-arm scenario runner.")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="solve a scenario and write its log")
    run.add_argument("scenario", type=Path)
    run.add_argument("--out", type=Path, default=Path("out"))
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--max-iter", type=int, default=None)
    run.add_argument("--quiet", action="store_true")
    cmp_ = sub.add_parser("compare", help="stacked vs cooperative plane reaching")
    cmp_.add_argument("scenario", type=Path)
    cmp_.add_argument("--out", type=Path, default=Path("out"))
    cmp_.add_argument("--quiet", action="store_true")
    val = sub.add_parser("validate", help="parse and validate a scenario")
    val.add_argument("scenario", type=Path)
    val.add_argument("--quiet", action="store_true")
    return p


def _summary(result: RunResult) -> list[str]:
    lines = [f"{result.scenario.name}: status={result.status}"]
    for name, c in result.checks.items():
        mark = "ok" if c.passed else "FAIL"
        lines.append(f"  {name:24s} {c.value:.3e}  (limit {c.threshold:.3e})  {mark}")
    return lines


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    say = (lambda *a: None) if args.quiet else print

    try:
        sc = load_scenario(args.scenario)
        if getattr(args, "seed", None) is not None:
            if args.seed < 0:
                raise ScenarioError("--seed must be non-negative")
            sc = sc.with_overrides(seed=args.seed)
        if getattr(args, "max_iter", None) is not None and args.max_iter < 1:
            raise ScenarioError("--max-iter must be >= 1")
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: cannot read {args.scenario}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO

    if args.command == "validate":
        say(f"{sc.name}: valid ({sc.kind}, hash {sc.hash[:12]})")
        return EXIT_OK

    try:
        if args.command == "compare":
            rep = compare_stacked_vs_cooperative(sc)
            for tag, res in (("cooperative", rep.cooperative), ("stacked", rep.stacked)):
                export_csv(res.log, args.out / f"{sc.name}_{tag}.csv")
                for line in _summary(res):
                    say(f"[{tag}] {line}")
            say(f"configuration difference norm: {rep.difference:.6g}")
            return EXIT_OK if rep.passed else EXIT_SOLVER
        result = run_scenario(sc, args.max_iter)
        export_csv(result.log, args.out / f"{sc.name}.csv")
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SingularityError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except LogWriteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    for line in _summary(result):
        say(line)
    return EXIT_OK if result.passed else EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
