"""``gridqopt`` command line: gen, solve, bench, report."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import (
    USE_CASES,
    BenchmarkPlan,
    determinism_hash,
    dumps_instance,
    generate,
    load_instance,
    read_rows,
    scaling_csv,
    scaling_report,
    solve,
)
from .grid import TOPOLOGIES


def _parse_param(text: str) -> tuple[str, object]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gridqopt", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a seeded random instance as JSON")
    g.add_argument("--use-case", required=True, choices=USE_CASES)
    g.add_argument("--size", required=True, type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--topology", choices=TOPOLOGIES, default="mesh")
    g.add_argument("--out", required=True)

    s = sub.add_parser("solve", help="solve one instance file and print the result as JSON")
    s.add_argument("--use-case", required=True, choices=USE_CASES)
    s.add_argument("--instance", required=True)
    s.add_argument("--solver", required=True)
    s.add_argument("--param", action="append", default=[], type=_parse_param, metavar="K=V")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--time-budget", type=float, default=None)
    s.add_argument("--out", default=None)

    b = sub.add_parser("bench", help="run a benchmark plan")
    b.add_argument("--plan", required=True)
    b.add_argument("--out", required=True)

    r = sub.add_parser("report", help="aggregate results.csv into a scaling table")
    r.add_argument("--in", dest="inp", required=True)
    r.add_argument("--out", required=True)
    return ap


def _write(path: str, text: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            inst = generate(args.use_case, args.size, args.seed, args.topology)
            _write(args.out, dumps_instance(args.use_case, inst))
            return 0
        if args.command == "solve":
            data = json.loads(Path(args.instance).read_text(encoding="utf-8"))
            inst = load_instance(args.use_case, data)
            out = solve(args.use_case, inst, args.solver, dict(args.param), args.seed, args.time_budget)
            text = json.dumps({
                "use_case": args.use_case, "solver": args.solver, "seed": args.seed,
                "objective": out.objective, "verified": out.verified, "metrics": out.metrics,
                "solution": out.solution,
            }, indent=1) + "\n"
            if args.out:
                _write(args.out, text)
            else:
                sys.stdout.write(text)
            return 0 if out.verified else 1
        if args.command == "bench":
            from .bench import run_benchmark

            plan = BenchmarkPlan.from_json(Path(args.plan).read_text(encoding="utf-8"))
            rows = run_benchmark(plan, args.out)
            bad = [r for r in rows if not r.verified]
            print(f"{len(rows)} rows, determinism hash {determinism_hash(rows)}")
            if bad:
                print(f"verification failed on {len(bad)} rows", file=sys.stderr)
                return 1
            return 0
        if args.command == "report":
            _write(args.out, scaling_csv(scaling_report(read_rows(args.inp))))
            return 0
    except (ValueError, KeyError, TypeError, OSError) as exc:
        print(f"gridqopt: error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
