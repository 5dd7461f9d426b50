"""``histq`` command line: run scenario files and the built-in examples.

Exit status for ``run``: 0 when every query succeeds, 2 when any query fails,
1 on IO, parse or validation errors.  ``examples`` exits 0 only when every
expected value matches.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .dsl import FORMATTERS, ResultSet, ScenarioError, parse_scenario, run_scenario, to_table
from .histories import CONSISTENCY_TOL
from .linalg import NUMERIC_TOL
from .scenarios import EXAMPLES, UnknownExample, check_example, get_example, run_example

EXIT_OK, EXIT_INPUT, EXIT_QUERY = 0, 1, 2


def positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value > 0 or value != value or value == float("inf"):
        raise argparse.ArgumentTypeError(f"tolerance must be a positive finite number, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=sorted(FORMATTERS), default="table", help="output format (default: table)")
    common.add_argument("--consistency-tol", type=positive_float, default=CONSISTENCY_TOL, metavar="TOL")
    common.add_argument("--numeric-tol", type=positive_float, default=NUMERIC_TOL, metavar="TOL")
    common.add_argument("--quiet", action="store_true", help="only report failures in table output")
    common.add_argument("--output", type=Path, metavar="PATH", help="write results to PATH instead of stdout")
    common.add_argument("--timing", action="store_true", help="show per-query timing in table output")

    parser = argparse.ArgumentParser(prog="histq", description="Consistent-histories analysis of quantum measurements.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("run", parents=[common], help="run the queries of scenario files")
    p.add_argument("paths", nargs="+", type=Path, metavar="PATH")
    p = sub.add_parser("validate", parents=[common], help="parse and validate scenario files without running queries")
    p.add_argument("paths", nargs="+", type=Path, metavar="PATH")
    p = sub.add_parser("examples", parents=[common], help="run a built-in scenario, or all of them")
    p.add_argument("name", metavar="NAME|all")
    p.add_argument("--source", action="store_true", help="print the scenario source instead of running it")
    sub.add_parser("list-examples", parents=[common], help="list the built-in scenarios")
    return parser


class Output:
    def __init__(self, args):
        self.path: Path | None = args.output
        self.chunks: list[str] = []
        no_color = "HISTQ_NO_COLOR" in os.environ
        self.color = self.path is None and not no_color and sys.stdout.isatty()

    def write(self, text: str) -> None:
        self.chunks.append(text)

    def flush(self) -> int:
        text = "".join(self.chunks)
        if self.path is None:
            sys.stdout.write(text)
            return EXIT_OK
        try:
            self.path.write_text(text, encoding="utf-8")
        except OSError as exc:
            return fail(f"cannot write {self.path}: {exc.strerror or exc}")
        return EXIT_OK


def fail(message: str) -> int:
    print(f"histq: error: {message}", file=sys.stderr)
    return EXIT_INPUT


def read_source(path: Path) -> str:
    if not path.exists():
        raise FileNotFoundError(f"file not found: {path}")
    if path.is_dir():
        raise IsADirectoryError(f"is a directory: {path}")
    try:
        return path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ValueError(f"{path} is not valid UTF-8 (byte {exc.start})") from None


def render(results: ResultSet, args, out: Output) -> None:
    if args.format == "table":
        if args.quiet:
            results = ResultSet(results.origin, [r for r in results.results if not r.ok])
        out.write(to_table(results, color=out.color, timing=args.timing))
    else:
        out.write(FORMATTERS[args.format](results))


def cmd_run(args) -> int:
    out = Output(args)
    status = EXIT_OK
    machine = []
    for path in args.paths:
        try:
            scenario = parse_scenario(read_source(path), str(path), args.numeric_tol)
        except (OSError, ValueError) as exc:
            return fail(str(exc))
        except ScenarioError as exc:
            return fail(str(exc))
        results = run_scenario(scenario, args.consistency_tol, args.numeric_tol)
        for r in results.results:
            if not r.ok:
                print(f"histq: {path}: query {r.qid} failed: {r.error}", file=sys.stderr)
        if not results.ok:
            status = EXIT_QUERY
        if args.format == "json" and len(args.paths) > 1:
            machine.append(results.to_dict())
        else:
            render(results, args, out)
    if machine:
        out.write(json.dumps(machine, indent=2, ensure_ascii=False) + "\n")
    return out.flush() or status


def cmd_validate(args) -> int:
    out = Output(args)
    reports = []
    status = EXIT_OK
    for path in args.paths:
        try:
            sc = parse_scenario(read_source(path), str(path), args.numeric_tol)
        except (OSError, ValueError, ScenarioError) as exc:
            print(f"histq: {exc}", file=sys.stderr)
            reports.append({"path": str(path), "ok": False, "error": str(exc)})
            status = EXIT_INPUT
            continue
        counts = {
            "spaces": len(sc.spaces),
            "kets": len(sc.kets),
            "operators": len(sc.operators),
            "models": len(sc.models),
            "families": len(sc.families),
            "queries": len(sc.queries),
        }
        reports.append({"path": str(path), "ok": True, **counts})
    if args.format == "json":
        out.write(json.dumps(reports, indent=2) + "\n")
    elif args.format == "csv":
        out.write("path,ok,detail\n")
        for r in reports:
            detail = r.get("error") or " ".join(f"{k}={r[k]}" for k in ("spaces", "kets", "operators", "models", "families", "queries"))
            out.write(f"{json.dumps(r['path'])},{str(r['ok']).lower()},{json.dumps(detail)}\n")
    else:
        for r in reports:
            if r["ok"] and not args.quiet:
                counts = ", ".join(f"{r[k]} {k}" for k in ("spaces", "kets", "operators", "models", "families", "queries"))
                out.write(f"{r['path']}: ok ({counts})\n")
            elif not r["ok"]:
                out.write(f"{r['path']}: invalid\n")
    return out.flush() or status


def _example_report(name: str, args):
    results = run_example(name, args.consistency_tol, args.numeric_tol)
    checks = check_example(name, results)
    passed = results.ok and all(c.ok for c in checks)
    return results, checks, passed


def cmd_examples(args) -> int:
    out = Output(args)
    names = list(EXAMPLES) if args.name == "all" else [args.name]
    try:
        for n in names:
            get_example(n)
    except UnknownExample as exc:
        return fail(str(exc))
    if args.source:
        for n in names:
            out.write(get_example(n).source())
        return out.flush()

    summary = []
    machine = []
    for name in names:
        results, checks, passed = _example_report(name, args)
        summary.append((name, passed, sum(c.ok for c in checks), len(checks)))
        if args.format == "json":
            machine.append(
                {
                    "example": name,
                    "passed": passed,
                    "results": results.to_dict(),
                    "checks": [{"check": c.describe(), "ok": c.ok} for c in checks],
                }
            )
        elif args.format == "csv":
            text = FORMATTERS["csv"](results)
            out.write(text if name == names[0] else text.split("\n", 1)[1])
        elif len(names) == 1:
            render(results, args, out)
            for c in checks:
                if not (c.ok and args.quiet):
                    out.write(f"check {c.describe()}\n")
    if args.format == "json":
        out.write(json.dumps(machine[0] if len(machine) == 1 else machine, indent=2, ensure_ascii=False) + "\n")
    elif args.format == "table":
        if len(names) > 1 or not args.quiet:
            for name, passed, good, total in summary:
                label = "PASS" if passed else "FAIL"
                if out.color:
                    label = f"\033[{32 if passed else 31}m{label}\033[0m"
                if not (passed and args.quiet):
                    out.write(f"{label} {name} ({good}/{total} expected values)\n")
    failed = [name for name, passed, *_ in summary if not passed]
    if failed:
        print(f"histq: examples failed: {', '.join(failed)}", file=sys.stderr)
    return out.flush() or (EXIT_QUERY if failed else EXIT_OK)


def cmd_list_examples(args) -> int:
    out = Output(args)
    if args.format == "json":
        out.write(json.dumps({n: e.summary for n, e in EXAMPLES.items()}, indent=2) + "\n")
    elif args.format == "csv":
        out.write("name,summary\n" + "".join(f"{n},{json.dumps(e.summary)}\n" for n, e in EXAMPLES.items()))
    else:
        width = max(len(n) for n in EXAMPLES)
        out.write("".join(f"{n:<{width}}  {e.summary}\n" for n, e in EXAMPLES.items()))
    return out.flush()


COMMANDS = {"run": cmd_run, "validate": cmd_validate, "examples": cmd_examples, "list-examples": cmd_list_examples}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
