"""Command-line front end: run, litmus, fuzz, optdiff, check."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .core import PRIMOPS, UNIT, MethodTable, Val
from .evaluator import DEFAULT_FUEL, MachineState, render_state, run_state
from .fuzz import (
    CHECKS, OPT_FUZZ_FUEL, FuzzConfig, check_decomposition, opt_case, run_campaign, traced,
)
from .harness import optdiff_state
from .litmus import run_suite
from .optimizer import check_expr_opt, check_table_opt, format_phi, parse_phi
from .parser import (
    ParseError, SList, SourceSpan, form_to_expr, form_to_table, parse_expr, print_expr, print_table,
    print_value, read_form,
)

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_FUEL = 0, 1, 2, 3


def _emit(args, payload: dict, lines) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for line in lines:
            print(line)


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _outcome_json(o) -> dict:
    d = {"status": o.status, "steps": o.steps, "output": o.output,
         "table": print_table(o.table)}
    if o.status == "value":
        d["value"] = print_value(o.value)
    elif o.status == "error":
        d["error"] = o.error.kind.value
        d["detail"] = o.error.detail
    return d


# ---------------------------------------------------------------- run


def cmd_run(args) -> int:
    try:
        p = parse_expr(_read(args.file))
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    states: list = []
    outcome = run_state(MachineState(MethodTable(), p), args.fuel,
                        on_state=states.append if args.trace else None)
    rendered = [render_state(i, s) for i, s in enumerate(states)]
    if args.json:
        payload = _outcome_json(outcome)
        if args.trace:
            payload["trace"] = rendered
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for line in rendered:
            print(line)
        sys.stdout.write(outcome.output)
        print(outcome.render())
    return {"value": EXIT_OK, "error": EXIT_FAIL, "fuel": EXIT_FUEL}[outcome.status]


# ---------------------------------------------------------------- litmus


def cmd_litmus(args) -> int:
    suite = run_suite(args.fuel)
    lines, cases, passed = [], {}, 0
    for cid, results in suite.items():
        ok = all(r.ok for r in results)
        passed += ok
        cases[cid] = [{"expected": r.expected, "actual": r.actual, "ok": r.ok} for r in results]
        for r in results:
            mark = "PASS" if r.ok else "FAIL"
            lines.append(f"{mark} ({cid}.{r.index + 1}) expected {r.expected}, got {r.actual}")
    lines.append(f"{passed}/{len(suite)} cases pass")
    _emit(args, {"cases": cases, "passed": passed, "total": len(suite)}, lines)
    return EXIT_OK if passed == len(suite) else EXIT_FAIL


# ---------------------------------------------------------------- fuzz


def cmd_fuzz(args) -> int:
    try:
        values = tuple(_literal(t) for t in args.value or ())
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    extra = {"primops": tuple(args.primop)} if args.primop else {}
    cfg = FuzzConfig(seed=args.seed, cases=args.cases, max_depth=args.max_depth,
                     max_table=args.max_table, fuel=args.fuel, values=values, **extra)
    if args.replay:
        return _replay(args, cfg)
    report = run_campaign(cfg)
    written = []
    if report.failures and args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for f in report.failures:
            path = out / f"counterexample-{f.prop}-{f.case}.jlt"
            path.write_text(f"; seed {cfg.seed} case {f.case} property {f.prop}: {f.reason}\n"
                            f"{f.minimized}\n", encoding="utf-8")
            written.append(str(path))
    lines = [f"seed {cfg.seed}: {cfg.cases} programs"]
    lines += [f"  {name}: {n} checked" for name, n in sorted(report.counts.items())]
    lines += ["  outcomes: " + ", ".join(f"{k}={v}" for k, v in sorted(report.outcomes.items()))]
    for f in report.failures:
        lines.append(f"FAIL case {f.case} {f.prop}: {f.reason}\n  {f.minimized}")
    lines += [f"counterexample written to {p}" for p in written]
    lines.append(f"{len(report.failures)} failures")
    payload = {"seed": cfg.seed, "cases": cfg.cases, "counts": report.counts,
               "outcomes": report.outcomes, "files": written,
               "failures": [vars(f) for f in report.failures]}
    _emit(args, payload, lines)
    return EXIT_OK if report.ok else EXIT_FAIL


def _literal(text: str):
    e = parse_expr(text)
    if not isinstance(e, Val):
        raise ParseError(f"not a literal: {text}", SourceSpan(0, len(text)))
    return e.value


def _replay(args, cfg) -> int:
    try:
        p = parse_expr(_read(args.replay))
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    results = {name: CHECKS[name](p, cfg) for name in CHECKS}
    results["decomposition"] = next(
        (r for s in traced(p, min(cfg.fuel, 200)).states
         if (r := check_decomposition(s.program)) is not None), None)
    lines = [f"{'FAIL' if r else 'PASS'} {name}" + (f": {r}" if r else "")
             for name, r in results.items()]
    _emit(args, {"results": results}, lines)
    return EXIT_FAIL if any(results.values()) else EXIT_OK


# ---------------------------------------------------------------- optdiff


def _report_lines(rep) -> list:
    a, b, c = rep.original, rep.optimized, rep.rewritten
    sides = [f"original:  {a.render()}", f"optimized: {b.render()}",
             f"rewritten: {c.render()}"]
    verdict = "certified" if rep.certified else "NOT certified"
    same = "equal" if rep.equal and rep.equal_rewritten else "MISMATCH"
    return sides + [f"prints: {a.output.count(chr(10))} / {b.output.count(chr(10))} / "
                    f"{c.output.count(chr(10))}", f"{same}, {verdict}"] + rep.notes


def _report_json(rep) -> dict:
    return {"certified": rep.certified, "equal": rep.equal,
            "equal_rewritten": rep.equal_rewritten, "notes": rep.notes,
            "original_table": print_table(rep.frozen.table),
            "optimized_table": print_table(rep.result.table),
            "body": print_expr(rep.frozen.body), "rewritten_body": print_expr(rep.result.expr),
            "phi": format_phi(rep.result.phi),
            "original": _outcome_json(rep.original), "optimized": _outcome_json(rep.optimized),
            "rewritten": _outcome_json(rep.rewritten)}


def cmd_optdiff(args) -> int:
    if args.file:
        try:
            p = parse_expr(_read(args.file))
        except ParseError as exc:
            print(f"parse error: {exc}", file=sys.stderr)
            return EXIT_PARSE
        fuel = DEFAULT_FUEL if args.fuel is None else args.fuel
        rep = optdiff_state(MachineState(MethodTable(), p), args.inline_limit,
                            args.spec_limit, fuel)
        if rep is None:
            print("no local table is ever active; nothing to optimize", file=sys.stderr)
            return EXIT_FAIL
        lines = ["original table:  " + print_table(rep.frozen.table),
                 "optimized table: " + print_table(rep.result.table),
                 "body:            " + print_expr(rep.frozen.body),
                 "rewritten body:  " + print_expr(rep.result.expr)]
        lines += ["phi: " + line for line in format_phi(rep.result.phi).splitlines()]
        _emit(args, _report_json(rep), lines + _report_lines(rep))
        return EXIT_OK if rep.ok else EXIT_FAIL
    return _optdiff_batch(args)


def _optdiff_batch(args) -> int:
    fuel = OPT_FUZZ_FUEL if args.fuel is None else args.fuel
    checked = certified = equal = 0
    failures = []
    index = 0
    while checked < args.cases:
        p, skip = opt_case(args.seed, index)
        rep = optdiff_state(MachineState(MethodTable(), p), args.inline_limit,
                            args.spec_limit, fuel, skip=skip)
        index += 1
        if rep is None:
            continue
        checked += 1
        certified += rep.certified
        equal += rep.equal and rep.equal_rewritten
        if not rep.ok:
            failures.append({"index": index - 1, "program": print_expr(p),
                             **_report_json(rep)})
    lines = [f"{checked} frozen programs from {index} generated: {certified} certified, "
             f"{equal} outcome-equal", f"{len(failures)} failures"]
    lines += [f"FAIL #{f['index']}: {f['program']}" for f in failures]
    _emit(args, {"checked": checked, "generated": index, "certified": certified,
                 "equal": equal, "failures": failures}, lines)
    return EXIT_OK if not failures else EXIT_FAIL


# ---------------------------------------------------------------- check


def _load_side(text: str):
    """An (evalt TABLE e) form, or a bare table (paired with a unit expression)."""
    node = read_form(text)
    if isinstance(node, SList) and node.items and getattr(node.items[0], "text", None) == "evalt":
        e = form_to_expr(node)
        return e.table, e.body
    return form_to_table(node), Val(UNIT)


def cmd_check(args) -> int:
    try:
        M, e = _load_side(_read(args.orig))
        M2, e2 = _load_side(_read(args.opt))
        phi = parse_phi(_read(args.phi)) if args.phi else ()
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    table_ok = check_table_opt(phi, e, M, M2)
    expr_ok = check_expr_opt(phi, {}, M, e, M2, e2)
    lines = [f"table: {'ok' if table_ok else 'REJECTED'}",
             f"expression: {'ok' if expr_ok else 'REJECTED'}"]
    _emit(args, {"table": table_ok, "expression": expr_ok}, lines)
    return EXIT_OK if table_ok and expr_ok else EXIT_FAIL


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="juliette", description=__doc__)
    ap.add_argument("--json", action="store_true", help="machine-readable report")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p):
        p.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                       help="machine-readable report")
        p.add_argument("--fuel", type=int, default=DEFAULT_FUEL, help="step budget")

    p = sub.add_parser("run", help="evaluate a program")
    common(p)
    p.add_argument("file")
    p.add_argument("--trace", action="store_true", help="print every state")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("litmus", help="run the world-age litmus suite")
    common(p)
    p.set_defaults(func=cmd_litmus)

    p = sub.add_parser("fuzz", help="property-check generated programs")
    common(p)
    p.set_defaults(fuel=500)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--cases", type=int, default=1000)
    p.add_argument("--max-depth", type=int, default=4)
    p.add_argument("--max-table", type=int, default=4)
    p.add_argument("--out", default="counterexamples", help="directory for failing cases")
    p.add_argument("--replay", metavar="FILE", help="re-check one saved program")
    p.add_argument("--value", action="append", metavar="LIT",
                   help="restrict literals to this alphabet (repeatable)")
    p.add_argument("--primop", action="append", choices=sorted(PRIMOPS),
                   help="restrict primops to this alphabet (repeatable)")
    p.set_defaults(func=cmd_fuzz)

    p = sub.add_parser("optdiff", help="optimize, certify and compare both runs")
    common(p)
    p.set_defaults(fuel=None)
    p.add_argument("file", nargs="?", help="program; omit to run a generated batch")
    p.add_argument("--inline-limit", type=int, default=1)
    p.add_argument("--spec-limit", type=int, default=1)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--cases", type=int, default=1000)
    p.set_defaults(func=cmd_optdiff)

    p = sub.add_parser("check", help="verify an optimization against the judgments")
    common(p)
    p.add_argument("orig", help="(evalt TABLE e) or a bare table")
    p.add_argument("opt", help="(evalt TABLE' e') or a bare table")
    p.add_argument("--phi", help="direct-call environment file")
    p.set_defaults(func=cmd_check)
    return ap


def main(argv=None) -> int:
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
