"""Command-line interface: ``discocheck check|scope|find|assert``.

Exit codes: 0 everything valid, 1 something invalid, 2 unreadable input or
bad usage, 3 search budget exhausted or an internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence, TextIO

from .checker.check import check_diagram, check_model, check_system
from .checker.encode import compute_scope, encode_instance
from .checker.merge import MergedModel, diagram_as_model, merge_model
from .checker.report import BUDGET_EXCEEDED, INVALID, MULTIPLE, NONE, UNIQUE, CheckOptions, Report, Verdict
from .checker.suite import builtin_assertion_suite
from .dsl import load_workspace
from .metamodel import declare_metamodel
from .relational.errors import SearchBudgetExceeded
from .relational.search import DEFAULT_BUDGET, enumerate_instances
from .render import instance_lines, render_dot, render_report, render_scope, render_verdict, scope_lines
from .source import DslError
from .workspace import Workspace

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3
RULE_IDS = ("F1", "F2", "F3", "F4", "F5", "F6", "F7", "F8", "expect-mismatch", "shared-mismatch")


class UsageError(Exception):
    pass


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {n}")
    return n


def _at_least_two(text: str) -> int:
    n = int(text)
    if n < 2:
        raise argparse.ArgumentTypeError(f"must be at least 2 to tell unique from multiple, got {n}")
    return n


def _nonnegative(text: str) -> int:
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {n}")
    return n


def _rule(text: str) -> str:
    if text not in RULE_IDS:
        raise argparse.ArgumentTypeError(f"unknown rule {text!r}; choose from {', '.join(RULE_IDS)}")
    return text


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="discocheck", description="Check Discovery models for well-formedness.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser, formats: tuple[str, ...]) -> None:
        sp.add_argument("--format", choices=formats, default="text")
        sp.add_argument("--budget", type=_positive, default=DEFAULT_BUDGET,
                        help="search budget in decisions (solver only)")

    def rules(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--disable-rule", action="append", type=_rule, default=[], metavar="RULE",
                        help="skip a rule (repeatable)")

    c = sub.add_parser("check", help="check diagrams, models and systems")
    c.add_argument("files", nargs="+")
    c.add_argument("--level", choices=("diagram", "model", "system", "all"), default="all")
    c.add_argument("--backend", choices=("eval", "solver", "both"), default="eval")
    c.add_argument("--enable-degenerate-diagram-rules", action="store_true",
                   help="apply F3, F4 and F5 to a lone diagram")
    common(c, ("text", "json", "dot"))
    rules(c)

    s = sub.add_parser("scope", help="print the exact scope of each model")
    s.add_argument("files", nargs="+")
    s.add_argument("--model", action="append", default=[], help="only this model (repeatable)")
    s.add_argument("--format", choices=("text", "json"), default="text")

    f = sub.add_parser("find", help="search for instances of each model's encoding")
    f.add_argument("files", nargs="+")
    f.add_argument("--model", action="append", default=[], help="only this model (repeatable)")
    f.add_argument("--limit", type=_at_least_two, default=2,
                   help="stop after this many instances (at least 2 to decide uniqueness)")
    common(f, ("text", "json"))
    rules(f)

    a = sub.add_parser("assert", help="run the built-in assertion suite")
    a.add_argument("--max-scope", type=_nonnegative, default=3)
    a.add_argument("--no-collapse", action="store_true",
                   help="let diagram and model counts reach --max-scope as well")
    common(a, ("text", "json"))
    return p


# -- commands ------------------------------------------------------------------

def _models(ws: Workspace, only: list[str]) -> list[MergedModel]:
    missing = [m for m in only if m not in ws.models]
    if missing:
        raise UsageError(f"no model named {', '.join(missing)}")
    names = only or list(ws.models)
    return [merge_model(ws.models[n], ws) for n in names]


def _check(args, ws: Workspace, out: TextIO) -> int:
    if args.level == "system" and args.backend != "eval":
        raise UsageError("the solver back end checks diagrams and models; use --backend eval for systems")
    catalog = declare_metamodel()
    options = CheckOptions(frozenset(args.disable_rule), args.enable_degenerate_diagram_rules, args.budget)
    backends = ("eval", "solver") if args.backend == "both" else (args.backend,)
    runs: list[tuple[Report, MergedModel | None]] = []
    if args.level in ("diagram", "all"):
        for d in ws.diagrams.values():
            mm = diagram_as_model(d, options.degenerate_diagram_rules)
            runs += [(check_diagram(d, catalog, options, b), mm) for b in backends]
    if args.level in ("model", "all"):
        for mm in _models(ws, []):
            runs += [(check_model(mm, catalog, options, b), mm) for b in backends]
    if args.level in ("system", "all"):
        for s in ws.systems.values():
            runs.append((check_system(s, ws, catalog, options, "eval"), None))

    if args.format == "dot":
        subjects = {id(mm): mm for _, mm in runs if mm is not None}
        out.write("\n".join(render_dot(mm) for mm in subjects.values()) + "\n")
    else:
        blocks = []
        for i, (r, mm) in enumerate(runs):
            # the tree is shown once per subject, with the first back end's report
            first = i == 0 or runs[i - 1][1] is not mm
            blocks.append(render_report(r, args.format, mm if first else None))
        sep = "\n" if args.format == "json" else "\n\n"
        if blocks:
            out.write(sep.join(blocks) + "\n")
    return _exit_code([r for r, _ in runs])


def _exit_code(reports: list[Report]) -> int:
    every = [x for r in reports for x in r.all_reports()]
    if any(r.verdict == BUDGET_EXCEEDED or (r.solver and r.solver.outcome == MULTIPLE) for r in every):
        return EXIT_INTERNAL
    return EXIT_INVALID if any(r.verdict == INVALID for r in every) else EXIT_OK


def _scope(args, ws: Workspace, out: TextIO) -> int:
    catalog = declare_metamodel()
    blocks = [render_scope(compute_scope(mm, catalog), args.format, mm.name, catalog)
              for mm in _models(ws, args.model)]
    if blocks:
        out.write(("\n" if args.format == "json" else "\n\n").join(blocks) + "\n")
    return EXIT_OK


def _find(args, ws: Workspace, out: TextIO) -> int:
    catalog = declare_metamodel()
    options = CheckOptions(frozenset(args.disable_rule), budget=args.budget)
    spec = catalog.spec_with(options.disabled)
    blocks, outcomes = [], []
    for mm in _models(ws, args.model):
        enc = encode_instance(mm, catalog, options)
        names = {atom: var.split(":")[-1] for var, atom in enc.pinning.items()}
        try:
            found = enumerate_instances(spec, enc.goal, enc.scope, limit=args.limit, env=enc.pinning,
                                        budget=args.budget)
            outcome = {0: NONE, 1: UNIQUE}.get(len(found), MULTIPLE)
            verdict = Verdict(outcome, len(found), tuple(found), enc.scope)
        except SearchBudgetExceeded:
            verdict = Verdict(BUDGET_EXCEEDED, 0, (), enc.scope)
        outcomes.append(verdict.outcome)
        blocks.append(render_verdict(verdict, args.format, mm.name, names))
    if blocks:
        out.write(("\n" if args.format == "json" else "\n\n").join(blocks) + "\n")
    if BUDGET_EXCEEDED in outcomes:
        return EXIT_INTERNAL
    return EXIT_INVALID if NONE in outcomes else EXIT_OK


def _assert(args, out: TextIO) -> int:
    results = builtin_assertion_suite(declare_metamodel(), args.max_scope, budget=args.budget,
                                      collapse=not args.no_collapse)
    *main, probe = results
    lines = []
    for r in results:
        expected = r is probe
        if args.format == "json":
            lines.append(json.dumps({
                "assertion": r.label, "holds": r.holds, "budget_exceeded": r.budget_exceeded,
                "scopes_checked": r.scopes_checked, "expected_to_hold": not expected,
                "scope": {k: v for k, v in r.scope.counts.items() if v} if r.scope else None,
            }, sort_keys=True, separators=(",", ":")))
            continue
        if r.holds:
            lines.append(f"{r.label}: holds ({r.scopes_checked} scopes)")
        elif r.budget_exceeded:
            lines.append(f"{r.label}: budget exceeded after {r.scopes_checked} scopes")
        else:
            note = " (expected)" if expected else ""
            lines.append(f"{r.label}: counterexample{note} after {r.scopes_checked} scopes")
            lines += ["  " + s for s in scope_lines(r.scope) if not s.startswith("0 ")]
            lines += ["  instance"] + ["    " + s for s in instance_lines(r.counterexample)]
    out.write("\n".join(lines) + "\n")
    if any(r.budget_exceeded for r in results):
        return EXIT_INTERNAL
    # the probe only demonstrates that dropping F3 is detectable; it does not affect the exit code
    return EXIT_OK if all(r.holds for r in main) else EXIT_INVALID


def main(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        if args.command == "assert":
            return _assert(args, out)
        ws = load_workspace(args.files)
        return {"check": _check, "scope": _scope, "find": _find}[args.command](args, ws, out)
    except DslError as exc:
        for d in exc.diagnostics:
            print(d, file=err)
        return EXIT_USAGE
    except UsageError as exc:
        print(f"discocheck: error: {exc}", file=err)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - report any defect as exit 3
        print(f"discocheck: internal error: {type(exc).__name__}: {exc}", file=err)
        return EXIT_INTERNAL


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
