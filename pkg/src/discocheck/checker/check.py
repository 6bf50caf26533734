"""Diagram, model and system checks on either back end."""

from __future__ import annotations

import time

from ..metamodel import MetamodelCatalog, declare_metamodel
from ..workspace import Diagram, System, Workspace
from .encode import compute_scope, validate_via_solver
from .merge import MergedModel, diagram_as_model, merge_model
from .report import (
    BUDGET_EXCEEDED, INVALID, MULTIPLE, NONE, VALID, CheckOptions, Finding, Report,
)
from .rules import (
    containment_findings, model_scoped_findings, relationship_findings, system_findings,
)

DIAGRAM_RULES = ("F1", "F2", "F6", "F8", "expect-mismatch")
DEGENERATE_RULES = ("F3", "F4", "F5")


def _ms(start: float) -> float:
    return round((time.perf_counter() - start) * 1000, 3)


def _report(level: str, subject: str, findings, backend: str, start: float, **kw) -> Report:
    findings = tuple(findings)
    verdict = kw.pop("verdict", INVALID if findings else VALID)
    return Report(level, subject, verdict, findings, backend, timing_ms=_ms(start), **kw)


def evaluate_merged(mm: MergedModel, catalog: MetamodelCatalog, options: CheckOptions,
                    model_rules: bool) -> list[Finding]:
    """Evaluator-path findings for a merge; ``model_rules`` adds F3, F4 and F5."""
    out: list[Finding] = list(mm.findings)
    for r in mm.relationships:
        out += relationship_findings(r, catalog.conforms)
    for d in mm.diagrams:
        out += containment_findings(d)
    if model_rules:
        out += model_scoped_findings(mm.name, mm.relationships)
    return [f for f in out if options.enabled(f.rule)]


def _solver_report(level: str, mm: MergedModel, catalog: MetamodelCatalog,
                   options: CheckOptions) -> Report:
    start = time.perf_counter()
    verdict = validate_via_solver(mm, catalog, options)
    findings = []
    if verdict.outcome == NONE:
        findings.append(Finding("no-instance", f"no instance of {mm.name} exists at its exact scope",
                                (mm.name,)))
    elif verdict.outcome == MULTIPLE:
        findings.append(Finding("multiple-instances",
                                f"{mm.name} has more than one instance under pinning", (mm.name,)))
    elif verdict.outcome == BUDGET_EXCEEDED:
        findings.append(Finding("budget-exceeded",
                                f"search budget of {options.budget} exhausted for {mm.name}",
                                (mm.name,)))
    return _report(level, mm.name, findings, "solver", start, verdict=verdict.as_report_verdict,
                   scope=verdict.scope, solver=verdict)


def check_diagram(d: Diagram, catalog: MetamodelCatalog | None = None,
                  options: CheckOptions = CheckOptions(), backend: str = "eval") -> Report:
    """Check one diagram on its own.

    F3, F4 and F5 treat the diagram as a one-diagram model only when
    ``options.degenerate_diagram_rules`` is set.
    """
    catalog = catalog or declare_metamodel()
    mm = diagram_as_model(d, with_model=options.degenerate_diagram_rules)
    if backend == "solver":
        return _solver_report("diagram", mm, catalog, options)
    start = time.perf_counter()
    findings = evaluate_merged(mm, catalog, options, options.degenerate_diagram_rules)
    return _report("diagram", d.name, findings, "eval", start)


def check_model(mm: MergedModel, catalog: MetamodelCatalog | None = None,
                options: CheckOptions = CheckOptions(), backend: str = "eval") -> Report:
    """Check a merged model; the model-scoped rules see every member diagram at once."""
    catalog = catalog or declare_metamodel()
    if backend == "solver":
        return _solver_report("model", mm, catalog, options)
    start = time.perf_counter()
    findings = evaluate_merged(mm, catalog, options, model_rules=True)
    return _report("model", mm.name, findings, "eval", start, scope=compute_scope(mm, catalog))


def check_system(s: System, workspace: Workspace, catalog: MetamodelCatalog | None = None,
                 options: CheckOptions = CheckOptions(), backend: str = "eval") -> Report:
    """F7 for the system plus a nested report for each member model."""
    catalog = catalog or declare_metamodel()
    start = time.perf_counter()
    children = tuple(check_model(merge_model(workspace.models[m], workspace), catalog, options, backend)
                     for m in s.models)
    kinds = {m: workspace.models[m].kind for m in s.models}
    findings = system_findings(s.name, s.models, kinds) if options.enabled("F7") else []
    # nested findings are repeated at system level so the verdict matches them
    findings += [f for c in children for f in c.findings]
    if any(c.verdict == BUDGET_EXCEEDED for c in children):
        verdict = BUDGET_EXCEEDED
    else:
        verdict = INVALID if findings else VALID
    return _report("system", s.name, findings, backend, start, verdict=verdict, children=children)
