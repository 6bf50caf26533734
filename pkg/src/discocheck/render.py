"""Text, JSON and DOT renderings of reports, verdicts, scopes and models.

All output is deterministic: element and finding order is fixed, JSON keys
are sorted, and only the JSON form carries timing.
"""

from __future__ import annotations

import json
from typing import Iterable

from .checker.merge import MergedModel
from .checker.report import Finding, Report, Verdict
from .metamodel import MetamodelCatalog, declare_metamodel
from .relational.spec import Instance, Scope
from .workspace import RELATION_FIELD, Relationship

FORMATS = ("text", "json", "dot")
_ROOT_ORDER = ("Model", "DiagramView", "Relationship", "Node", "System", "TaskFlowElement", "Member")
_REL_WORD = {"Generalisation": "gen", "Realisation": "real", "Aggregation": "agg",
             "Composition": "comp", "Participation": "parti", "Transition": "trans"}


def scope_order(catalog: MetamodelCatalog | None = None) -> list[str]:
    """Signatures in display order: a pre-order walk of each tree."""
    spec = (catalog or declare_metamodel()).spec
    roots = sorted(spec.roots(), key=lambda r: (_ROOT_ORDER.index(r) if r in _ROOT_ORDER
                                                else len(_ROOT_ORDER), r))
    out: list[str] = []

    def visit(name: str) -> None:
        out.append(name)
        for c in spec.children(name):
            visit(c)

    for r in roots:
        visit(r)
    return out


# -- scopes --------------------------------------------------------------------

def scope_lines(scope: Scope, catalog: MetamodelCatalog | None = None) -> list[str]:
    """``exactly N Sig`` lines for nonzero counts, then ``0 Sig`` lines."""
    order = scope_order(catalog)
    nonzero = [f"exactly {scope[s]} {s}" for s in order if scope.get(s)]
    zero = [f"0 {s}" for s in order if not scope.get(s)]
    return nonzero + zero


def render_scope(scope: Scope, fmt: str = "text", subject: str = "",
                 catalog: MetamodelCatalog | None = None) -> str:
    if fmt == "json":
        return _dumps({"subject": subject, "scope": dict(scope.counts)})
    head = f"scope {subject}" if subject else "scope"
    return "\n".join([head, *("  " + line for line in scope_lines(scope, catalog))])


# -- model trees ---------------------------------------------------------------

def _rel_text(r: Relationship) -> str:
    word = _REL_WORD[r.kind]
    if r.is_structure:
        body = f"{r.head.name} -> {', '.join(e.name for e in r.tail) or '(none)'}"
        if r.expect_tail is not None:
            body += f"  [expect tail = {r.expect_tail}]"
    elif r.kind == "Participation":
        body = f"{r.user.name} takes part in {r.tact.name}"
    else:
        body = f"{r.source.name} -> {r.target.name}"
    return f"{word} {r.name}: {body}"


def model_tree(mm: MergedModel) -> list[str]:
    """Indented tree: diagrams, their element sets and relationships, merged elements."""
    lines = []
    for d in mm.diagrams:
        lines.append(f"diagram {d.name} ({d.kind})")
        for fname, els in d.nodes.items():
            if els:
                lines.append(f"  {fname}: {', '.join(e.name for e in els)}")
        for r in d.relationships:
            lines.append(f"  {_rel_text(r)}")
    lines.append("elements")
    for e in sorted(mm.elements, key=lambda e: (e.kind, e.name)):
        lines.append(f"  {e.kind} {e.name}")
    return lines


def _finding_text(f: Finding) -> str:
    where = f" at {f.span}" if f.span else ""
    return f"[{f.rule}] {f.message}{where}"


def _report_text(r: Report, subject: MergedModel | None, depth: int) -> list[str]:
    pad = "  " * depth
    kind = ""
    if subject is not None and subject.model_kind and r.level == "model":
        kind = f" ({subject.model_kind})"
    lines = [f"{pad}{r.level} {r.subject}{kind} [{r.backend}]: {r.verdict}"]
    if r.solver is not None:
        lines.append(f"{pad}  solver: {r.solver.outcome}")
    if subject is not None:
        lines += [f"{pad}  {line}" for line in model_tree(subject)]
    if r.children:
        for c in r.children:
            lines += _report_text(c, None, depth + 1)
    elif r.findings:
        lines.append(f"{pad}  findings")
        lines += [f"{pad}    {_finding_text(f)}" for f in r.findings]
    return lines


def report_dict(r: Report) -> dict:
    out = {
        "level": r.level,
        "subject": r.subject,
        "verdict": r.verdict,
        "backend": r.backend,
        "findings": [
            {"rule": f.rule, "message": f.message, "elements": list(f.elements),
             "span": f.span.to_json() if f.span else None}
            for f in r.findings
        ],
        "timing_ms": r.timing_ms,
    }
    if r.scope is not None:
        out["scope"] = dict(r.scope.counts)
    if r.solver is not None:
        out["outcome"] = r.solver.outcome
    if r.children:
        out["children"] = [report_dict(c) for c in r.children]
    return out


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def render_report(r: Report, fmt: str = "text", subject: MergedModel | None = None) -> str:
    """Render one report; ``subject`` adds the model tree (text) or graph (dot)."""
    if fmt == "json":
        return _dumps(report_dict(r))
    if fmt == "dot":
        if subject is None:
            raise ValueError("dot output needs the checked model")
        return render_dot(subject)
    return "\n".join(_report_text(r, subject, 0))


# -- solver verdicts -----------------------------------------------------------

def instance_lines(inst: Instance, names: dict[str, str] | None = None) -> list[str]:
    """One line per atom with its field values; ``names`` maps atoms to labels."""
    names = names or {}
    label = lambda a: names.get(a, a)  # noqa: E731
    by_owner: dict[str, list[tuple[str, str]]] = {}
    for field, tuples in sorted(inst.tuples.items()):
        for t in sorted(tuples):
            by_owner.setdefault(t[0], []).append((field, t[1]))
    lines = []
    for atoms in inst.atoms.values():
        for a in atoms:
            lines.append(f"{a} {label(a)}" if a in names else a)
            fields: dict[str, list[str]] = {}
            for field, target in by_owner.get(a, []):
                fields.setdefault(field, []).append(label(target))
            for field, targets in fields.items():
                lines.append(f"  {field}: {', '.join(targets)}")
    return lines


def render_verdict(v: Verdict, fmt: str = "text", subject: str = "",
                   names: dict[str, str] | None = None) -> str:
    if fmt == "json":
        return _dumps({
            "subject": subject,
            "outcome": v.outcome,
            "count": v.count,
            "scope": dict(v.scope.counts) if v.scope else None,
            "instances": [{f: sorted(map(list, ts)) for f, ts in sorted(i.tuples.items()) if ts}
                          for i in v.instances],
        })
    lines = [f"{subject}: {v.outcome} ({v.count} found)"]
    for k, inst in enumerate(v.instances, 1):
        lines.append(f"  instance {k}")
        lines += [f"    {line}" for line in instance_lines(inst, names)]
    return "\n".join(lines)


# -- graphs --------------------------------------------------------------------

def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def render_dot(mm: MergedModel) -> str:
    """One node per element, one edge per head-tail pair or participation."""
    lines = [f"digraph {_q(mm.name)} {{"]
    for e in mm.elements:
        lines.append(f"  {_q(e.kind + ':' + e.name)} [label={_q(e.name)}, kind={_q(e.kind)}];")
    for r in mm.relationships:
        attrs = f"label={_q(r.name)}, kind={_q(r.kind)}"
        if r.kind in ("Aggregation", "Composition"):
            style = "odiamond" if r.kind == "Aggregation" else "diamond"
            attrs += f", dir=both, arrowtail={style}"
        elif r.kind in ("Generalisation", "Realisation"):
            attrs += ", dir=back, arrowtail=empty"
        for src, dst in _edges(r):
            lines.append(f"  {_q(src.kind + ':' + src.name)} -> {_q(dst.kind + ':' + dst.name)} [{attrs}];")
    lines.append("}")
    return "\n".join(lines)


def _edges(r: Relationship) -> Iterable:
    if r.is_structure:
        return [(r.head, t) for t in r.tail]
    if r.kind == "Participation":
        return [(r.user, r.tact)]
    return [(r.source, r.target)]


__all__ = ["FORMATS", "scope_order", "scope_lines", "render_scope", "model_tree", "report_dict",
           "render_report", "render_verdict", "instance_lines", "render_dot", "RELATION_FIELD"]
