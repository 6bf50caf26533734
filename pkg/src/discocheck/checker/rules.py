"""Direct evaluation of the well-formedness rules over resolved artifacts.

Each rule here is the element-level reading of the corresponding metamodel
fact, so the evaluator and the solver agree on every input.
"""

from __future__ import annotations

from collections import Counter

from ..metamodel import MODEL_KINDS
from ..relational.closure import find_cycle
from ..workspace import AGGREGATIONS, Diagram, Element, Relationship
from .report import Finding


def _spans(*rels: Relationship):
    return tuple(r.span for r in rels if r.span is not None)


def _kinds(els, kind: str, conforms) -> bool:
    return all(conforms(e.kind, kind) for e in els)


def relationship_findings(r: Relationship, conforms) -> list[Finding]:
    """F1, F2, F8 and ``expect`` for one relationship."""
    out = []
    if r.kind in AGGREGATIONS:
        ends = [r.head, *r.tail]
        if not (_kinds(ends, "Task", conforms) or _kinds(ends, "Object", conforms)):
            kinds = ", ".join(sorted({e.kind for e in ends}))
            out.append(Finding("F1", f"{r.name} mixes element kinds ({kinds})",
                               (r.name, *sorted({e.name for e in ends})), _spans(r)))
    if r.is_structure:
        if r.head in r.tail:
            out.append(Finding("F2", f"{r.name} lists its head {r.head.name} among its tail",
                               (r.name, r.head.name), _spans(r)))
        if not r.tail:
            out.append(Finding("F8", f"{r.name} has an empty tail", (r.name,), _spans(r)))
        if r.expect_tail is not None and len(r.tail) != r.expect_tail:
            out.append(Finding("expect-mismatch",
                               f"{r.name} expects {r.expect_tail} tail members but has {len(r.tail)}",
                               (r.name,), _spans(r)))
    return out


def containment_findings(d: Diagram) -> list[Finding]:
    """F6: relationships of ``d`` only reference nodes of ``d``."""
    own = set(d.elements())
    out = []
    for r in d.relationships:
        missing = sorted({e for e in r.endpoints() if e not in own})
        if missing:
            names = ", ".join(e.name for e in missing)
            out.append(Finding("F6", f"{r.name} in {d.name} references {names}, not declared in {d.name}",
                               (r.name, *(e.name for e in missing)), _spans(r)))
    return out


def _edges(rels) -> list[tuple[Element, Element]]:
    return sorted({(r.head, t) for r in rels for t in r.tail})


def _cycle_finding(rule: str, what: str, subject: str, rels) -> list[Finding]:
    cycle = find_cycle(_edges(rels))
    if cycle is None:
        return []
    path = " -> ".join(e.name for e in [*cycle, cycle[0]])
    on_cycle = set(cycle)
    involved = [r for r in rels if r.head in on_cycle and on_cycle & set(r.tail)]
    return [Finding(rule, f"{what} of {subject} has a cycle: {path}",
                    tuple(sorted({e.name for e in cycle})), _spans(*involved))]


def model_scoped_findings(subject: str, rels: tuple[Relationship, ...]) -> list[Finding]:
    """F3, F4 and F5 over a model's whole relationship set."""
    comps = [r for r in rels if r.kind == "Composition"]
    gens = [r for r in rels if r.kind == "Generalisation"]
    out = _cycle_finding("F3", "the composition graph", subject, comps)
    owners = Counter(t for r in comps for t in set(r.tail))
    for part, n in sorted(owners.items()):
        if n > 1:
            holders = [r for r in comps if part in r.tail]
            wholes = ", ".join(f"{r.name} ({r.head.name})" for r in holders)
            out.append(Finding("F4", f"{part.name} is a part of {n} compositions: {wholes}",
                               (part.name, *sorted({r.name for r in holders})), _spans(*holders)))
    out += _cycle_finding("F5", "the generalisation graph", subject, gens)
    return out


def system_findings(name: str, models, model_kinds: dict[str, str]) -> list[Finding]:
    """F7: at most one model of each kind."""
    out = []
    for kind in MODEL_KINDS:
        same = sorted(m for m in models if model_kinds[m] == kind)
        if len(same) > 1:
            out.append(Finding("F7", f"{name} includes {len(same)} {kind}s: {', '.join(same)}",
                               tuple(same)))
    return out
