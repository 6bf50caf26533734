"""Encoding a merged model as an exact-scope model-finding query."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from ..metamodel import MODEL_KINDS, NODE_FIELDS, MetamodelCatalog, accepts
from ..relational.ast import (
    TRUE, CardCmp, Equal, Expr, FieldRef, Formula, Join, Not, SigRef, Var, conj, no, union_all,
)
from ..relational.errors import SearchBudgetExceeded
from ..relational.search import enumerate_instances
from ..relational.spec import Scope, Universe, atom_name
from ..workspace import RELATION_FIELD, Element, Relationship
from .merge import MergedModel
from .report import BUDGET_EXCEEDED, MULTIPLE, NONE, UNIQUE, CheckOptions, Verdict

FALSE = Not(TRUE)


def element_var(e: Element) -> str:
    return f"{e.kind}:{e.name}"


def diagram_var(name: str) -> str:
    return f"diagram:{name}"


def relationship_var(r: Relationship) -> str:
    return f"rel:{r.diagram}:{r.name}"


def model_var(name: str) -> str:
    return f"model:{name}"


@dataclass(frozen=True)
class Encoding:
    goal: Formula
    scope: Scope
    pinning: dict[str, str]


def compute_scope(mm: MergedModel, catalog: MetamodelCatalog) -> Scope:
    """Exact inclusive counts for every signature of the catalog."""
    counts: dict[str, int] = {}

    def bump(kind: str) -> None:
        counts[kind] = counts.get(kind, 0) + 1

    for e in mm.elements:
        bump(e.kind)
    for r in mm.relationships:
        bump(r.kind)
    for d in mm.diagrams:
        bump(d.kind)
    if mm.model_kind is not None:
        bump(mm.model_kind)
    # counts so far are per most-specific kind; a concrete parent such as
    # Aggregation must also cover its children's atoms
    spec = catalog.spec

    def inclusive(name: str) -> int:
        return counts.get(name, 0) + sum(inclusive(c) for c in spec.children(name))

    return Scope({s.name: inclusive(s.name) for s in spec.signatures}).complete(spec)


def _pinning(mm: MergedModel) -> dict[str, str]:
    next_index: dict[str, int] = {}
    pins: dict[str, str] = {}

    def pin(var: str, kind: str) -> None:
        i = next_index.get(kind, 0)
        next_index[kind] = i + 1
        pins[var] = atom_name(kind, i)

    for e in mm.elements:
        pin(element_var(e), e.kind)
    for r in mm.relationships:
        pin(relationship_var(r), r.kind)
    for d in mm.diagrams:
        pin(diagram_var(d.name), d.kind)
    if mm.model_kind is not None:
        pin(model_var(mm.name), mm.model_kind)
    return pins


def _exact(x: Expr, field: str, values: list[str], targets: tuple[str, ...]) -> Formula:
    """``x.field`` is exactly the pinned ``values``."""
    nav = Join(x, FieldRef(field))
    if values:
        return Equal(nav, union_all(Var(v) for v in values))
    return no(nav) if targets else TRUE


def _exact_kind(kind: str, catalog: MetamodelCatalog) -> Expr:
    """Atoms whose most specific signature is ``kind``."""
    e: Expr = SigRef(kind)
    for child in catalog.spec.children(kind):
        e = e - SigRef(child)
    return e


def _shared_goal(mm: MergedModel, catalog: MetamodelCatalog) -> list[Formula]:
    out = []
    for kind in sorted({s.kind for s in mm.shared}):
        declared = sorted({n for s in mm.shared if s.kind == kind for n in s.names})
        fields = [f.name for f in catalog.diagram_fields(mm.diagram_kind)
                  if f.name in NODE_FIELDS and accepts(f, kind, catalog)]
        pairs = []
        for a, b in combinations(mm.diagrams, 2):
            for fname in fields:
                pairs.append(Join(Var(diagram_var(a.name)), FieldRef(fname))
                             & Join(Var(diagram_var(b.name)), FieldRef(fname)))
        actual = union_all(pairs) & _exact_kind(kind, catalog) if pairs else union_all([])
        found = [n for n in declared if mm.element(kind, n) is not None]
        expected = union_all(Var(element_var(Element(kind, n))) for n in found)
        out.append(Equal(actual, expected))
        if len(found) < len(declared):
            out.append(FALSE)
    return out


def encode_instance(mm: MergedModel, catalog: MetamodelCatalog,
                    options: CheckOptions = CheckOptions()) -> Encoding:
    """Goal pinning every field tuple of ``mm``, with its exact scope and atom pinning."""
    scope = compute_scope(mm, catalog)
    universe = Universe(catalog.spec, scope)
    pins = _pinning(mm)
    spec = catalog.spec
    parts: list[Formula] = []

    def exact(var: str, owner: str, field: str, values: list[str]) -> None:
        decl = next(f for f in spec.fields_of(owner) if f.name == field)
        parts.append(_exact(Var(var), field, values, universe.field_targets(decl)))

    for r in mm.relationships:
        v = relationship_var(r)
        if r.is_structure:
            exact(v, r.kind, "head", [element_var(r.head)])
            exact(v, r.kind, "tail", [element_var(e) for e in r.tail])
            if r.expect_tail is not None and options.enabled("expect-mismatch"):
                parts.append(CardCmp(Join(Var(v), FieldRef("tail")), "=", r.expect_tail))
        elif r.kind == "Participation":
            exact(v, r.kind, "tact", [element_var(r.tact)])
            exact(v, r.kind, "user", [element_var(r.user)])
        else:
            exact(v, r.kind, "source", [element_var(r.source)])
            exact(v, r.kind, "target", [element_var(r.target)])
    for d in mm.diagrams:
        for f in spec.fields_of(d.kind):
            if f.name in d.nodes:
                values = [element_var(e) for e in d.nodes[f.name]]
            else:
                values = [relationship_var(r) for r in d.relationships
                          if RELATION_FIELD[r.kind] == f.name]
            exact(diagram_var(d.name), d.kind, f.name, values)
    if mm.model_kind is not None:
        fname, _ = MODEL_KINDS[mm.model_kind]
        exact(model_var(mm.name), mm.model_kind, fname, [diagram_var(d.name) for d in mm.diagrams])
        if options.enabled("shared-mismatch"):
            parts.extend(_shared_goal(mm, catalog))
    return Encoding(conj(*parts), scope, pins)


def validate_via_solver(mm: MergedModel, catalog: MetamodelCatalog,
                        options: CheckOptions = CheckOptions()) -> Verdict:
    """Look for up to two instances of the pinned encoding at its exact scope."""
    enc = encode_instance(mm, catalog, options)
    spec = catalog.spec_with(options.disabled)
    try:
        found = enumerate_instances(spec, enc.goal, enc.scope, limit=2, env=enc.pinning,
                                    budget=options.budget)
    except SearchBudgetExceeded:
        return Verdict(BUDGET_EXCEEDED, 0, (), enc.scope)
    outcome = {0: NONE, 1: UNIQUE}.get(len(found), MULTIPLE)
    return Verdict(outcome, len(found), tuple(found), enc.scope)
