"""Name and kind binding from a parsed document to a typed :class:`Workspace`.

Only binding happens here.  Well-formedness (facts F1-F8) is the checker's
job, so a relationship may still reference an element declared in another
diagram; that reference resolves, and the checker reports it.
"""

from __future__ import annotations

from ..metamodel import NODE_FIELDS, MetamodelCatalog, accepts, declare_metamodel
from ..source import Diagnostic, ResolveError, Span
from ..workspace import (
    AGGREGATIONS, RELATION_FIELD, STRUCTURES, Diagram, Element, Model, Relationship,
    SharedDecl, System, Workspace,
)
from .syntax import DiagramDecl, FieldEntry, ModelDecl, Name, RelDecl, SourceDocument

DIAGRAM_KINDS = {
    "taskstructure": "TaskStDiagramView",
    "data": "DataDiagramView",
    "taskflow": "TaskFlowDiagramView",
    "state": "StateDiagramView",
    "collab": "CollabDiagramView",
}
MODEL_KINDWORDS = {
    "taskstructure": "TaskStModel",
    "data": "DataModel",
    "taskflow": "TaskFlowModel",
    "state": "StateModel",
    "collab": "CollabModel",
}
NODE_KINDS = {
    "task": "Task",
    "goal": "Goal",
    "actor": "Actor",
    "object": "Object",
    "assocclass": "AssociationClass",
    "state": "State",
}
REL_KINDS = {
    "gen": "Generalisation",
    "real": "Realisation",
    "agg": "Aggregation",
    "comp": "Composition",
    "parti": "Participation",
    "trans": "Transition",
}
KIND_KEYWORDS = {v: k for k, v in NODE_KINDS.items()}
REL_KEYWORDS = {v: k for k, v in REL_KINDS.items()}
DIAGRAM_KINDWORDS = {v: k for k, v in DIAGRAM_KINDS.items()}
MODEL_KINDWORD_OF = {v: k for k, v in MODEL_KINDWORDS.items()}

# relationship kind -> {field key: (expected element kinds, many?)}
_SLOTS: dict[str, dict[str, tuple[tuple[str, ...], bool]]] = {
    **{k: {"head": (("Node",), False), "tail": (("Node",), True)} for k in STRUCTURES - AGGREGATIONS},
    # Actors and Goals can never satisfy aggregation homogeneity, so they
    # are rejected as a typing error; mixing Tasks with Objects is left to F1.
    **{k: {"head": (("Task", "Object"), False), "tail": (("Task", "Object"), True)}
       for k in AGGREGATIONS},
    "Participation": {"tact": (("Task",), False), "user": (("Actor",), False)},
    "Transition": {"source": (("StateAndTask",), False), "target": (("StateAndTask",), False)},
}


class _Resolver:
    def __init__(self, doc: SourceDocument, catalog: MetamodelCatalog) -> None:
        self.doc = doc
        self.catalog = catalog
        self.errors: list[Diagnostic] = []
        # name -> elements declared anywhere, for cross-diagram references
        self.global_names: dict[str, list[Element]] = {}

    def error(self, code: str, message: str, span: Span | None) -> None:
        self.errors.append(Diagnostic(code, message, span, self.doc.path))

    def conforms(self, kind: str, expected: tuple[str, ...]) -> bool:
        return any(self.catalog.spec.conforms(kind, e) for e in expected)

    # -- diagrams ------------------------------------------------------------

    def node_field(self, diagram_kind: str, kind: str) -> str | None:
        for f in self.catalog.diagram_fields(diagram_kind):
            if f.name in NODE_FIELDS and accepts(f, kind, self.catalog):
                return f.name
        return None

    def declare_nodes(self, d: DiagramDecl, diagram_kind: str) -> dict[str, tuple[Element, ...]]:
        fields = [f.name for f in self.catalog.diagram_fields(diagram_kind) if f.name in NODE_FIELDS]
        nodes: dict[str, list[Element]] = {f: [] for f in fields}
        for entry in d.nodes:
            kind = NODE_KINDS[entry.keyword.text]
            fname = self.node_field(diagram_kind, kind)
            if fname is None:
                self.error("invalid-element-kind",
                           f"{entry.keyword.text} elements cannot appear in a "
                           f"{d.kind.text} diagram", entry.keyword.span)
                continue
            for n in entry.names:
                el = Element(kind, n.text)
                if el not in nodes[fname]:
                    nodes[fname].append(el)
        return {f: tuple(es) for f, es in nodes.items()}

    def lookup(self, name: Name, local: list[Element], expected: tuple[str, ...],
               what: str) -> Element | None:
        for pool in (local, self.global_names.get(name.text, [])):
            found = sorted({e for e in pool if e.name == name.text})
            if not found:
                continue
            typed = [e for e in found if self.conforms(e.kind, expected)]
            if len(typed) == 1:
                return typed[0]
            if len(typed) > 1:
                kinds = ", ".join(e.kind for e in typed)
                self.error("ambiguous-name", f"{name.text} in {what} could be any of: {kinds}", name.span)
                return None
            self.error("kind-mismatch",
                       f"{what} expects {' or '.join(expected)}, but {name.text} is a {found[0].kind}",
                       name.span)
            return None
        self.error("unknown-name", f"no element named {name.text} (in {what})", name.span)
        return None

    def relationship(self, r: RelDecl, d: DiagramDecl, diagram_kind: str,
                     local: list[Element]) -> Relationship | None:
        kind = REL_KINDS[r.keyword.text]
        fname = RELATION_FIELD[kind]
        allowed = {f.name for f in self.catalog.diagram_fields(diagram_kind)}
        if fname is None or fname not in allowed:
            self.error("invalid-relationship-kind",
                       f"{r.keyword.text} relationships cannot appear in a {d.kind.text} diagram",
                       r.keyword.span)
            return None
        slots = _SLOTS[kind]
        values: dict[str, object] = {}
        ok = True
        for f in r.fields:
            if f.key.text == "expect":
                if kind not in STRUCTURES:
                    self.error("invalid-field", f"{r.keyword.text} {r.name.text} has no tail to expect",
                               f.key.span)
                    ok = False
                values["expect_tail"] = f.count
                continue
            if f.key.text not in slots:
                self.error("invalid-field",
                           f"{r.keyword.text} {r.name.text} has no field {f.key.text}", f.key.span)
                ok = False
                continue
            values[f.key.text] = self.bind(f, slots[f.key.text], r, local)
            if values[f.key.text] is None:
                ok = False
        for key, (_, many) in slots.items():
            if key not in values and not many:
                self.error("missing-field", f"{r.keyword.text} {r.name.text} needs a {key}", r.name.span)
                ok = False
        if not ok:
            return None
        return Relationship(kind, r.name.text, d.name.text, span=r.span, **values)

    def bind(self, f: FieldEntry, slot: tuple[tuple[str, ...], bool], r: RelDecl,
             local: list[Element]):
        expected, many = slot
        what = f"field {f.key.text} of {r.name.text}"
        bound = [self.lookup(n, local, expected, what) for n in f.values]
        if any(b is None for b in bound):
            return None
        if not many:
            return bound[0]
        return tuple(dict.fromkeys(bound))

    def diagram(self, d: DiagramDecl) -> Diagram:
        kind = DIAGRAM_KINDS[d.kind.text]
        nodes = self.declare_nodes(d, kind)
        local = [e for es in nodes.values() for e in es]
        rels = []
        for r in d.relationships:
            rel = self.relationship(r, d, kind, local)
            if rel is not None:
                rels.append(rel)
        return Diagram(kind, d.name.text, nodes, tuple(rels), d.span)

    # -- models and systems --------------------------------------------------

    def model(self, m: ModelDecl, diagrams: dict[str, Diagram]) -> Model:
        kind = MODEL_KINDWORDS[m.kind.text]
        want = DIAGRAM_KINDS[m.kind.text]
        for n in m.diagrams:
            d = diagrams.get(n.text)
            if d is None:
                self.error("unknown-name", f"no diagram named {n.text}", n.span)
            elif d.kind != want:
                self.error("wrong-diagram-kind-in-model",
                           f"{n.text} is a {DIAGRAM_KINDWORDS[d.kind]} diagram, but "
                           f"{m.name.text} is a {m.kind.text} model", n.span)
        shared = tuple(SharedDecl(NODE_KINDS[s.keyword.text], tuple(n.text for n in s.names), s.span)
                       for s in m.shared)
        return Model(kind, m.name.text, tuple(dict.fromkeys(n.text for n in m.diagrams)), shared, m.span)

    def run(self) -> Workspace:
        for d in self.doc.diagrams:
            kind = DIAGRAM_KINDS[d.kind.text]
            for entry in d.nodes:
                el_kind = NODE_KINDS[entry.keyword.text]
                if self.node_field(kind, el_kind) is None:
                    continue
                for n in entry.names:
                    pool = self.global_names.setdefault(n.text, [])
                    if Element(el_kind, n.text) not in pool:
                        pool.append(Element(el_kind, n.text))
        ws = Workspace()
        for d in self.doc.diagrams:
            ws.diagrams[d.name.text] = self.diagram(d)
        for m in self.doc.models:
            ws.models[m.name.text] = self.model(m, ws.diagrams)
        for s in self.doc.systems:
            for n in s.models:
                if n.text not in ws.models:
                    self.error("unknown-name", f"no model named {n.text}", n.span)
            ws.systems[s.name.text] = System(s.name.text, tuple(dict.fromkeys(n.text for n in s.models)),
                                             s.span)
        return ws


def resolve(doc: SourceDocument, catalog: MetamodelCatalog | None = None) -> Workspace:
    """Bind every name in ``doc``; raise :class:`ResolveError` listing all problems."""
    resolver = _Resolver(doc, catalog or declare_metamodel())
    ws = resolver.run()
    if resolver.errors:
        raise ResolveError(sorted(resolver.errors, key=lambda e: e.span.start if e.span else -1))
    return ws
