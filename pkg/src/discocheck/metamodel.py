"""The Discovery abstract-syntax metamodel.

Element kinds are arranged as several short trees rather than one tree under
a common root: nodes, relationships, diagram views, models and systems each
have their own root, plus two empty skeleton roots (``TaskFlowElement`` and
``Member``) kept so scopes list them explicitly.

Well-formedness facts::

    F1  aggregation endpoints are all Tasks or all Objects
    F2  no structure has its head among its tail
    F3  per model, the composition whole->part graph is acyclic
    F4  per model, no node is a part of two distinct compositions
    F5  per model, the generalisation graph is acyclic
    F6  a diagram's relationships only reference that diagram's nodes
    F7  a system holds at most one model of each kind
    F8  every structure has at least one tail member
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

from .relational.ast import (
    Acyclic, CardCmp, DomRestrict, Expr, FieldRef, Formula, In, Join, Not, SigRef, Var,
    all_of, conj, disj, some, union_all,
)
from .relational.errors import UnknownNameError
from .relational.spec import FieldDecl, SignatureDecl, Spec


class UnknownSignatureError(UnknownNameError):
    def __init__(self, name: str) -> None:
        super().__init__("signature", name)


class NotADiagramKindError(ValueError):
    def __init__(self, name: str) -> None:
        super().__init__(f"{name} is not a concrete diagram kind")
        self.name = name


# model kind -> (field holding its diagrams, diagram kind)
MODEL_KINDS: dict[str, tuple[str, str]] = {
    "TaskStModel": ("tm", "TaskStDiagramView"),
    "DataModel": ("dm", "DataDiagramView"),
    "TaskFlowModel": ("fm", "TaskFlowDiagramView"),
    "StateModel": ("sm", "StateDiagramView"),
    "CollabModel": ("cm", "CollabDiagramView"),
}
DIAGRAM_TO_MODEL = {diagram: model for model, (_, diagram) in MODEL_KINDS.items()}

NODE_FIELDS = ("task", "goal", "actor", "obj", "cls")
STRUCTURE_FIELDS = ("gen", "real", "agg", "comp")
STRUCTURE_KINDS = ("Generalisation", "Realisation", "Aggregation", "Composition")

RULES: dict[str, str] = {
    "F1": "an aggregation or composition relates only Tasks or only Objects, never a mix",
    "F2": "a structure relationship does not list its head among its tail",
    "F3": "the whole-part graph of a model's compositions is acyclic",
    "F4": "within a model, a node is a part of at most one composition",
    "F5": "the generalisation graph of a model is acyclic",
    "F6": "a diagram's relationships reference only nodes declared in that diagram",
    "F7": "a system includes at most one model of each kind",
    "F8": "a structure relationship has at least one tail member",
    "expect-mismatch": "a relationship's tail size differs from its 'expect tail' annotation",
    "shared-mismatch": "a model's 'shared' declaration differs from the elements its diagrams actually share",
    "no-instance": "the solver found no instance at the exact scope, so the model is not well-formed",
    "multiple-instances": "the solver found more than one instance; the encoding is under-constrained",
}
FACT_IDS = tuple(f"F{i}" for i in range(1, 9))


def _f(name: str, owner: str, target: str, mult: str = "set", exclude: str | None = None) -> FieldDecl:
    return FieldDecl(name, owner, target, mult, exclude)


def _signatures() -> tuple[SignatureDecl, ...]:
    S = SignatureDecl
    ts, dd = "TaskStDiagramView", "DataDiagramView"
    return (
        S("Node", is_abstract=True),
        S("Actor", parent="Node"),
        S("Goal", parent="Node"),
        S("Object", parent="Node"),
        S("AssociationClass", parent="Object"),
        S("StateAndTask", is_abstract=True, parent="Node"),
        S("State", parent="StateAndTask"),
        S("TaskActivity", is_abstract=True, parent="StateAndTask"),
        S("Task", parent="TaskActivity"),
        S("Relationship", is_abstract=True),
        S("Structure", is_abstract=True, parent="Relationship",
          fields=(_f("head", "Structure", "Node", "one"), _f("tail", "Structure", "Node"))),
        S("Generalisation", parent="Structure"),
        S("Realisation", parent="Structure"),
        S("Aggregation", parent="Structure"),
        S("Composition", parent="Aggregation"),
        S("Participation", parent="Relationship",
          fields=(_f("tact", "Participation", "Task", "one"),
                  _f("user", "Participation", "Actor", "one"))),
        S("Transition", parent="Relationship",
          fields=(_f("source", "Transition", "StateAndTask", "one"),
                  _f("target", "Transition", "StateAndTask", "one"))),
        S("TaskFlowElement", is_abstract=True),
        S("Member", is_abstract=True),
        S("DiagramView", is_abstract=True),
        S(ts, parent="DiagramView", fields=(
            _f("task", ts, "Task"),
            _f("goal", ts, "Goal"),
            _f("gen", ts, "Generalisation"),
            _f("real", ts, "Realisation"),
            _f("agg", ts, "Aggregation", exclude="Composition"),
            _f("comp", ts, "Composition"),
            _f("actor", ts, "Actor"),
            _f("obj", ts, "Object", exclude="AssociationClass"),
            _f("parti", ts, "Participation"),
        )),
        S(dd, parent="DiagramView", fields=(
            _f("cls", dd, "Object"),
            _f("gen", dd, "Generalisation"),
            _f("real", dd, "Realisation"),
            _f("agg", dd, "Aggregation", exclude="Composition"),
            _f("comp", dd, "Composition"),
        )),
        S("TaskFlowDiagramView", parent="DiagramView"),
        S("StateDiagramView", parent="DiagramView"),
        S("CollabDiagramView", parent="DiagramView"),
        S("Model", is_abstract=True),
        *(S(model, parent="Model", fields=(_f(fname, model, diagram),))
          for model, (fname, diagram) in MODEL_KINDS.items()),
        S("System", fields=(_f("models", "System", "Model"),)),
    )


def _nav(e: Expr, name: str) -> Expr:
    return Join(e, FieldRef(name))


def model_diagrams(m: Expr) -> Expr:
    """All diagrams of model ``m``, whatever its kind."""
    return union_all(_nav(m, fname) for fname, _ in MODEL_KINDS.values())


def whole_part(structures: Expr) -> Expr:
    """Binary head -> tail-member relation induced by a set of structures."""
    return Join(~DomRestrict(structures, FieldRef("head")), DomRestrict(structures, FieldRef("tail")))


def diagram_nodes(d: Expr) -> Expr:
    return union_all(_nav(d, f) for f in NODE_FIELDS)


def diagram_structures(d: Expr) -> Expr:
    return union_all(_nav(d, f) for f in STRUCTURE_FIELDS)


def homogeneous(a: Expr) -> Formula:
    ends = _nav(a, "head") + _nav(a, "tail")
    return disj(In(ends, SigRef("Task")), In(ends, SigRef("Object")))


def _facts() -> dict[str, Formula]:
    a, s, m, n, d, y = (Var(v) for v in "asmndy")
    comps = _nav(model_diagrams(m), "comp")
    gens = _nav(model_diagrams(m), "gen")
    structs = diagram_structures(d)
    endpoints = (_nav(structs, "head") + _nav(structs, "tail")
                 + _nav(_nav(d, "parti"), "tact") + _nav(_nav(d, "parti"), "user"))
    return {
        "F1": all_of("a", SigRef("Aggregation"), homogeneous(a)),
        "F2": all_of("s", SigRef("Structure"), Not(In(_nav(s, "head"), _nav(s, "tail")))),
        "F3": all_of("m", SigRef("Model"), Acyclic(whole_part(comps))),
        "F4": all_of("m", SigRef("Model"), all_of("n", SigRef("Node"), CardCmp(
            Join(FieldRef("tail"), n) & comps, "<=", 1))),
        "F5": all_of("m", SigRef("Model"), Acyclic(whole_part(gens))),
        "F6": all_of("d", SigRef("DiagramView"), In(endpoints, diagram_nodes(d))),
        "F7": all_of("y", SigRef("System"), conj(*(
            CardCmp(_nav(y, "models") & SigRef(kind), "<=", 1) for kind in MODEL_KINDS))),
        "F8": all_of("s", SigRef("Structure"), some(_nav(s, "tail"))),
    }


@dataclass(frozen=True, eq=False)
class MetamodelCatalog:
    spec: Spec
    rule_index: Mapping[str, str]

    def conforms(self, kind: str, ancestor: str) -> bool:
        return conforms(kind, ancestor, self)

    def diagram_fields(self, diagram_kind: str) -> list[FieldDecl]:
        return diagram_fields(diagram_kind, self)

    def spec_with(self, disabled: Iterable[str] = ()) -> Spec:
        """The relational Spec restricted to the facts not listed in ``disabled``."""
        off = set(disabled)
        return self.spec.with_facts(f for f in self.spec.facts if f not in off)

    def describe(self, rule: str) -> str:
        return self.rule_index[rule]


@lru_cache(maxsize=None)
def declare_metamodel() -> MetamodelCatalog:
    """The metamodel as a relational Spec with facts F1-F8.

    The result is cached and immutable; every call returns the same catalog.
    """
    spec = Spec(_signatures(), _facts())
    catalog = MetamodelCatalog(spec, dict(RULES))
    assert tuple(spec.facts) == FACT_IDS
    assert all(fid in catalog.rule_index for fid in spec.facts)
    assert [f.name for f in diagram_fields("TaskStDiagramView", catalog)] == [
        "task", "goal", "gen", "real", "agg", "comp", "actor", "obj", "parti"]
    return catalog


def _require(name: str, catalog: MetamodelCatalog) -> None:
    if not catalog.spec.has_sig(name):
        raise UnknownSignatureError(name)


def conforms(kind: str, ancestor: str, catalog: MetamodelCatalog) -> bool:
    """True iff ``kind`` is ``ancestor`` or lies below it in the forest."""
    _require(kind, catalog)
    _require(ancestor, catalog)
    return catalog.spec.conforms(kind, ancestor)


def diagram_fields(diagram_kind: str, catalog: MetamodelCatalog) -> list[FieldDecl]:
    _require(diagram_kind, catalog)
    sig = catalog.spec.sig(diagram_kind)
    if sig.is_abstract or not conforms(diagram_kind, "DiagramView", catalog):
        raise NotADiagramKindError(diagram_kind)
    return list(catalog.spec.fields_of(diagram_kind))


def accepts(f: FieldDecl, kind: str, catalog: MetamodelCatalog) -> bool:
    """Whether atoms of ``kind`` may appear in field ``f``'s target set."""
    spec = catalog.spec
    return spec.conforms(kind, f.target) and not (f.exclude and spec.conforms(kind, f.exclude))
