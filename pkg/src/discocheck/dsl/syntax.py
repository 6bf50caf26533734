"""Unresolved syntax tree of a ``.disco`` document."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..source import Span

KINDWORDS = ("taskstructure", "data", "taskflow", "state", "collab")
NODE_KEYWORDS = ("task", "goal", "actor", "object", "assocclass", "state")
REL_KEYWORDS = ("gen", "real", "agg", "comp", "parti", "trans")
FIELD_KEYWORDS = ("head", "tail", "tact", "user", "source", "target", "expect")


@dataclass(frozen=True)
class Name:
    text: str
    span: Span


@dataclass
class NodeEntry:
    keyword: Name
    names: list[Name]
    span: Span


@dataclass
class FieldEntry:
    key: Name
    values: list[Name]
    span: Span
    count: int | None = None  # for ``expect tail = N``


@dataclass
class RelDecl:
    keyword: Name
    name: Name
    fields: list[FieldEntry]
    span: Span


@dataclass
class DiagramDecl:
    kind: Name
    name: Name
    nodes: list[NodeEntry] = field(default_factory=list)
    relationships: list[RelDecl] = field(default_factory=list)
    span: Span | None = None


@dataclass
class ModelDecl:
    kind: Name
    name: Name
    diagrams: list[Name] = field(default_factory=list)
    shared: list[NodeEntry] = field(default_factory=list)
    span: Span | None = None


@dataclass
class SystemDecl:
    name: Name
    models: list[Name] = field(default_factory=list)
    span: Span | None = None


@dataclass
class SourceDocument:
    diagrams: list[DiagramDecl] = field(default_factory=list)
    models: list[ModelDecl] = field(default_factory=list)
    systems: list[SystemDecl] = field(default_factory=list)
    path: str | None = None

    def spans(self) -> dict[str, Span]:
        """Top-level name -> span of its declaration."""
        out = {}
        for decl in [*self.diagrams, *self.models, *self.systems]:
            out[decl.name.text] = decl.name.span
        return out

    @classmethod
    def combine(cls, docs: list[SourceDocument]) -> SourceDocument:
        out = cls()
        for d in docs:
            out.diagrams.extend(d.diagrams)
            out.models.extend(d.models)
            out.systems.extend(d.systems)
        return out
