"""Resolved Discovery artifacts: elements, relationships, diagrams, models, systems."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from .source import Span

# relationship kind -> diagram element-set field
RELATION_FIELD = {
    "Generalisation": "gen",
    "Realisation": "real",
    "Aggregation": "agg",
    "Composition": "comp",
    "Participation": "parti",
    "Transition": None,
}
STRUCTURES = frozenset({"Generalisation", "Realisation", "Aggregation", "Composition"})
AGGREGATIONS = frozenset({"Aggregation", "Composition"})


@dataclass(frozen=True, order=True)
class Element:
    """A named node of the notation; identity is (kind, name)."""

    kind: str
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Relationship:
    kind: str
    name: str
    diagram: str
    head: Element | None = None
    tail: tuple[Element, ...] = ()
    tact: Element | None = None
    user: Element | None = None
    source: Element | None = None
    target: Element | None = None
    expect_tail: int | None = None
    span: Span | None = field(default=None, compare=False, repr=False)

    @property
    def is_structure(self) -> bool:
        return self.kind in STRUCTURES

    def endpoints(self) -> list[Element]:
        ends = [self.head, *self.tail, self.tact, self.user, self.source, self.target]
        return [e for e in ends if e is not None]


@dataclass(frozen=True)
class Diagram:
    kind: str
    name: str
    nodes: dict[str, tuple[Element, ...]] = field(default_factory=dict)
    relationships: tuple[Relationship, ...] = ()
    span: Span | None = field(default=None, compare=False, repr=False)

    def elements(self) -> list[Element]:
        return [e for es in self.nodes.values() for e in es]

    def relations(self, field_name: str) -> tuple[Relationship, ...]:
        return tuple(r for r in self.relationships if RELATION_FIELD[r.kind] == field_name)


@dataclass(frozen=True)
class SharedDecl:
    kind: str
    names: tuple[str, ...]
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Model:
    kind: str
    name: str
    diagrams: tuple[str, ...]
    shared: tuple[SharedDecl, ...] = ()
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class System:
    name: str
    models: tuple[str, ...]
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass
class Workspace:
    diagrams: dict[str, Diagram] = field(default_factory=dict)
    models: dict[str, Model] = field(default_factory=dict)
    systems: dict[str, System] = field(default_factory=dict)

    def __iter__(self) -> Iterator[Diagram | Model | System]:
        yield from self.diagrams.values()
        yield from self.models.values()
        yield from self.systems.values()
