"""Merging a model's diagrams on their common elements."""

from __future__ import annotations

from dataclasses import dataclass

from ..metamodel import DIAGRAM_TO_MODEL, MODEL_KINDS
from ..workspace import Diagram, Element, Model, Relationship, SharedDecl, Workspace
from .report import Finding


class MergeError(ValueError):
    pass


@dataclass(frozen=True)
class MergedModel:
    """The union of a model's diagrams, same-kind same-name elements identified.

    ``model_kind`` is None when a single diagram is checked on its own
    without the model-scoped rules; such a merge has no model atom.
    """

    model_kind: str | None
    name: str
    diagrams: tuple[Diagram, ...]
    elements: tuple[Element, ...]
    relationships: tuple[Relationship, ...]
    shared: tuple[SharedDecl, ...] = ()
    findings: tuple[Finding, ...] = ()

    @property
    def diagram_kind(self) -> str | None:
        return self.diagrams[0].kind if self.diagrams else None

    def element(self, kind: str, name: str) -> Element | None:
        el = Element(kind, name)
        return el if el in self.elements else None

    def names(self) -> set[str]:
        """Every name a finding about this subject may mention."""
        out = {self.name}
        out.update(d.name for d in self.diagrams)
        out.update(e.name for e in self.elements)
        out.update(r.name for r in self.relationships)
        return out


def shared_actual(diagrams: tuple[Diagram, ...], kind: str) -> set[str]:
    """Names of ``kind`` elements declared in at least two of ``diagrams``."""
    seen: dict[str, int] = {}
    for d in diagrams:
        for name in {e.name for e in d.elements() if e.kind == kind}:
            seen[name] = seen.get(name, 0) + 1
    return {n for n, c in seen.items() if c >= 2}


def _shared_findings(name: str, diagrams: tuple[Diagram, ...], shared: tuple[SharedDecl, ...],
                     elements: set[Element]) -> list[Finding]:
    out = []
    kinds = sorted({s.kind for s in shared})
    for kind in kinds:
        decls = [s for s in shared if s.kind == kind]
        declared = {n for s in decls for n in s.names}
        actual = shared_actual(diagrams, kind)
        if declared == actual:
            continue
        diff = sorted(declared ^ actual)
        named = tuple(n for n in diff if Element(kind, n) in elements) or (name,)
        msg = (f"{name} declares shared {kind} {{{', '.join(sorted(declared))}}}, "
               f"but its diagrams share {{{', '.join(sorted(actual))}}}")
        out.append(Finding("shared-mismatch", msg, named, tuple(s.span for s in decls if s.span)))
    return out


def _build(model_kind: str | None, name: str, diagrams: list[Diagram],
           shared: tuple[SharedDecl, ...]) -> MergedModel:
    unique = {d.name: d for d in diagrams}
    ordered = tuple(unique[n] for n in sorted(unique))
    elements: set[Element] = set()
    rels = []
    for d in ordered:
        elements.update(d.elements())
        for r in d.relationships:
            rels.append(r)
            # endpoints declared elsewhere still become elements; F6 reports them
            elements.update(r.endpoints())
    findings = _shared_findings(name, ordered, shared, elements)
    return MergedModel(model_kind, name, ordered, tuple(sorted(elements)), tuple(rels),
                       shared, tuple(findings))


def merge_model(model: Model, workspace: Workspace) -> MergedModel:
    """Merge the member diagrams of ``model``; listing order and repeats do not matter."""
    _, want = MODEL_KINDS[model.kind]
    members = []
    for n in model.diagrams:
        d = workspace.diagrams.get(n)
        if d is None:
            raise MergeError(f"model {model.name} lists unknown diagram {n}")
        if d.kind != want:
            raise MergeError(f"model {model.name} is a {model.kind} but {n} is a {d.kind}")
        members.append(d)
    return _build(model.kind, model.name, members, model.shared)


def diagram_as_model(d: Diagram, with_model: bool) -> MergedModel:
    """A single diagram viewed as a (possibly model-less) merge of itself."""
    return _build(DIAGRAM_TO_MODEL[d.kind] if with_model else None, d.name, [d], ())
