"""Pretty-printer producing ``.disco`` text from a resolved workspace."""

from __future__ import annotations

from itertools import groupby

from ..workspace import Diagram, Model, Relationship, System, Workspace
from .resolve import DIAGRAM_KINDWORDS, KIND_KEYWORDS, MODEL_KINDWORD_OF, REL_KEYWORDS


def _relationship(r: Relationship) -> str:
    parts = []
    for key in ("head", "tact", "user", "source", "target"):
        el = getattr(r, key)
        if el is not None:
            parts.append(f"{key} {el.name};")
    if r.tail:
        parts.append("tail " + ", ".join(e.name for e in r.tail) + ";")
    if r.expect_tail is not None:
        parts.append(f"expect tail = {r.expect_tail};")
    return f"  {REL_KEYWORDS[r.kind]} {r.name} {{ {' '.join(parts)} }}"


def format_diagram(d: Diagram) -> str:
    lines = [f"diagram {DIAGRAM_KINDWORDS[d.kind]} {d.name} {{"]
    for els in d.nodes.values():
        # one line per run of same-kind elements keeps the field order intact
        for kind, run in groupby(els, key=lambda e: e.kind):
            lines.append(f"  {KIND_KEYWORDS[kind]} {', '.join(e.name for e in run)};")
    lines.extend(_relationship(r) for r in d.relationships)
    lines.append("}")
    return "\n".join(lines)


def format_model(m: Model) -> str:
    lines = [f"model {MODEL_KINDWORD_OF[m.kind]} {m.name} {{"]
    if m.diagrams:
        lines.append(f"  diagrams {', '.join(m.diagrams)};")
    for s in m.shared:
        lines.append(f"  shared {KIND_KEYWORDS[s.kind]} {', '.join(s.names)};")
    lines.append("}")
    return "\n".join(lines)


def format_system(s: System) -> str:
    body = f"  models {', '.join(s.models)};\n" if s.models else ""
    return f"system {s.name} {{\n{body}}}"


def format_workspace(ws: Workspace) -> str:
    """Source text that parses and resolves back to an equal workspace."""
    chunks = [format_diagram(d) for d in ws.diagrams.values()]
    chunks += [format_model(m) for m in ws.models.values()]
    chunks += [format_system(s) for s in ws.systems.values()]
    return "\n\n".join(chunks) + ("\n" if chunks else "")
