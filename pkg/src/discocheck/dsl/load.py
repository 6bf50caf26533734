"""Reading, parsing and resolving workspace files."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

from ..metamodel import MetamodelCatalog
from ..source import Diagnostic, DslError, ResolveError
from ..workspace import Workspace
from .parser import parse_source
from .resolve import resolve
from .syntax import SourceDocument


class LoadError(DslError):
    """A file could not be read."""


def load_workspace(paths: Iterable[str | Path], catalog: MetamodelCatalog | None = None) -> Workspace:
    """Parse every file, then resolve them together as one workspace.

    Raises :class:`LoadError`, ``DslSyntaxError`` or ``ResolveError``.
    """
    paths = [str(p) for p in paths]
    docs: list[SourceDocument] = []
    for p in paths:
        try:
            text = Path(p).read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            reason = exc.strerror if isinstance(exc, OSError) and exc.strerror else str(exc)
            raise LoadError([Diagnostic("unreadable-file", f"cannot read {p}: {reason}", None, p)]) from exc
        docs.append(parse_source(text, p))
    seen: dict[str, str] = {}
    clashes = []
    for doc in docs:
        for name, span in doc.spans().items():
            if name in seen:
                clashes.append(Diagnostic("duplicate-name", f"{name} is also declared in {seen[name]}",
                                          span, doc.path))
            else:
                seen[name] = doc.path or "<input>"
    if clashes:
        raise ResolveError(clashes)
    try:
        return resolve(SourceDocument.combine(docs), catalog)
    except ResolveError as exc:
        raise exc.with_path(paths[0]) if len(paths) == 1 else exc
