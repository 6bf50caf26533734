"""Source positions and diagnostics."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True, order=True)
class Span:
    """A half-open character range ``[start, end)`` with 1-based line/column of its start."""

    start: int
    end: int
    line: int
    column: int

    def to_json(self) -> dict:
        return {"line": self.line, "column": self.column, "start": self.start, "end": self.end}

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    span: Span | None = None
    path: str | None = None

    def __str__(self) -> str:
        where = self.path or "<input>"
        if self.span is not None:
            where += f":{self.span}"
        return f"{where}: error[{self.code}]: {self.message}"


class DslError(Exception):
    """One or more diagnostics from parsing or name resolution."""

    def __init__(self, diagnostics: list[Diagnostic]) -> None:
        super().__init__("\n".join(str(d) for d in diagnostics))
        self.diagnostics = list(diagnostics)

    def with_path(self, path: str) -> DslError:
        return type(self)([Diagnostic(d.code, d.message, d.span, path) for d in self.diagnostics])


class DslSyntaxError(DslError):
    pass


class ResolveError(DslError):
    pass
