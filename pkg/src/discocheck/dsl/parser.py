"""Lexer and recursive-descent parser for ``.disco`` documents.

Grammar (``//`` starts a comment; commas in identifier lists are optional)::

    document   := (diagram | model | system)*
    diagram    := "diagram" kindword IDENT "{" entry* "}"
    entry      := nodekw identlist ";" | relkw IDENT "{" field* "}"
    field      := ("head" IDENT | "tail" identlist | "tact" IDENT | "user" IDENT
                  | "source" IDENT | "target" IDENT | "expect" "tail" "=" INT) ";"
    model      := "model" kindword IDENT "{" "diagrams" identlist ";"
                  ("shared" nodekw identlist ";")* "}"
    system     := "system" IDENT "{" "models" identlist ";" "}"

Keywords are contextual, so an element may be called ``task``.  The parser
recovers at ``;`` and ``}`` and reports every error it finds; it never
returns a partial document.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..source import Diagnostic, DslSyntaxError, Span
from .syntax import (
    FIELD_KEYWORDS, KINDWORDS, NODE_KEYWORDS, REL_KEYWORDS, DiagramDecl, FieldEntry,
    ModelDecl, Name, NodeEntry, RelDecl, SourceDocument, SystemDecl,
)

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<int>[0-9]+)
  | (?P<punct>[{};,=])
""", re.VERBOSE)

_TOP = ("diagram", "model", "system")
_SINGLE = {"head", "tact", "user", "source", "target"}


@dataclass(frozen=True)
class Token:
    kind: str  # ident | int | punct | eof
    text: str
    span: Span


def tokenize(text: str) -> tuple[list[Token], list[Diagnostic]]:
    tokens: list[Token] = []
    errors: list[Diagnostic] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            span = Span(pos, pos + 1, line, pos - line_start + 1)
            errors.append(Diagnostic("unexpected-character", f"unexpected character {text[pos]!r}", span))
            if text[pos] == "\n":
                line, line_start = line + 1, pos + 1
            pos += 1
            continue
        kind = m.lastgroup
        span = Span(pos, m.end(), line, pos - line_start + 1)
        if kind in ("ident", "int", "punct"):
            tokens.append(Token(kind, m.group(), span))
        newlines = m.group().count("\n")
        if newlines:
            line += newlines
            line_start = pos + m.group().rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", Span(len(text), len(text), line, len(text) - line_start + 1)))
    return tokens, errors


class _Recover(Exception):
    pass


class Parser:
    def __init__(self, text: str) -> None:
        self.tokens, self.errors = tokenize(text)
        self.pos = 0

    # -- token helpers -------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tok
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, text: str) -> bool:
        return self.tok.kind in ("ident", "punct") and self.tok.text == text

    def error(self, code: str, message: str, span: Span | None = None) -> None:
        self.errors.append(Diagnostic(code, message, span or self.tok.span))

    def fail(self, expected: str) -> None:
        found = "end of input" if self.tok.kind == "eof" else repr(self.tok.text)
        self.error("syntax-error", f"expected {expected}, found {found}")
        raise _Recover

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(repr(text))
        return self.advance()

    def ident(self, what: str = "identifier") -> Name:
        if self.tok.kind != "ident":
            self.fail(what)
        tok = self.advance()
        return Name(tok.text, tok.span)

    def keyword(self, allowed: tuple[str, ...], what: str) -> Name:
        if self.tok.kind != "ident" or self.tok.text not in allowed:
            self.fail(f"{what} ({', '.join(allowed)})")
        return self.ident()

    def identlist(self) -> list[Name]:
        names = [self.ident()]
        while True:
            if self.at(","):
                self.advance()
                names.append(self.ident())
            elif self.tok.kind == "ident":
                names.append(self.ident())
            else:
                return names

    def sync(self) -> None:
        """Skip to just past the next ``;`` or up to the next ``}``."""
        while self.tok.kind != "eof":
            if self.at(";"):
                self.advance()
                return
            if self.at("}"):
                return
            self.advance()

    def close_block(self) -> Span:
        """Consume the closing ``}`` of a block, skipping junk before it."""
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.error("syntax-error", "expected '}', found end of input")
                return self.tok.span
            self.advance()
        return self.advance().span

    # -- grammar -------------------------------------------------------------

    def document(self) -> SourceDocument:
        doc = SourceDocument()
        while self.tok.kind != "eof":
            start = self.pos
            try:
                if self.at("diagram"):
                    doc.diagrams.append(self.diagram())
                elif self.at("model"):
                    doc.models.append(self.model())
                elif self.at("system"):
                    doc.systems.append(self.system())
                else:
                    self.fail("'diagram', 'model' or 'system'")
            except _Recover:
                if self.pos == start:
                    self.advance()
                while self.tok.kind != "eof" and not (
                        self.tok.kind == "ident" and self.tok.text in _TOP):
                    self.advance()
        self._check_duplicates(doc)
        return doc

    def _span_from(self, start: Span, end: Span) -> Span:
        return Span(start.start, end.end, start.line, start.column)

    def diagram(self) -> DiagramDecl:
        start = self.expect("diagram").span
        kind = self.keyword(KINDWORDS, "diagram kind")
        decl = DiagramDecl(kind, self.ident("diagram name"))
        self.expect("{")
        while not self.at("}") and self.tok.kind != "eof":
            try:
                if self.tok.kind == "ident" and self.tok.text in NODE_KEYWORDS:
                    kw = self.ident()
                    names = self.identlist()
                    end = self.expect(";").span
                    decl.nodes.append(NodeEntry(kw, names, self._span_from(kw.span, end)))
                elif self.tok.kind == "ident" and self.tok.text in REL_KEYWORDS:
                    decl.relationships.append(self.relationship())
                else:
                    self.fail("element or relationship keyword")
            except _Recover:
                self.sync()
        decl.span = self._span_from(start, self.close_block())
        return decl

    def relationship(self) -> RelDecl:
        kw = self.ident()
        name = self.ident("relationship name")
        self.expect("{")
        fields: list[FieldEntry] = []
        while not self.at("}") and self.tok.kind != "eof":
            try:
                fields.append(self.field())
            except _Recover:
                self.sync()
        end = self.close_block()
        return RelDecl(kw, name, fields, self._span_from(kw.span, end))

    def field(self) -> FieldEntry:
        key = self.keyword(FIELD_KEYWORDS, "field")
        count = None
        if key.text == "expect":
            self.expect("tail")
            self.expect("=")
            if self.tok.kind != "int":
                self.fail("integer")
            count = int(self.advance().text)
            values: list[Name] = []
        elif key.text in _SINGLE:
            values = [self.ident()]
        else:
            values = self.identlist()
        end = self.expect(";").span
        return FieldEntry(key, values, self._span_from(key.span, end), count)

    def model(self) -> ModelDecl:
        start = self.expect("model").span
        kind = self.keyword(KINDWORDS, "model kind")
        decl = ModelDecl(kind, self.ident("model name"))
        self.expect("{")
        try:
            self.expect("diagrams")
            decl.diagrams = self.identlist()
            self.expect(";")
        except _Recover:
            self.sync()
        while not self.at("}") and self.tok.kind != "eof":
            try:
                kw = self.expect("shared")
                node_kw = self.keyword(NODE_KEYWORDS, "element keyword")
                names = self.identlist()
                end = self.expect(";").span
                decl.shared.append(NodeEntry(node_kw, names, self._span_from(kw.span, end)))
            except _Recover:
                self.sync()
        decl.span = self._span_from(start, self.close_block())
        return decl

    def system(self) -> SystemDecl:
        start = self.expect("system").span
        decl = SystemDecl(self.ident("system name"))
        self.expect("{")
        try:
            self.expect("models")
            decl.models = self.identlist()
            self.expect(";")
        except _Recover:
            self.sync()
        decl.span = self._span_from(start, self.close_block())
        return decl

    def _check_duplicates(self, doc: SourceDocument) -> None:
        seen: dict[str, Name] = {}
        for decl in [*doc.diagrams, *doc.models, *doc.systems]:
            if decl.name.text in seen:
                self.error("duplicate-name", f"{decl.name.text} is already declared", decl.name.span)
            seen.setdefault(decl.name.text, decl.name)
        for d in doc.diagrams:
            per_kind: dict[tuple[str, str], Name] = {}
            for entry in d.nodes:
                for n in entry.names:
                    key = (entry.keyword.text, n.text)
                    if key in per_kind:
                        self.error("duplicate-element-name",
                                   f"{entry.keyword.text} {n.text} is declared twice in {d.name.text}",
                                   n.span)
                    per_kind.setdefault(key, n)
            rels: set[str] = set()
            for r in d.relationships:
                if r.name.text in rels:
                    self.error("duplicate-relationship-name",
                               f"relationship {r.name.text} is declared twice in {d.name.text}",
                               r.name.span)
                rels.add(r.name.text)
                keys: set[str] = set()
                for f in r.fields:
                    if f.key.text in keys:
                        self.error("duplicate-field", f"{f.key.text} given twice in {r.name.text}", f.key.span)
                    keys.add(f.key.text)


def parse_source(text: str, path: str | None = None) -> SourceDocument:
    """Parse a document; raise :class:`DslSyntaxError` listing every error."""
    parser = Parser(text)
    doc = parser.document()
    doc.path = path
    if parser.errors:
        errors = sorted(parser.errors, key=lambda d: (d.span.start if d.span else -1))
        raise DslSyntaxError([Diagnostic(e.code, e.message, e.span, path) for e in errors])
    return doc
