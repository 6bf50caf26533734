"""Textual front end: parsing, name resolution and pretty-printing."""

from .load import LoadError, load_workspace
from .parser import parse_source, tokenize
from .printer import format_workspace
from .resolve import resolve
from .syntax import SourceDocument

__all__ = ["parse_source", "tokenize", "resolve", "format_workspace", "SourceDocument",
           "load_workspace", "LoadError"]
