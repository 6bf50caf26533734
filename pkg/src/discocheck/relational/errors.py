from __future__ import annotations


class RelationalError(Exception):
    """Base class for errors raised by the relational engine."""


class UnknownNameError(RelationalError):
    def __init__(self, kind: str, name: str) -> None:
        super().__init__(f"unknown {kind} {name!r}")
        self.kind = kind
        self.name = name


class ArityError(RelationalError):
    pass


class ScopeError(RelationalError):
    pass


class SpecError(RelationalError):
    pass


class SearchBudgetExceeded(RelationalError):
    def __init__(self, budget: int) -> None:
        super().__init__(f"search budget of {budget} nodes exceeded")
        self.budget = budget
