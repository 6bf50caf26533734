"""Result types shared by both checking back ends."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..relational.search import DEFAULT_BUDGET
from ..relational.spec import Instance, Scope
from ..source import Span

VALID, INVALID, BUDGET_EXCEEDED = "valid", "invalid", "budget-exceeded"
UNIQUE, NONE, MULTIPLE = "unique-instance", "no-instance", "multiple-instances"


@dataclass(frozen=True, order=True)
class Finding:
    """One violated rule, attributed to the elements involved."""

    rule: str
    message: str
    elements: tuple[str, ...]
    spans: tuple[Span, ...] = field(default=(), compare=False)

    @property
    def span(self) -> Span | None:
        return min(self.spans) if self.spans else None


@dataclass(frozen=True)
class Verdict:
    """Outcome of validating a model by exact-scope model finding."""

    outcome: str
    count: int
    instances: tuple[Instance, ...] = ()
    scope: Scope | None = None

    @property
    def as_report_verdict(self) -> str:
        return {UNIQUE: VALID, NONE: INVALID, MULTIPLE: INVALID}.get(self.outcome, BUDGET_EXCEEDED)


@dataclass(frozen=True)
class Report:
    level: str
    subject: str
    verdict: str
    findings: tuple[Finding, ...] = ()
    backend: str = "eval"
    scope: Scope | None = None
    timing_ms: float = 0.0
    children: tuple[Report, ...] = ()
    solver: Verdict | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "findings", tuple(sorted(set(self.findings))))
        assert (self.verdict == VALID) == (not self.findings), "verdict must match findings"

    @property
    def rules(self) -> set[str]:
        return {f.rule for f in self.findings}

    def all_reports(self) -> list[Report]:
        out = [self]
        for c in self.children:
            out.extend(c.all_reports())
        return out


@dataclass(frozen=True)
class CheckOptions:
    """Rule toggles and limits for one check run."""

    disabled: frozenset[str] = frozenset()
    degenerate_diagram_rules: bool = False
    budget: int = DEFAULT_BUDGET

    def __post_init__(self) -> None:
        object.__setattr__(self, "disabled", frozenset(self.disabled))

    def enabled(self, rule: str) -> bool:
        return rule not in self.disabled
