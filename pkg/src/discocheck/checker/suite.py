"""Built-in assertions that regression-test the metamodel facts.

Each assertion is checked at every exact scope of its signature slice;
signatures outside the slice get 0.  A slice holds the signatures an
assertion can observe: for the composition assertions one node kind,
``Composition``, and the diagram and model kinds that carry compositions;
for aggregation homogeneity the node kinds and aggregations.

Slice counts range over ``0..max_scope``, except that diagram and model
counts are capped at 1 for the composition assertions (``collapse=True``).
Both assertions talk about one model at a time, so any counterexample
collapses to one with a single model holding a single diagram: keep the
offending model, merge its diagrams into one, drop everything else.  Every
fact still holds after the collapse and the violation is preserved.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from ..metamodel import MetamodelCatalog, model_diagrams, whole_part
from ..relational.ast import (
    Diff, FieldRef, Formula, In, Intersect, Join, Not, SigRef, TransClosure, Var, all_of, conj, no,
    some,
)
from ..relational.errors import SearchBudgetExceeded
from ..relational.search import DEFAULT_BUDGET, check_assertion
from ..relational.spec import Instance, Scope


def _nav(e, name: str):
    return Join(e, FieldRef(name))


def _model_comps(m):
    return _nav(model_diagrams(m), "comp")


def assertion_no_composition_cycle() -> Formula:
    """No node is, transitively, a composition part of itself within a model."""
    m, n = Var("m"), Var("n")
    parts = TransClosure(whole_part(_model_comps(m)))
    return all_of("m", SigRef("Model"), all_of("n", SigRef("Node"), Not(In(n, Join(n, parts)))))


def assertion_single_owner() -> Formula:
    """Within a model, two different compositions never share a part."""
    m, c = Var("m"), Var("c")
    others = Diff(_model_comps(m), c)
    return all_of("m", SigRef("Model"), all_of("c", _model_comps(m), no(
        Intersect(_nav(c, "tail"), _nav(others, "tail")))))


def assertion_no_mixed_aggregation() -> Formula:
    """No aggregation relates a Task and an Object at once."""
    a = Var("a")
    ends = _nav(a, "head") + _nav(a, "tail")
    return all_of("a", SigRef("Aggregation"), Not(conj(
        some(Intersect(ends, SigRef("Task"))), some(Intersect(ends, SigRef("Object"))))))


ASSERTIONS = {
    "A1": assertion_no_composition_cycle,
    "A2": assertion_single_owner,
    "A3": assertion_no_mixed_aggregation,
}

_COMPOSITION_SLICES = (
    ("Task", "Composition", "TaskStDiagramView", "TaskStModel"),
    ("Object", "Composition", "DataDiagramView", "DataModel"),
)
# signatures whose count the collapse argument caps at 1
COLLAPSIBLE = frozenset({"TaskStDiagramView", "TaskStModel", "DataDiagramView", "DataModel"})
SLICES: dict[str, tuple[tuple[str, ...], ...]] = {
    "A1": _COMPOSITION_SLICES,
    "A2": _COMPOSITION_SLICES,
    "A3": (("Task", "Object", "Actor", "Aggregation", "Composition"),),
}


@dataclass(frozen=True)
class AssertionResult:
    assertion: str
    holds: bool
    counterexample: Instance | None = None
    scope: Scope | None = None
    disabled: tuple[str, ...] = ()
    scopes_checked: int = 0
    budget_exceeded: bool = False

    @property
    def label(self) -> str:
        return self.assertion + "".join(f" without {f}" for f in self.disabled)


def slice_scopes(sigs: tuple[str, ...], max_scope: int,
                 capped: frozenset[str] = frozenset()) -> list[dict[str, int]]:
    """Every count assignment over ``sigs``, smallest total first."""
    ranges = [range(min(max_scope, 1) + 1 if s in capped else max_scope + 1) for s in sigs]
    combos = product(*ranges)
    ordered = sorted(combos, key=lambda c: (sum(c), c))
    return [dict(zip(sigs, c)) for c in ordered]


def run_assertion(catalog: MetamodelCatalog, assertion: str, max_scope: int, *,
                  disabled: tuple[str, ...] = (), budget: int = DEFAULT_BUDGET,
                  symmetry_breaking: bool = True, collapse: bool = True) -> AssertionResult:
    """Check one assertion over its slices; stop at the first counterexample.

    ``collapse=False`` lets diagram and model counts reach ``max_scope``
    too, which is only practical for small ``max_scope``.
    """
    if max_scope < 0:
        raise ValueError("max_scope must be nonnegative")
    spec = catalog.spec_with(disabled)
    formula = ASSERTIONS[assertion]()
    checked = 0
    for sigs in SLICES[assertion]:
        capped = COLLAPSIBLE if collapse and assertion in ("A1", "A2") else frozenset()
        for counts in slice_scopes(sigs, max_scope, capped):
            # slice counts are per-signature atoms; scopes count descendants too
            scope = Scope({s: sum(n for t, n in counts.items() if catalog.spec.conforms(t, s))
                           for s in counts})
            checked += 1
            try:
                cex = check_assertion(spec, formula, scope, budget=budget,
                                      symmetry_breaking=symmetry_breaking)
            except SearchBudgetExceeded:
                return AssertionResult(assertion, False, None, scope.complete(spec), disabled,
                                       checked, budget_exceeded=True)
            if cex is not None:
                return AssertionResult(assertion, False, cex, scope.complete(spec), disabled, checked)
    return AssertionResult(assertion, True, None, None, disabled, checked)


def builtin_assertion_suite(catalog: MetamodelCatalog, max_scope: int = 3, *,
                            budget: int = DEFAULT_BUDGET, symmetry_breaking: bool = True,
                            collapse: bool = True) -> list[AssertionResult]:
    """A1-A3 with every fact enabled, then A1 again with F3 disabled.

    The last entry is expected to fail: without F3 a model can contain a
    composition cycle, so an element ends up part of itself.
    """
    kw = dict(budget=budget, symmetry_breaking=symmetry_breaking, collapse=collapse)
    results = [run_assertion(catalog, a, max_scope, **kw) for a in ASSERTIONS]
    results.append(run_assertion(catalog, "A1", max_scope, disabled=("F3",), **kw))
    return results
