from __future__ import annotations

import random
from dataclasses import fields, is_dataclass
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import merged, workspace_of
from discocheck.checker import (
    CheckOptions, Finding, MergeError, Report, check_diagram, check_model, check_system,
    compute_scope, encode_instance, merge_model, validate_via_solver,
)
from discocheck.checker.report import BUDGET_EXCEEDED, INVALID, NONE, UNIQUE, VALID
from discocheck.metamodel import FACT_IDS
from discocheck.relational import TRUE, CardCmp, Equal, FieldRef, Join, Var
from discocheck.workspace import Element, Model, SharedDecl, System, Workspace
from generators import random_workspace_text

CIRCULATION_SCOPE = {
    "Model": 1, "TaskStModel": 1, "DiagramView": 2, "TaskStDiagramView": 2, "Relationship": 4,
    "Structure": 2, "Generalisation": 1, "Aggregation": 1, "Composition": 0, "Participation": 2,
    "Node": 7, "StateAndTask": 5, "TaskActivity": 5, "Task": 5, "Actor": 2, "Transition": 0,
    "TaskFlowElement": 0, "Member": 0,
}

MIXED_AGG = "diagram taskstructure X { task A; object O; agg a { head A; tail O; } }"
SELF_COMP = "diagram taskstructure X { task A; comp c { head A; tail A; } }"
SPLIT_CYCLE = """\
diagram data D1 { object A, B; comp c1 { head A; tail B; } }
diagram data D2 { object A, B; comp c2 { head B; tail A; } }
model data M { diagrams D1, D2; }
"""
GEN_CYCLE = """\
diagram taskstructure D1 { task A, B; gen g1 { head A; tail B; } }
diagram taskstructure D2 { task A, B; gen g2 { head B; tail A; } }
model taskstructure M { diagrams D1, D2; }
"""
TWO_TS_MODELS = """\
diagram taskstructure D1 { task A; }
diagram taskstructure D2 { task B; }
model taskstructure M1 { diagrams D1; }
model taskstructure M2 { diagrams D2; }
system S { models M1, M2; }
"""


def _rules(report: Report) -> set[str]:
    return report.rules


def walk(node):
    """Every AST node under ``node``, including itself."""
    yield node
    for f in fields(node) if is_dataclass(node) else ():
        value = getattr(node, f.name)
        for child in value if isinstance(value, tuple) else (value,):
            if is_dataclass(child):
                yield from walk(child)


# -- diagrams ------------------------------------------------------------------

def test_circulation_diagrams_are_valid(circulation_ws):
    for d in circulation_ws.diagrams.values():
        assert check_diagram(d).verdict == VALID
        assert check_diagram(d, backend="solver").verdict == VALID


def test_mixed_aggregation_is_f1():
    d = workspace_of(MIXED_AGG).diagrams["X"]
    r = check_diagram(d)
    assert r.verdict == INVALID
    assert _rules(r) == {"F1"}
    assert set(r.findings[0].elements) >= {"a", "A", "O"}


def test_self_composition_is_f2_and_with_degenerate_rules_f3():
    d = workspace_of(SELF_COMP).diagrams["X"]
    assert _rules(check_diagram(d)) == {"F2"}
    assert _rules(check_diagram(d, options=CheckOptions(degenerate_diagram_rules=True))) == {"F2", "F3"}


def test_empty_tail_is_f8_and_expect_is_checked():
    d = workspace_of("diagram taskstructure X { task A, B; gen g { head A; expect tail = 1; } }").diagrams["X"]
    assert _rules(check_diagram(d)) == {"F8", "expect-mismatch"}


def test_dangling_endpoint_is_f6():
    ws = workspace_of("diagram data D1 { object A; }\ndiagram data D2 { object B; agg a { head B; tail A; } }")
    r = check_diagram(ws.diagrams["D2"])
    assert _rules(r) == {"F6"}
    assert "A" in r.findings[0].elements


def test_isolated_nodes_are_fine():
    d = workspace_of("diagram taskstructure X { task A, B; actor U; }").diagrams["X"]
    assert check_diagram(d).verdict == VALID


def test_disabled_rule_is_skipped():
    d = workspace_of(MIXED_AGG).diagrams["X"]
    assert check_diagram(d, options=CheckOptions(frozenset({"F1"}))).verdict == VALID
    assert check_diagram(d, options=CheckOptions(frozenset({"F1"})), backend="solver").verdict == VALID


# -- merging -------------------------------------------------------------------

def test_circulation_merge_unifies_loan_transaction(circulation):
    tasks = [e.name for e in circulation.elements if e.kind == "Task"]
    actors = [e.name for e in circulation.elements if e.kind == "Actor"]
    assert sorted(tasks) == ["Circulation", "Discharge", "Issue", "LoanTransaction", "Overdue"]
    assert sorted(actors) == ["Borrower", "ReaderServices"]
    assert not circulation.findings


def test_one_diagram_model_is_the_diagram():
    mm = merged("diagram data D { object A, B; comp c { head A; tail B; } }\nmodel data M { diagrams D; }")
    assert mm.elements == (Element("Object", "A"), Element("Object", "B"))
    assert [r.name for r in mm.relationships] == ["c"]


def test_wrong_shared_declaration_is_reported(circulation_ws):
    model = circulation_ws.models["CirculationModel"]
    bad = Model(model.kind, model.name, model.diagrams, (SharedDecl("Task", ("Overdue",)),))
    mm = merge_model(bad, circulation_ws)
    # brute-force intersection of the two diagrams' task names
    names = [{e.name for e in d.elements() if e.kind == "Task"} for d in mm.diagrams]
    actual = set.union(*(a & b for a, b in combinations(names, 2)))
    assert actual == {"LoanTransaction"}
    [f] = mm.findings
    assert f.rule == "shared-mismatch"
    assert set(f.elements) == {"Overdue", "LoanTransaction"}
    assert check_model(mm).verdict == INVALID
    assert check_model(mm, backend="solver").solver.outcome == NONE


def test_merge_rejects_wrong_kind_member(circulation_ws):
    ws = workspace_of("diagram data D { object A; }")
    ws.diagrams.update(circulation_ws.diagrams)
    with pytest.raises(MergeError):
        merge_model(Model("DataModel", "M", ("D", "Circulation")), ws)


def test_merge_ignores_repeats_and_order():
    text = "diagram data D1 { object A, B; comp c1 { head A; tail B; } }\ndiagram data D2 { object B, C; }"
    ws = workspace_of(text)
    once = merge_model(Model("DataModel", "M", ("D1", "D2")), ws)
    assert merge_model(Model("DataModel", "M", ("D2", "D1", "D2")), ws) == once
    assert merge_model(Model("DataModel", "M", ("D1", "D1", "D2")), ws) == once


# -- models --------------------------------------------------------------------

def test_circulation_model_is_valid_on_both_back_ends(circulation):
    assert check_model(circulation).verdict == VALID
    solver = check_model(circulation, backend="solver")
    assert solver.verdict == VALID
    assert solver.solver.outcome == UNIQUE


def test_merge_makes_z_doubly_owned(catalog, double_owner_ws):
    for d in double_owner_ws.diagrams.values():
        assert check_diagram(d).verdict == VALID
    mm = merge_model(double_owner_ws.models["Parts"], double_owner_ws)
    r = check_model(mm)
    assert _rules(r) == {"F4"}
    assert "Z" in r.findings[0].elements
    assert validate_via_solver(mm, catalog).outcome == NONE


def test_composition_cycle_split_across_diagrams_is_f3():
    ws = workspace_of(SPLIT_CYCLE)
    for d in ws.diagrams.values():
        assert check_diagram(d).verdict == VALID
    r = check_model(merge_model(ws.models["M"], ws))
    f3 = [f for f in r.findings if f.rule == "F3"]
    assert len(f3) == 1 and set(f3[0].elements) == {"A", "B"}
    # both compositions also make A and B parts of one whole each, so F4 stays quiet
    assert _rules(r) == {"F3"}


def test_generalisation_cycle_is_f5():
    r = check_model(merged(GEN_CYCLE))
    assert _rules(r) == {"F5"}


def test_finding_span_points_at_a_relationship(double_owner_ws):
    r = check_model(merge_model(double_owner_ws.models["Parts"], double_owner_ws))
    span = r.findings[0].span
    assert span is not None and span.line == 5


# -- systems -------------------------------------------------------------------

def test_system_with_only_circulation_is_valid(circulation_ws):
    r = check_system(System("Library", ("CirculationModel",)), circulation_ws)
    assert r.verdict == VALID
    assert [c.subject for c in r.children] == ["CirculationModel"]


def test_two_task_structure_models_is_f7():
    ws = workspace_of(TWO_TS_MODELS)
    r = check_system(ws.systems["S"], ws)
    assert _rules(r) == {"F7"}
    assert set(r.findings[0].elements) == {"M1", "M2"}


def test_system_repeats_nested_findings(circulation_ws, double_owner_ws):
    ws = Workspace({**circulation_ws.diagrams, **double_owner_ws.diagrams},
                   {**circulation_ws.models, **double_owner_ws.models})
    r = check_system(System("All", ("CirculationModel", "Parts")), ws)
    assert r.verdict == INVALID
    assert [c.verdict for c in r.children] == [VALID, INVALID]
    assert _rules(r) == {"F4"}


# -- scopes and encodings ------------------------------------------------------

def test_circulation_scope_counts(catalog, circulation):
    scope = compute_scope(circulation, catalog)
    for sig, n in CIRCULATION_SCOPE.items():
        assert scope[sig] == n, sig


def test_empty_model_scope(catalog):
    mm = merged("diagram data D { }\nmodel data M { diagrams D; }")
    scope = compute_scope(mm, catalog)
    nonzero = {k: v for k, v in scope.counts.items() if v}
    assert nonzero == {"Model": 1, "DataModel": 1, "DiagramView": 1, "DataDiagramView": 1}


def test_double_owner_scope(catalog, double_owner_ws):
    scope = compute_scope(merge_model(double_owner_ws.models["Parts"], double_owner_ws), catalog)
    expected = {"Object": 3, "Composition": 2, "Aggregation": 2, "Structure": 2, "Relationship": 2,
                "Node": 3, "DataDiagramView": 2, "DiagramView": 2, "DataModel": 1, "Model": 1}
    assert {k: v for k, v in scope.counts.items() if v} == expected


def _conjuncts(goal):
    return [n for n in walk(goal) if isinstance(n, (Equal, CardCmp))]


def test_circulation_diagram_goal_pins_the_aggregation(catalog, circulation_ws):
    from discocheck.checker import diagram_as_model
    enc = encode_instance(diagram_as_model(circulation_ws.diagrams["Circulation"], False), catalog)
    agg = Var("rel:Circulation:circAgg")
    parts = _conjuncts(enc.goal)
    heads = [p for p in parts if isinstance(p, Equal) and p.left == Join(agg, FieldRef("head"))]
    tails = [p for p in parts if isinstance(p, Equal) and p.left == Join(agg, FieldRef("tail"))]
    cards = [p for p in parts if isinstance(p, CardCmp) and p.expr == Join(agg, FieldRef("tail"))]
    assert heads and heads[0].right == Var("Task:Circulation")
    assert tails and set(walk(tails[0].right)) >= {Var("Task:Overdue"), Var("Task:LoanTransaction")}
    assert cards and cards[0].op == "=" and cards[0].n == 2
    assert len(set(enc.pinning.values())) == len(enc.pinning)


def test_empty_diagram_goal_is_true(catalog):
    from discocheck.checker import diagram_as_model
    d = workspace_of("diagram taskstructure E { }").diagrams["E"]
    enc = encode_instance(diagram_as_model(d, False), catalog)
    assert enc.goal == TRUE
    assert {k: v for k, v in enc.scope.counts.items() if v} == {"DiagramView": 1, "TaskStDiagramView": 1}


def test_circulation_model_goal_lists_both_diagrams_and_the_shared_task(catalog, circulation):
    enc = encode_instance(circulation, catalog)
    model = Var("model:CirculationModel")
    parts = _conjuncts(enc.goal)
    tm = [p for p in parts if isinstance(p, Equal) and p.left == Join(model, FieldRef("tm"))]
    assert tm and set(walk(tm[0].right)) >= {Var("diagram:Circulation"), Var("diagram:LoanTransactionTS")}
    shared = [p for p in parts if isinstance(p, Equal) and p.right == Var("Task:LoanTransaction")]
    assert shared


def test_circulation_stays_unique_without_any_fact(catalog, circulation):
    v = validate_via_solver(circulation, catalog, CheckOptions(frozenset(FACT_IDS)))
    assert v.outcome == UNIQUE


def test_budget_exhaustion_is_its_own_outcome(catalog, circulation):
    v = validate_via_solver(circulation, catalog, CheckOptions(budget=1))
    assert v.outcome == BUDGET_EXCEEDED
    r = check_model(circulation, catalog, CheckOptions(budget=1), backend="solver")
    assert r.verdict == BUDGET_EXCEEDED
    assert _rules(r) == {"budget-exceeded"}


def test_report_verdict_must_match_findings():
    with pytest.raises(AssertionError):
        Report("model", "X", VALID, (Finding("F4", "m", ("Z",)),))
    with pytest.raises(AssertionError):
        Report("model", "X", INVALID, ())


# -- properties over random workspaces -----------------------------------------

def _random_model(rng: random.Random):
    ws = workspace_of(random_workspace_text(rng))
    return ws, merge_model(ws.models["M"], ws)


@settings(max_examples=60, deadline=None)
@given(st.randoms(use_true_random=False))
def test_back_ends_agree(rng):
    _, mm = _random_model(rng)
    ev = check_model(mm)
    sv = check_model(mm, backend="solver")
    assert sv.solver.outcome in (UNIQUE, NONE)
    assert ev.verdict == sv.verdict


@settings(max_examples=80, deadline=None)
@given(st.randoms(use_true_random=False))
def test_invalid_diagram_makes_its_model_invalid(rng):
    ws, mm = _random_model(rng)
    if any(check_diagram(d).verdict == INVALID for d in mm.diagrams):
        assert check_model(mm).verdict == INVALID


@settings(max_examples=80, deadline=None)
@given(st.randoms(use_true_random=False))
def test_scope_is_consistent(rng):
    from discocheck.metamodel import declare_metamodel
    _, mm = _random_model(rng)
    spec = declare_metamodel().spec
    scope = compute_scope(mm, declare_metamodel())
    for s in spec.signatures:
        kids = sum(scope[c] for c in spec.children(s.name))
        if s.is_abstract:
            assert scope[s.name] == kids
        else:
            assert scope[s.name] >= kids


@settings(max_examples=80, deadline=None)
@given(st.randoms(use_true_random=False))
def test_merge_is_order_independent(rng):
    ws, mm = _random_model(rng)
    model = ws.models["M"]
    shuffled = list(model.diagrams)
    rng.shuffle(shuffled)
    other = merge_model(Model(model.kind, model.name, tuple(shuffled) + tuple(shuffled[:1]), model.shared), ws)
    assert set(other.elements) == set(mm.elements)
    assert set(other.relationships) == set(mm.relationships)
    assert check_model(other).findings == check_model(mm).findings


@settings(max_examples=80, deadline=None)
@given(st.randoms(use_true_random=False))
def test_findings_name_elements_of_their_subject(rng):
    ws, mm = _random_model(rng)
    reports = [check_model(mm)] + [check_diagram(d, options=CheckOptions(degenerate_diagram_rules=True))
                                   for d in mm.diagrams]
    for r in reports:
        for f in r.findings:
            assert f.elements
            assert set(f.elements) <= mm.names()
