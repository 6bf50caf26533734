"""The six end-to-end acceptance criteria, each with its own time limit.

Every test prints one ``criterion N: PASS|FAIL`` line, visible in ``pytest -v``
output, before asserting.
"""

from __future__ import annotations

import io
import json
import random
import re
import time

import pytest

from conftest import CIRCULATION, DOUBLE_OWNER, workspace_of
from discocheck.checker import (
    builtin_assertion_suite, check_diagram, check_model, merge_model, validate_via_solver,
)
from discocheck.checker.report import MULTIPLE, NONE, UNIQUE, VALID
from discocheck.cli import main
from discocheck.dsl import load_workspace
from discocheck.relational import enumerate_instances
from discocheck.relational.closure import find_cycle
from generators import oracle_instances, random_mini_problem, random_workspace_text

CIRCULATION_SCOPE = {
    "Model": 1, "TaskStModel": 1, "DiagramView": 2, "TaskStDiagramView": 2, "Relationship": 4,
    "Structure": 2, "Generalisation": 1, "Aggregation": 1, "Participation": 2, "Node": 7,
    "StateAndTask": 5, "TaskActivity": 5, "Task": 5, "Actor": 2, "Transition": 0,
    "TaskFlowElement": 0, "Member": 0,
}
TIMING = re.compile(r'"timing_ms":[0-9.e+-]+')


@pytest.fixture
def announce(capsys):
    def _announce(n: int, ok: bool, elapsed: float, limit: float | None, detail: str = "") -> None:
        verdict = "PASS" if ok and (limit is None or elapsed <= limit) else "FAIL"
        bound = f", limit {limit:g}s" if limit is not None else ""
        with capsys.disabled():
            print(f"\ncriterion {n}: {verdict} ({elapsed:.2f}s{bound}) {detail}".rstrip())
    return _announce


def _cli(*argv: str) -> tuple[int, str]:
    out = io.StringIO()
    code = main(list(argv), out, io.StringIO())
    return code, out.getvalue()


def _scope_table(text: str) -> dict[str, int]:
    table = {}
    for line in text.splitlines()[1:]:
        words = line.split()
        table[words[-1]] = int(words[-2])
    return table


def _circulation_end_to_end(catalog) -> list[str]:
    problems = []
    ws = load_workspace([CIRCULATION])
    for d in ws.diagrams.values():
        for backend in ("eval", "solver"):
            if check_diagram(d, catalog, backend=backend).verdict != VALID:
                problems.append(f"diagram {d.name} invalid on {backend}")
    mm = merge_model(ws.models["CirculationModel"], ws)
    for backend in ("eval", "solver"):
        if check_model(mm, catalog, backend=backend).verdict != VALID:
            problems.append(f"model invalid on {backend}")
    _, text = _cli("scope", str(CIRCULATION))
    table = _scope_table(text)
    wrong = {k: table.get(k) for k, v in CIRCULATION_SCOPE.items() if table.get(k) != v}
    if wrong:
        problems.append(f"scope differs at {wrong}")
    outcome = validate_via_solver(mm, catalog).outcome
    if outcome != UNIQUE:
        problems.append(f"solver says {outcome}")
    return problems


def test_criterion_1_circulation_end_to_end(catalog, announce):
    start = time.perf_counter()
    problems = _circulation_end_to_end(catalog)
    elapsed = time.perf_counter() - start
    announce(1, not problems, elapsed, 5, "; ".join(problems))
    assert not problems
    assert elapsed <= 5


def test_criterion_2_merged_double_ownership(catalog, announce):
    start = time.perf_counter()
    ws = load_workspace([DOUBLE_OWNER])
    problems = [f"diagram {d.name} invalid" for d in ws.diagrams.values()
                if check_diagram(d, catalog).verdict != VALID
                or check_diagram(d, catalog, backend="solver").verdict != VALID]
    mm = merge_model(ws.models["Parts"], ws)
    report = check_model(mm, catalog)
    f4 = [f for f in report.findings if f.rule == "F4"]
    if report.verdict == VALID or not f4 or "Z" not in f4[0].elements:
        problems.append(f"evaluator findings {[f.rule for f in report.findings]}")
    outcome = validate_via_solver(mm, catalog).outcome
    if outcome != NONE:
        problems.append(f"solver says {outcome}")
    elapsed = time.perf_counter() - start
    announce(2, not problems, elapsed, 5, "; ".join(problems))
    assert not problems
    assert elapsed <= 5


def _composition_cycle(inst) -> list | None:
    comps = {a for (a,) in inst.universe.extent["Composition"]}
    heads = {c: h for c, h in inst.tuples["head"] if c in comps}
    return find_cycle([(heads[c], p) for c, p in inst.tuples["tail"] if c in comps])


def test_criterion_3_assertion_suite(catalog, announce):
    start = time.perf_counter()
    *main_results, probe = builtin_assertion_suite(catalog, max_scope=3)
    problems = [f"{r.label} fails" for r in main_results if not r.holds]
    if probe.holds or probe.counterexample is None:
        problems.append("no counterexample without F3")
    else:
        if max(probe.scope.counts.values()) > 3:
            problems.append(f"counterexample scope too large: {probe.scope.counts}")
        if _composition_cycle(probe.counterexample) is None:
            problems.append("counterexample has no composition cycle")
    elapsed = time.perf_counter() - start
    announce(3, not problems, elapsed, 60, "; ".join(problems))
    assert not problems
    assert elapsed <= 60


def test_criterion_4_search_matches_brute_force(announce):
    rng = random.Random(0)
    start = time.perf_counter()
    mismatches = []
    for i in range(200):
        p = random_mini_problem(rng, max_atoms=3)
        found = enumerate_instances(p.spec, p.goal, p.scope, limit=None)
        if len(found) != len(set(found)) or set(found) != oracle_instances(p.spec, p.goal, p.scope):
            mismatches.append(i)
    elapsed = time.perf_counter() - start
    announce(4, not mismatches, elapsed, 60, f"mismatches at {mismatches}" if mismatches else "200 specs")
    assert not mismatches
    assert elapsed <= 60


def test_criterion_5_back_ends_agree(catalog, announce):
    rng = random.Random(0)
    start = time.perf_counter()
    disagreements, multiples, valid = [], [], 0
    for i in range(150):
        ws = workspace_of(random_workspace_text(rng, max_diagrams=3, max_nodes=6, max_rels=4))
        mm = merge_model(ws.models["M"], ws)
        verdict = validate_via_solver(mm, catalog)
        if verdict.outcome == MULTIPLE:
            multiples.append(i)
        evaluated = check_model(mm, catalog).verdict
        valid += evaluated == VALID
        if evaluated != verdict.as_report_verdict:
            disagreements.append(i)
    elapsed = time.perf_counter() - start
    ok = not disagreements and not multiples
    detail = f"disagree {disagreements}, multiple {multiples}" if not ok else f"150 workspaces, {valid} valid"
    announce(5, ok, elapsed, 120, detail)
    assert ok
    assert elapsed <= 120


def test_criterion_6_deterministic_output(announce):
    start = time.perf_counter()
    runs = []
    for _ in range(2):
        outputs = []
        for fmt in ("text", "json"):
            for command in (("check", "--backend", "both"), ("scope",), ("find",)):
                _, out = _cli(command[0], str(CIRCULATION), *command[1:], "--format", fmt)
                outputs.append(TIMING.sub('"timing_ms":0', out))
        runs.append(outputs)
    same = runs[0] == runs[1]
    # the stripped JSON still parses
    for line in runs[0][3].splitlines():
        json.loads(line)
    elapsed = time.perf_counter() - start
    announce(6, same, elapsed, None, "byte-identical")
    assert same
