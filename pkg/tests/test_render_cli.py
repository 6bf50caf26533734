from __future__ import annotations

import io
import json
import re

import pytest

from conftest import CIRCULATION, DOUBLE_OWNER
from discocheck.checker import check_model, compute_scope, merge_model
from discocheck.cli import main
from discocheck.render import model_tree, render_dot, render_report, render_scope, report_dict

REPORT_KEYS = {"level", "subject", "verdict", "backend", "findings", "timing_ms"}
TIMING = re.compile(r'"timing_ms":[0-9.e+-]+')


def run(*argv: str) -> tuple[int, str, str]:
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


# -- rendering -----------------------------------------------------------------

def test_model_tree_lists_every_circulation_element(circulation):
    lines = model_tree(circulation)
    elements = lines[lines.index("elements") + 1:]
    assert sum(1 for s in elements if s.strip().startswith("Task ")) == 5
    assert sum(1 for s in elements if s.strip().startswith("Actor ")) == 2
    text = "\n".join(lines)
    assert text.count("agg ") == 1 and text.count("gen ") == 1 and text.count("parti ") == 2


def test_report_json_has_the_expected_keys(double_owner_ws):
    mm = merge_model(double_owner_ws.models["Parts"], double_owner_ws)
    report = check_model(mm)
    d = report_dict(report)
    assert REPORT_KEYS <= set(d)
    [f] = d["findings"]
    assert set(f) == {"rule", "message", "elements", "span"}
    assert f["rule"] == "F4" and "Z" in f["elements"]
    assert set(f["span"]) == {"line", "column", "start", "end"}
    assert json.loads(render_report(report, "json")) == d


def test_dot_points_both_compositions_at_z(double_owner_ws):
    dot = render_dot(merge_model(double_owner_ws.models["Parts"], double_owner_ws))
    assert dot.startswith("digraph")
    nodes = re.findall(r'^\s*"(Object:[^"]+)" \[', dot, re.M)
    assert sorted(nodes) == ["Object:W1", "Object:W2", "Object:Z"]
    edges = re.findall(r'"(Object:[^"]+)" -> "(Object:[^"]+)"', dot)
    assert sorted(edges) == [("Object:W1", "Object:Z"), ("Object:W2", "Object:Z")]


def test_scope_text_and_json(catalog, circulation):
    scope = compute_scope(circulation, catalog)
    text = render_scope(scope, "text", "CirculationModel", catalog)
    assert "exactly 5 Task" in text and "exactly 2 Actor" in text and "0 Composition" in text
    data = json.loads(render_scope(scope, "json", "CirculationModel", catalog))
    assert data["subject"] == "CirculationModel" and data["scope"]["Node"] == 7


# -- command line --------------------------------------------------------------

def test_check_circulation_exits_zero():
    code, out, _ = run("check", str(CIRCULATION))
    assert code == 0
    assert "model CirculationModel (TaskStModel) [eval]: valid" in out


def test_check_double_owner_exits_one_on_both_back_ends():
    code, out, _ = run("check", str(DOUBLE_OWNER), "--backend", "both", "--format", "json")
    assert code == 1
    reports = [json.loads(line) for line in out.splitlines()]
    model = [r for r in reports if r["level"] == "model"]
    assert [r["backend"] for r in model] == ["eval", "solver"]
    assert all(r["verdict"] == "invalid" for r in model)
    assert model[1]["outcome"] == "no-instance"


def test_degenerate_flag_turns_on_diagram_cycle_rule(tmp_path):
    path = tmp_path / "self.disco"
    path.write_text("diagram data D { object A; comp c { head A; tail A; } }\n")
    _, plain, _ = run("check", str(path), "--format", "json")
    _, degenerate, _ = run("check", str(path), "--format", "json", "--enable-degenerate-diagram-rules")
    rules = lambda text: {f["rule"] for line in text.splitlines() for f in json.loads(line)["findings"]}
    assert rules(plain) == {"F2"}
    assert rules(degenerate) == {"F2", "F3"}


def test_disable_rule_flag(tmp_path):
    path = tmp_path / "self.disco"
    path.write_text("diagram data D { object A; comp c { head A; tail A; } }\n")
    assert run("check", str(path), "--disable-rule", "F2")[0] == 0


@pytest.mark.parametrize("argv", [
    ("check", "nosuch.disco"),
    ("check", str(CIRCULATION), "--level", "system", "--backend", "solver"),
    ("check", str(CIRCULATION), "--disable-rule", "F99"),
    ("find", str(CIRCULATION), "--limit", "1"),
    ("scope", str(CIRCULATION), "--model", "Nope"),
    ("assert", "--max-scope", "-1"),
])
def test_bad_usage_exits_two(argv):
    assert run(*argv)[0] == 2


def test_syntax_error_is_reported_on_stderr(tmp_path):
    path = tmp_path / "bad.disco"
    path.write_text("diagram taskstructure X { task A A; }\n")
    code, out, err = run("check", str(path))
    assert code == 2 and not out
    assert "bad.disco:1:" in err and "duplicate-element-name" in err


def test_budget_exhaustion_exits_three():
    code, out, _ = run("check", str(CIRCULATION), "--backend", "solver", "--budget", "1")
    assert code == 3
    assert "budget-exceeded" in out


def test_find_names_the_unique_circulation_instance():
    code, out, _ = run("find", str(CIRCULATION))
    assert code == 0
    assert out.startswith("CirculationModel: unique-instance")
    assert "LoanTransaction" in out


def test_find_reports_no_instance_for_double_owner():
    code, out, _ = run("find", str(DOUBLE_OWNER), "--format", "json")
    assert code == 1
    assert json.loads(out)["outcome"] == "no-instance"


def test_scope_command_prints_exact_lines():
    code, out, _ = run("scope", str(CIRCULATION))
    assert code == 0
    assert out.splitlines()[:3] == ["scope CirculationModel", "  exactly 1 Model", "  exactly 1 TaskStModel"]


def test_assert_command_at_small_scope():
    code, out, _ = run("assert", "--max-scope", "1")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("A1: holds")
    assert any(s.startswith("A1 without F3:") for s in lines)


@pytest.mark.parametrize("fmt", ["text", "json"])
def test_check_output_is_deterministic(fmt):
    args = ("check", str(CIRCULATION), "--backend", "both", "--format", fmt)
    first, second = run(*args)[1], run(*args)[1]
    if fmt == "json":
        first, second = TIMING.sub("", first), TIMING.sub("", second)
    assert first == second
