from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CIRCULATION, DOUBLE_OWNER
from discocheck.dsl import LoadError, format_workspace, load_workspace, parse_source, resolve, tokenize
from discocheck.source import DslError, DslSyntaxError, ResolveError
from discocheck.workspace import Element
from generators import random_workspace_text

FIRST_DIAGRAM = """\
diagram taskstructure Circulation {
  task Circulation, Overdue, LoanTransaction;
  actor ReaderServices;
  agg circAgg { head Circulation; tail Overdue, LoanTransaction; expect tail = 2; }
  parti p1 { tact Circulation; user ReaderServices; }
}
"""


def _codes(exc: DslError) -> list[str]:
    return [d.code for d in exc.diagnostics]


# -- parsing -------------------------------------------------------------------

def test_parse_first_circulation_diagram():
    doc = parse_source(FIRST_DIAGRAM)
    assert len(doc.diagrams) == 1
    d = doc.diagrams[0]
    by_kw = {e.keyword.text: [n.text for n in e.names] for e in d.nodes}
    assert by_kw == {"task": ["Circulation", "Overdue", "LoanTransaction"], "actor": ["ReaderServices"]}
    assert [r.keyword.text for r in d.relationships] == ["agg", "parti"]
    expect = [f for f in d.relationships[0].fields if f.key.text == "expect"]
    assert expect[0].count == 2


def test_empty_input_is_an_empty_document():
    doc = parse_source("")
    assert doc.diagrams == [] and doc.models == [] and doc.systems == []


def test_comment_only_input_is_empty():
    assert parse_source("// nothing here\n").diagrams == []


def test_duplicate_element_name_is_reported_with_its_span():
    text = "diagram taskstructure X { task A A; }"
    with pytest.raises(DslSyntaxError) as err:
        parse_source(text)
    [diag] = err.value.diagnostics
    assert diag.code == "duplicate-element-name"
    assert "A" in diag.message
    assert text[diag.span.start:diag.span.end] == "A"
    assert diag.span.start == text.rindex("A")


@pytest.mark.parametrize("text, code", [
    ("diagram taskstructure X { task A; ", "syntax-error"),
    ("diagram nonsense X { }", "syntax-error"),
    ("diagram taskstructure X { task A; } diagram data X { }", "duplicate-name"),
    ("diagram taskstructure X { agg a { head A; head B; } }", "duplicate-field"),
    ("diagram taskstructure X { task A; } $", "unexpected-character"),
])
def test_syntax_errors_carry_codes(text, code):
    with pytest.raises(DslSyntaxError) as err:
        parse_source(text)
    assert code in _codes(err.value)


def test_syntax_error_messages_say_what_was_expected():
    with pytest.raises(DslSyntaxError) as err:
        parse_source("diagram taskstructure X { task A; ")
    assert "end of input" in err.value.diagnostics[0].message
    with pytest.raises(DslSyntaxError) as err:
        parse_source("diagram nonsense X { }")
    assert "nonsense" in err.value.diagnostics[0].message


def test_parser_reports_several_errors_at_once():
    text = "diagram taskstructure X { task A A; agg a { head B; head C; } }"
    with pytest.raises(DslSyntaxError) as err:
        parse_source(text)
    assert {"duplicate-element-name", "duplicate-field"} <= set(_codes(err.value))


def test_diagnostic_text_includes_path_and_position():
    with pytest.raises(DslSyntaxError) as err:
        parse_source("diagram taskstructure X {\n  task A A;\n}", path="x.disco")
    assert str(err.value.diagnostics[0]).startswith("x.disco:2:")


def test_tokenizer_flags_stray_characters():
    tokens, problems = tokenize("task A; @")
    assert [p.code for p in problems] == ["unexpected-character"]
    assert [t.text for t in tokens][:3] == ["task", "A", ";"]


@settings(max_examples=300, deadline=None)
@given(st.text(alphabet=st.sampled_from(list("diagramtskcuoe{};,= ABX12\n/$")), max_size=80))
def test_parsing_is_total_and_spans_lie_inside_the_input(text):
    try:
        parse_source(text)
    except DslSyntaxError as err:
        assert err.diagnostics
        for d in err.diagnostics:
            assert d.span is not None
            assert 0 <= d.span.start <= d.span.end <= len(text)


@settings(max_examples=200, deadline=None)
@given(st.text(max_size=60))
def test_parsing_never_crashes_on_arbitrary_text(text):
    try:
        parse_source(text)
    except DslSyntaxError:
        pass


# -- resolution ----------------------------------------------------------------

def test_resolve_circulation(circulation_ws):
    assert list(circulation_ws.diagrams) == ["Circulation", "LoanTransactionTS"]
    assert list(circulation_ws.models) == ["CirculationModel"]
    circ = circulation_ws.diagrams["Circulation"]
    agg = circ.relationships[0]
    assert agg.kind == "Aggregation"
    assert agg.head == Element("Task", "Circulation")
    assert agg.tail == (Element("Task", "Overdue"), Element("Task", "LoanTransaction"))
    assert agg.expect_tail == 2


def test_participation_user_must_be_an_actor():
    text = "diagram taskstructure X { task A, B; parti p { tact A; user B; } }"
    with pytest.raises(ResolveError) as err:
        resolve(parse_source(text))
    [diag] = err.value.diagnostics
    assert diag.code == "kind-mismatch"
    assert "user" in diag.message and "Actor" in diag.message


def test_aggregation_head_naming_an_actor_is_a_kind_mismatch():
    text = "diagram taskstructure X { task A; actor U; agg a { head U; tail A; } }"
    with pytest.raises(ResolveError) as err:
        resolve(parse_source(text))
    assert _codes(err.value) == ["kind-mismatch"]


def test_model_with_missing_diagram_is_unknown_name():
    text = "model taskstructure M { diagrams Nope; }"
    with pytest.raises(ResolveError) as err:
        resolve(parse_source(text))
    assert _codes(err.value) == ["unknown-name"]
    assert "Nope" in err.value.diagnostics[0].message


def test_model_listing_a_diagram_of_another_kind_is_rejected():
    text = "diagram data D { object A; }\nmodel taskstructure M { diagrams D; }"
    with pytest.raises(ResolveError) as err:
        resolve(parse_source(text))
    assert _codes(err.value) == ["wrong-diagram-kind-in-model"]


def test_node_kind_not_allowed_in_diagram_kind():
    with pytest.raises(ResolveError) as err:
        resolve(parse_source("diagram data D { task A; }"))
    assert _codes(err.value) == ["invalid-element-kind"]


def test_cross_diagram_reference_resolves():
    """Binding only: a relationship may name a node declared in another diagram."""
    text = ("diagram data D1 { object A, B; }\n"
            "diagram data D2 { object C; comp c { head C; tail A; } }")
    ws = resolve(parse_source(text))
    assert ws.diagrams["D2"].relationships[0].tail == (Element("Object", "A"),)


def test_resolve_errors_have_spans_inside_the_text():
    text = "diagram taskstructure X { task A; parti p { tact Q; user A; } }"
    with pytest.raises(ResolveError) as err:
        resolve(parse_source(text))
    for d in err.value.diagnostics:
        assert 0 <= d.span.start <= d.span.end <= len(text)


# -- loading and printing ------------------------------------------------------

def test_load_missing_file(tmp_path):
    with pytest.raises(LoadError) as err:
        load_workspace([tmp_path / "nosuch.disco"])
    assert _codes(err.value) == ["unreadable-file"]


def test_load_several_files(tmp_path):
    a = tmp_path / "a.disco"
    b = tmp_path / "b.disco"
    a.write_text("diagram data D1 { object A; }\n")
    b.write_text("model data M { diagrams D1; }\n")
    ws = load_workspace([a, b])
    assert list(ws.models) == ["M"]


def test_same_name_in_two_files_is_a_duplicate(tmp_path):
    a = tmp_path / "a.disco"
    b = tmp_path / "b.disco"
    a.write_text("diagram data D1 { object A; }\n")
    b.write_text("diagram data D1 { object B; }\n")
    with pytest.raises(ResolveError) as err:
        load_workspace([a, b])
    assert _codes(err.value) == ["duplicate-name"]


@pytest.mark.parametrize("path", [CIRCULATION, DOUBLE_OWNER])
def test_samples_round_trip(path):
    ws = load_workspace([path])
    again = resolve(parse_source(format_workspace(ws)))
    assert again == ws
    assert format_workspace(again) == format_workspace(ws)


@settings(max_examples=80, deadline=None)
@given(st.randoms(use_true_random=False))
def test_random_workspaces_round_trip(rng: random.Random):
    ws = resolve(parse_source(random_workspace_text(rng)))
    assert resolve(parse_source(format_workspace(ws))) == ws
