"""Prompt construction, response extraction, transports, and task runs."""

import json

import pytest

from alloydesk.checker import CheckConfig
from alloydesk.corpus import get_entry
from alloydesk.llm import (
    EmptyResponseError,
    HTTPTransport,
    HTTPTransportConfig,
    MissingFieldError,
    ReplayTransport,
    TaskKind,
    TransportError,
    build_prompt,
    extract_candidates,
    run_task,
)

CFG = CheckConfig()

ENGLISH_DAG_PROMPT = (
    "Give me 20 unique solutions to the problem of synthesizing the body of"
    " the following Alloy predicate (without markdown or comments) with"
    " respect to the property described in the comments:\n"
    "sig Node {\n"
    "  link: set Node\n"
    "}\n"
    "pred DAG{\n"
    "  // Directed acyclic graph\n"
    "  // your code go here\n"
    "}"
)

ALLOY_DAG_PROMPT = (
    "Give me 20 unique solutions to the problem of synthesizing the body of"
    " the following Alloy predicate (without markdown or comments) with"
    " respect to the property described in the comments:\n"
    "sig Node {\n"
    "  link: set Node\n"
    "}\n"
    "pred DAG{\n"
    "  // Directed acyclic graph\n"
    "  all n: Node | n !in n.^link\n"
    "}"
)

SKETCH_DAG_PROMPT = (
    "Complete the following sketch of the Alloy predicate (without markdown"
    " or comments) by selecting values for the holes with respect to the"
    " given constraints such that the predicate is correct with respect to"
    " the property described in the comments:\n"
    "\n"
    "sig Node {\n"
    "  link: set Node\n"
    "}\n"
    "pred DAG {\n"
    "  // Directed acyclic graph\n"
    "  all n: Node | \\E,e\\ \\CO,co\\ \\E,e\\\n"
    "}\n"
    "\n"
    "co := {| =|in|!=|!in |}\n"
    "e := {| Node|n|((Node|n).(*|^)link) |}"
)


def test_english_prompt_is_byte_exact():
    req = build_prompt(TaskKind.ENGLISH_TO_ALLOY, get_entry("DAG"))
    assert req.rendered_prompt == ENGLISH_DAG_PROMPT
    assert req.property_id == "DAG"
    assert req.solution_count == 20


def test_alloy_prompt_is_byte_exact():
    req = build_prompt(TaskKind.ALLOY_TO_ALLOY, get_entry("DAG"))
    assert req.rendered_prompt == ALLOY_DAG_PROMPT


def test_sketch_prompt_is_byte_exact():
    req = build_prompt(TaskKind.SKETCH_TO_ALLOY, get_entry("DAG"))
    assert req.rendered_prompt == SKETCH_DAG_PROMPT


def test_prompts_are_deterministic():
    for kind in TaskKind:
        a = build_prompt(kind, get_entry("Symmetric"))
        b = build_prompt(kind, get_entry("Symmetric"))
        assert a.rendered_prompt == b.rendered_prompt


def test_solution_count_appears_in_synthesis_prompts():
    req = build_prompt(TaskKind.ENGLISH_TO_ALLOY, get_entry("DAG"), solution_count=5)
    assert req.rendered_prompt.startswith("Give me 5 unique solutions")
    assert req.solution_count == 5


def test_multi_line_reference_is_indented_in_alloy_prompt():
    req = build_prompt(TaskKind.ALLOY_TO_ALLOY, get_entry("Connex"))
    assert "\n  all s, t: S |\n    s->t in r or t->s in r\n" in req.rendered_prompt


def test_missing_fields_are_reported():
    class Stub:
        id = "Stub"
        description = ""
        reference_text = ""
        sketch_text = ""
        schema = get_entry("DAG").schema

    with pytest.raises(MissingFieldError):
        build_prompt(TaskKind.ENGLISH_TO_ALLOY, Stub())
    with pytest.raises(MissingFieldError):
        build_prompt(TaskKind.ALLOY_TO_ALLOY, Stub())
    with pytest.raises(MissingFieldError):
        build_prompt(TaskKind.SKETCH_TO_ALLOY, Stub())


def test_task_kind_values():
    assert TaskKind.ENGLISH_TO_ALLOY.value == "english-to-alloy"
    assert TaskKind.ALLOY_TO_ALLOY.value == "alloy-to-alloy"
    assert TaskKind.SKETCH_TO_ALLOY.value == "sketch-to-alloy"


def test_extract_numbered_list():
    raw = (
        "Here are the solutions:\n"
        " 1. no ^link & iden\n"
        " 2. all n: Node | n not in n.^link\n"
        "11. ^link in (^link - iden)\n"
    )
    assert extract_candidates(raw, TaskKind.ENGLISH_TO_ALLOY) == [
        "no ^link & iden",
        "all n: Node | n not in n.^link",
        "^link in (^link - iden)",
    ]


def test_extract_numbered_item_spanning_lines():
    raw = "1. all s, t: S |\n   s->t in r or t->s in r\n2. no r\n"
    assert extract_candidates(raw, TaskKind.ALLOY_TO_ALLOY) == [
        "all s, t: S |\n   s->t in r or t->s in r",
        "no r",
    ]


def test_extract_blank_line_blocks():
    raw = "all s: S | s not in s.r\n\nall s: S | s->s not in r\n"
    assert extract_candidates(raw, TaskKind.ENGLISH_TO_ALLOY) == [
        "all s: S | s not in s.r",
        "all s: S | s->s not in r",
    ]


def test_extract_single_block_without_numbering():
    raw = "all s: S | s not in s.r"
    assert extract_candidates(raw, TaskKind.ENGLISH_TO_ALLOY) == [raw]


def test_extract_strips_code_fences():
    raw = "```alloy\n1. no r\n```"
    assert extract_candidates(raw, TaskKind.ENGLISH_TO_ALLOY) == ["no r"]


def test_extract_sketch_answer_keeps_body_between_braces():
    raw = (
        "pred Irreflexive {\n"
        "  -- No element in S is related to itself\n"
        "  all s, t: S | s -> t in r implies s != t\n"
        "}"
    )
    assert extract_candidates(raw, TaskKind.SKETCH_TO_ALLOY) == [
        "all s, t: S | s -> t in r implies s != t"
    ]


def test_extract_sketch_answer_without_braces_is_whole_text():
    raw = "all n: Node | n !in n.^link"
    assert extract_candidates(raw, TaskKind.SKETCH_TO_ALLOY) == [raw]


def test_extract_empty_responses_raise():
    with pytest.raises(EmptyResponseError):
        extract_candidates("", TaskKind.ENGLISH_TO_ALLOY)
    with pytest.raises(EmptyResponseError):
        extract_candidates("pred P {\n  // only a comment\n}", TaskKind.SKETCH_TO_ALLOY)
    with pytest.raises(EmptyResponseError):
        extract_candidates("\n\n\n", TaskKind.ALLOY_TO_ALLOY)


def test_replay_transport_fifo_order():
    transport = ReplayTransport(["first", "second"])
    a = transport.complete([], request_id="x", key="k1")
    b = transport.complete([], request_id="x", key="k2")
    assert (a.text, b.text) == ("first", "second")
    with pytest.raises(TransportError):
        transport.complete([], request_id="x", key="k3")


def test_replay_transport_keyed_queues():
    transport = ReplayTransport(
        {"DAG/sketch-to-alloy": ["one", "two"], "DAG/english-to-alloy": "solo"}
    )
    assert transport.complete([], request_id="r", key="DAG/sketch-to-alloy").text == "one"
    assert transport.complete([], request_id="r", key="DAG/sketch-to-alloy").text == "two"
    assert (
        transport.complete([], request_id="r", key="DAG/english-to-alloy").text
        == "solo"
    )
    with pytest.raises(TransportError) as info:
        transport.complete([], request_id="r7", key="DAG/sketch-to-alloy")
    assert info.value.request_id == "r7"


def test_replay_transport_from_file(tmp_path):
    path = tmp_path / "replay.json"
    path.write_text(json.dumps({"DAG/english-to-alloy": ["no r"]}), encoding="utf-8")
    transport = ReplayTransport.from_file(str(path))
    assert transport.complete([], request_id="r", key="DAG/english-to-alloy").text == "no r"
    bad = tmp_path / "bad.json"
    bad.write_text('"just a string"', encoding="utf-8")
    with pytest.raises(ValueError):
        ReplayTransport.from_file(str(bad))


def test_run_task_classifies_each_candidate():
    entry = get_entry("Irreflexive")
    req = build_prompt(TaskKind.ENGLISH_TO_ALLOY, entry, solution_count=3)
    raw = (
        "1. all s: S | s not in s.r\n"
        "2. all s: S | lone\n"
        "3. all s: S | some s.r\n"
    )
    run = run_task(
        req, ReplayTransport([raw]), entry.reference, entry.schema, CFG
    )
    kinds = [c.verdict.kind for c in run.classified]
    assert kinds == ["correct", "syntax_error", "wrong"]
    assert run.verdict_counts() == (1, 1, 1)
    assert run.retry_count == 0
    assert len(run.responses) == 1


def test_run_task_no_retry_for_synthesis_tasks():
    entry = get_entry("Irreflexive")
    req = build_prompt(TaskKind.ENGLISH_TO_ALLOY, entry, solution_count=1)
    transport = ReplayTransport(["all s: S | lone"])
    run = run_task(req, transport, entry.reference, entry.schema, CFG)
    assert run.retry_count == 0
    assert run.verdict_counts() == (0, 1, 0)


def test_run_task_sketch_retry_protocol():
    entry = get_entry("Circular")
    req = build_prompt(TaskKind.SKETCH_TO_ALLOY, entry)
    first = (
        "pred Circular {\n"
        "#Node = #link\n"
        "  all n: Node | one n.link\n"
        "  all m, n: Node | m in n.^link &\n"
        "}"
    )
    second = (
        "pred Circular {\n"
        "#Node = #link\n"
        "  all n: Node | one n.link\n"
        "  all m, n: Node | m in n.^link\n"
        "}"
    )
    transport = ReplayTransport({"Circular/sketch-to-alloy": [first, second]})
    run = run_task(req, transport, entry.reference, entry.schema, CFG)
    assert run.retry_count == 1
    assert len(run.responses) == 2
    assert [c.verdict.kind for c in run.classified] == ["correct"]


def test_run_task_retry_can_be_disabled():
    entry = get_entry("Circular")
    req = build_prompt(TaskKind.SKETCH_TO_ALLOY, entry)
    transport = ReplayTransport(["pred Circular {\n  no (\n}"])
    run = run_task(
        req,
        transport,
        entry.reference,
        entry.schema,
        CFG,
        retry_on_syntax_error=False,
    )
    assert run.retry_count == 0
    assert [c.verdict.kind for c in run.classified] == ["syntax_error"]


def test_run_task_retry_keeps_second_answer_even_if_wrong():
    entry = get_entry("DAG")
    req = build_prompt(TaskKind.SKETCH_TO_ALLOY, entry)
    transport = ReplayTransport(
        {
            "DAG/sketch-to-alloy": [
                "pred DAG {\n  all n: Node | n !in\n}",
                "pred DAG {\n  all n: Node | n in n.^link\n}",
            ]
        }
    )
    run = run_task(req, transport, entry.reference, entry.schema, CFG)
    assert run.retry_count == 1
    assert [c.verdict.kind for c in run.classified] == ["wrong"]


def test_run_task_is_deterministic_apart_from_timestamps():
    entry = get_entry("Function")
    req = build_prompt(TaskKind.ALLOY_TO_ALLOY, entry, solution_count=2)
    raw = "1. all s: S | one s.r\n2. all s: S | #s.r = 1\n"
    runs = [
        run_task(req, ReplayTransport([raw]), entry.reference, entry.schema, CFG)
        for _ in range(2)
    ]
    assert [c.verdict.kind for c in runs[0].classified] == [
        c.verdict.kind for c in runs[1].classified
    ]
    assert runs[0].responses[0].extracted_candidates == runs[1].responses[
        0
    ].extracted_candidates


def test_transport_error_propagates():
    entry = get_entry("DAG")
    req = build_prompt(TaskKind.ENGLISH_TO_ALLOY, entry)
    with pytest.raises(TransportError):
        run_task(req, ReplayTransport([]), entry.reference, entry.schema, CFG)


def test_http_transport_requires_api_key(monkeypatch):
    monkeypatch.delenv("ALLOYDESK_API_KEY", raising=False)
    transport = HTTPTransport(
        HTTPTransportConfig(base_url="http://localhost:9", model="m")
    )
    with pytest.raises(TransportError):
        transport.complete(
            [{"role": "user", "content": "hi"}], request_id="r", key="k"
        )
