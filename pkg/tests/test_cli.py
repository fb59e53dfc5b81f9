"""Command line interface: subcommands, exit codes, and output shapes."""

import json

import pytest

from alloydesk.cli import main
from alloydesk.pipeline import read_audit, reclassify_record

from replay_fixture import build_full_replay

IRREFLEXIVE_MODEL = (
    "sig S { r: set S }\n"
    "pred Irreflexive {\n"
    "  all s, t: S | s->t in r implies s != t\n"
    "}\n"
)


@pytest.fixture()
def model_files(tmp_path):
    ref = tmp_path / "ref.als"
    ref.write_text(IRREFLEXIVE_MODEL, encoding="utf-8")
    cand = tmp_path / "cand.als"
    cand.write_text(
        "sig S { r: set S }\nall s: S | s not in s.r\n", encoding="utf-8"
    )
    wrong = tmp_path / "wrong.als"
    wrong.write_text("all s: S | some s.r\n", encoding="utf-8")
    bad = tmp_path / "bad.als"
    bad.write_text("all s: S | s in\n", encoding="utf-8")
    return tmp_path


def test_check_equivalent(model_files, capsys):
    code = main(
        ["check", str(model_files / "ref.als"), str(model_files / "cand.als")]
    )
    out = capsys.readouterr().out
    assert code == 0
    assert out.strip() == "Equivalent"


def test_check_mismatch_prints_counterexample(model_files, capsys):
    code = main(
        ["check", str(model_files / "ref.als"), str(model_files / "wrong.als")]
    )
    captured = capsys.readouterr()
    assert code == 1
    assert "Counterexample:" in captured.out
    assert "S =" in captured.out
    assert "reference evaluates to" in captured.out


def test_check_schema_comes_from_either_file_or_flag(model_files, capsys):
    # wrong.als has no sig block; the reference's sig block is used
    code = main(
        ["check", str(model_files / "ref.als"), str(model_files / "wrong.als")]
    )
    assert code == 1
    capsys.readouterr()
    # explicit inline schema wins
    code = main(
        [
            "check",
            str(model_files / "ref.als"),
            str(model_files / "cand.als"),
            "--schema",
            "sig S { r: set S }",
        ]
    )
    capsys.readouterr()
    assert code == 0


def test_check_no_schema_is_a_parse_error(tmp_path, capsys):
    a = tmp_path / "a.als"
    a.write_text("no r\n", encoding="utf-8")
    b = tmp_path / "b.als"
    b.write_text("no r\n", encoding="utf-8")
    code = main(["check", str(a), str(b)])
    captured = capsys.readouterr()
    assert code == 2
    assert "no schema" in captured.err


def test_check_parse_error_exit_code(model_files, capsys):
    code = main(
        ["check", str(model_files / "ref.als"), str(model_files / "bad.als")]
    )
    captured = capsys.readouterr()
    assert code == 2
    assert "parse error" in captured.err


def test_check_scope_flag(model_files, capsys):
    # at scope 0 only the empty universe exists, where these two agree
    code = main(
        [
            "check",
            str(model_files / "ref.als"),
            str(model_files / "wrong.als"),
            "--scope",
            "0",
        ]
    )
    capsys.readouterr()
    assert code == 0


def test_classify_json_candidates(tmp_path, capsys):
    cands = tmp_path / "cands.json"
    cands.write_text(
        json.dumps(
            ["all s: S | s not in s.r", "all s: S | some s.r", "all s: S | lone"]
        ),
        encoding="utf-8",
    )
    code = main(["classify", "Irreflexive", str(cands)])
    out = capsys.readouterr().out
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "[correct] all s: S | s not in s.r"
    assert lines[1] == "[wrong] all s: S | some s.r"
    assert lines[2] == "[syntax_error] all s: S | lone"
    assert (
        lines[3]
        == "correct=1 syntax_error=1 wrong=1 unique_syntactic=2 semantic_classes=2"
    )


def test_classify_text_blocks_and_audit(tmp_path, capsys):
    cands = tmp_path / "cands.txt"
    cands.write_text(
        "no ^link & iden\n\nall n: Node | n not in n.^link\n", encoding="utf-8"
    )
    out_dir = tmp_path / "out"
    code = main(["classify", "DAG", str(cands), "--out", str(out_dir)])
    out = capsys.readouterr().out
    assert code == 0
    assert "correct=2" in out
    records = read_audit(str(out_dir / "audit.jsonl"))
    assert len(records) == 1
    assert records[0]["task_kind"] == "classify"
    assert reclassify_record(records[0]) == ["correct", "correct"]


def test_classify_unknown_property(tmp_path, capsys):
    cands = tmp_path / "cands.json"
    cands.write_text(json.dumps(["no r"]), encoding="utf-8")
    code = main(["classify", "Totality", str(cands)])
    captured = capsys.readouterr()
    assert code == 2
    assert "Totality" in captured.err


def test_sketch_solve_function(capsys):
    code = main(["sketch", "solve", "Function"])
    out = capsys.readouterr().out
    assert code == 0
    assert "raw combinations: 15" in out
    assert "correct completions: 1" in out
    assert "all s: S | one s.r" in out


def test_sketch_solve_reports_skipped(capsys):
    code = main(["sketch", "solve", "Irreflexive"])
    out = capsys.readouterr().out
    assert code == 0
    assert "raw combinations: 324" in out
    assert "ill-typed skipped: 160" in out
    assert "well-formed completions: 164" in out
    assert "correct completions: 33" in out


def test_sketch_solve_unknown_property(capsys):
    code = main(["sketch", "solve", "Nope"])
    captured = capsys.readouterr()
    assert code == 2
    assert "Nope" in captured.err


def write_replay(tmp_path, data):
    path = tmp_path / "replay.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def test_ask_requires_a_transport(tmp_path, capsys):
    code = main(["ask", "english-to-alloy", "DAG", "--out", str(tmp_path)])
    captured = capsys.readouterr()
    assert code == 2
    assert "no transport" in captured.err


def test_ask_single_task_with_replay(tmp_path, capsys):
    replay = write_replay(
        tmp_path, {"DAG/english-to-alloy": ["1. all n: Node | n !in n.^link\n2. no link\n"]}
    )
    out_dir = tmp_path / "run"
    code = main(
        [
            "ask",
            "english-to-alloy",
            "DAG",
            "--replay",
            replay,
            "--out",
            str(out_dir),
        ]
    )
    captured = capsys.readouterr()
    assert code == 0
    assert "## English to Alloy" in captured.out
    assert "| DAG | 1 | 0 | 1 | 2 | 2 | 0 |" in captured.out
    assert "audit log:" in captured.err
    records = read_audit(str(out_dir / "audit.jsonl"))
    assert len(records) == 1
    assert records[0]["property"] == "DAG"


def test_ask_fifo_replay_list(tmp_path, capsys):
    replay = write_replay(tmp_path, ["1. all s: S | one s.r\n"])
    code = main(
        [
            "ask",
            "alloy-to-alloy",
            "Function",
            "--replay",
            replay,
            "--out",
            str(tmp_path / "run"),
        ]
    )
    captured = capsys.readouterr()
    assert code == 0
    assert "| Function | 1 | 0 | 0 | 1 | 1 | 0 |" in captured.out


def test_ask_exhausted_replay_is_transport_failure(tmp_path, capsys):
    replay = write_replay(tmp_path, [])
    code = main(
        [
            "ask",
            "english-to-alloy",
            "DAG",
            "--replay",
            replay,
            "--out",
            str(tmp_path / "run"),
        ]
    )
    captured = capsys.readouterr()
    assert code == 3
    assert "transport error" in captured.err


def test_ask_empty_response_is_parse_error(tmp_path, capsys):
    replay = write_replay(tmp_path, {"DAG/english-to-alloy": [""]})
    code = main(
        [
            "ask",
            "english-to-alloy",
            "DAG",
            "--replay",
            replay,
            "--out",
            str(tmp_path / "run"),
        ]
    )
    captured = capsys.readouterr()
    assert code == 2
    assert "empty response" in captured.err


def test_ask_all_tasks_all_properties_offline(tmp_path, capsys):
    replay = write_replay(tmp_path, build_full_replay())
    out_dir = tmp_path / "run"
    code = main(
        ["ask", "all", "all", "--replay", replay, "--out", str(out_dir)]
    )
    captured = capsys.readouterr()
    assert code == 0
    report = captured.out
    # every property appears in every section with consistent counts
    assert report.count("| DAG |") == 3
    assert "| Circular | 1 | 0 | 0 | 1 | 1 | 1 |" in report  # scripted retry
    assert "| DAG | 1 | 1 | 1 | 2 | 2 | 0 |" in report
    assert "| Function | 2 | 0 | 0 | 1 | 1 | 0 |" in report

    records = read_audit(str(out_dir / "audit.jsonl"))
    assert len(records) == 33
    retried = [r for r in records if r["retry_count"] == 1]
    assert [r["property"] for r in retried] == ["Circular"]
    assert len(retried[0]["responses"]) == 2

    # the audit log alone reproduces the verdicts
    for record in records:
        stored = [c["verdict"]["kind"] for c in record["candidates"]]
        assert reclassify_record(record) == stored


def test_report_reproduces_ask_tables(tmp_path, capsys):
    replay = write_replay(tmp_path, build_full_replay())
    out_dir = tmp_path / "run"
    code = main(["ask", "all", "all", "--replay", replay, "--out", str(out_dir)])
    ask_out = capsys.readouterr().out
    assert code == 0
    code = main(["report", str(out_dir / "audit.jsonl")])
    report_out = capsys.readouterr().out
    assert code == 0
    assert report_out == ask_out


def test_report_out_flag_writes_file(tmp_path, capsys):
    replay = write_replay(
        tmp_path, {"DAG/english-to-alloy": ["1. all n: Node | n !in n.^link\n"]}
    )
    out_dir = tmp_path / "run"
    main(["ask", "english-to-alloy", "DAG", "--replay", replay, "--out", str(out_dir)])
    capsys.readouterr()
    target = tmp_path / "report.md"
    code = main(["report", str(out_dir / "audit.jsonl"), "--out", str(target)])
    capsys.readouterr()
    assert code == 0
    text = target.read_text(encoding="utf-8")
    assert "## English to Alloy" in text
    assert "| DAG | 1 | 0 | 0 | 1 | 1 | 0 |" in text


def test_ask_is_deterministic_across_runs(tmp_path, capsys):
    replay = write_replay(tmp_path, build_full_replay())
    outputs = []
    for name in ("run1", "run2"):
        code = main(
            ["ask", "all", "all", "--replay", replay, "--out", str(tmp_path / name)]
        )
        assert code == 0
        outputs.append(capsys.readouterr().out)
    assert outputs[0] == outputs[1]
