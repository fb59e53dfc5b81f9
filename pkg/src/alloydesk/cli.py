"""Command-line interface.

Subcommands: check (bounded equivalence of two formula files), classify
(batch-judge a candidates file against a corpus property), sketch solve
(enumerate all correct hole fillings), ask (run LLM tasks through a real
or replay transport), and report (markdown tables from an audit log).

Exit codes: 0 success or equivalent; 1 semantic mismatch; 2 parse or
validation error; 3 transport error.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys

from .checker import CheckConfig, check_equivalence
from .corpus import CorpusEntry, ValidationError, builtin_corpus, get_entry, load_corpus
from .llm import (
    EmptyResponseError,
    HTTPTransport,
    HTTPTransportConfig,
    ReplayTransport,
    TaskKind,
    TransportError,
    build_prompt,
    run_task,
)
from .parser import ParseError, parse_formula_body, render
from .pipeline import (
    ReportRow,
    append_audit,
    classify_batch,
    markdown_report,
    read_audit,
    record_from_task_run,
    row_from_record,
    row_from_task_run,
    uniqueness_counts,
)
from .schema import SchemaError, parse_schema
from .sketch import CompletionStream, solve_sketch

_SIG_BLOCK_RE = re.compile(r"sig\s+[A-Za-z_]\w*\s*\{[^}]*\}")

OK = 0
MISMATCH = 1
PARSE_ERROR = 2
TRANSPORT_FAILURE = 3


def _split_model_text(text: str) -> tuple[str, str]:
    """Separate sig declarations from the formula part of a file."""
    sig_blocks = _SIG_BLOCK_RE.findall(text)
    rest = _SIG_BLOCK_RE.sub("", text)
    return "\n".join(sig_blocks), rest


def _load_entries(corpus_path: str | None) -> list[CorpusEntry]:
    if corpus_path is None:
        return builtin_corpus()
    return load_corpus(corpus_path)


def _read_candidates(path: str) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if path.endswith(".json"):
        data = json.loads(text)
        if not isinstance(data, list) or not all(isinstance(x, str) for x in data):
            raise ValueError(f"{path}: expected a JSON list of strings")
        return data
    blocks: list[str] = []
    block: list[str] = []
    for ln in text.split("\n") + [""]:
        if ln.strip():
            block.append(ln)
        elif block:
            blocks.append("\n".join(block))
            block = []
    return blocks


def _cmd_check(args) -> int:
    with open(args.reference, encoding="utf-8") as fh:
        ref_text = fh.read()
    with open(args.candidate, encoding="utf-8") as fh:
        cand_text = fh.read()
    schema_src = None
    if args.schema:
        schema_src = args.schema
        if os.path.exists(schema_src):
            with open(schema_src, encoding="utf-8") as fh:
                schema_src = fh.read()
    ref_sigs, ref_body = _split_model_text(ref_text)
    cand_sigs, cand_body = _split_model_text(cand_text)
    schema_text = schema_src or ref_sigs or cand_sigs
    if not schema_text.strip():
        print(
            "no schema found: pass --schema or include sig declarations",
            file=sys.stderr,
        )
        return PARSE_ERROR
    try:
        schema = parse_schema(schema_text)
        ref = parse_formula_body(ref_body, schema)
        cand = parse_formula_body(cand_body, schema)
    except (ParseError, SchemaError) as err:
        print(f"parse error: {err}", file=sys.stderr)
        return PARSE_ERROR
    result = check_equivalence(ref, cand, schema, CheckConfig(args.scope))
    if result.equivalent:
        print("Equivalent")
        return OK
    inst = result.counterexample
    print("Counterexample:")
    print(inst.describe())
    print(f"reference evaluates to {result.left_value}, candidate to {result.right_value}")
    return MISMATCH


def _cmd_classify(args) -> int:
    try:
        entry = get_entry(args.property, _load_entries(args.corpus))
        candidates = _read_candidates(args.candidates)
    except (KeyError, ValidationError, ValueError) as err:
        print(err, file=sys.stderr)
        return PARSE_ERROR
    cfg = CheckConfig(args.scope)
    results = classify_batch(entry.reference_text, candidates, entry.schema, cfg)
    for text, verdict in results:
        label = text.replace("\n", " ")
        print(f"[{verdict.kind}] {label}")
    kinds = [v.kind for _, v in results]
    unique_syn, sem_classes = uniqueness_counts(candidates, entry.schema, cfg)
    row = ReportRow(
        property_id=entry.id,
        task_kind="classify",
        correct=kinds.count("correct"),
        syntax_error=kinds.count("syntax_error"),
        wrong=kinds.count("wrong"),
        unique_syntactic=unique_syn,
        semantic_classes=sem_classes,
    )
    print(
        f"correct={row.correct} syntax_error={row.syntax_error} wrong={row.wrong}"
        f" unique_syntactic={row.unique_syntactic}"
        f" semantic_classes={row.semantic_classes}"
    )
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        from .pipeline import verdict_to_json

        record = {
            "run_id": f"{entry.id}/classify/scope{cfg.max_scope}",
            "property": entry.id,
            "task_kind": "classify",
            "scope": cfg.max_scope,
            "solution_count": len(candidates),
            "schema_text": entry.schema_text,
            "reference_text": entry.reference_text,
            "prompt": "",
            "responses": [],
            "candidates": [
                {"text": t, "verdict": verdict_to_json(v)} for t, v in results
            ],
            "retry_count": 0,
        }
        append_audit(os.path.join(args.out, "audit.jsonl"), record)
    return OK


def _cmd_sketch_solve(args) -> int:
    try:
        entry = get_entry(args.property, _load_entries(args.corpus))
    except (KeyError, ValidationError) as err:
        print(err, file=sys.stderr)
        return PARSE_ERROR
    cfg = CheckConfig(args.scope)
    stream = CompletionStream(entry.sketch)
    solutions = solve_sketch(entry.sketch, entry.reference, entry.schema, cfg)
    print(f"raw combinations: {stream.raw_count}")
    completions = list(stream)
    print(f"ill-typed skipped: {stream.skipped}")
    print(f"well-formed completions: {len(completions)}")
    print(f"correct completions: {len(solutions)}")
    for sol in solutions:
        body = render(sol.formula).replace("\n", "\n  ")
        print(f"  {body}")
    return OK


def _make_transport(args):
    if args.replay:
        return ReplayTransport.from_file(args.replay)
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            raw = json.load(fh)
        return HTTPTransport(HTTPTransportConfig(**raw))
    return None


def _cmd_ask(args) -> int:
    try:
        entries = _load_entries(args.corpus)
    except ValidationError as err:
        print(err, file=sys.stderr)
        return PARSE_ERROR
    if args.task == "all":
        kinds = list(TaskKind)
    else:
        kinds = [TaskKind(args.task)]
    if args.property == "all":
        selected = entries
    else:
        try:
            selected = [get_entry(args.property, entries)]
        except KeyError as err:
            print(err, file=sys.stderr)
            return PARSE_ERROR
    transport = _make_transport(args)
    if transport is None:
        print("no transport: pass --replay FILE or --config FILE", file=sys.stderr)
        return PARSE_ERROR
    cfg = CheckConfig(args.scope)
    os.makedirs(args.out, exist_ok=True)
    audit_path = os.path.join(args.out, "audit.jsonl")
    rows = []
    for entry in selected:
        for kind in kinds:
            req = build_prompt(kind, entry, args.count)
            try:
                run = run_task(req, transport, entry.reference, entry.schema, cfg)
            except TransportError as err:
                print(f"transport error: {err}", file=sys.stderr)
                return TRANSPORT_FAILURE
            except EmptyResponseError as err:
                print(f"empty response for {entry.id}/{kind.value}: {err}", file=sys.stderr)
                return PARSE_ERROR
            append_audit(audit_path, record_from_task_run(run, entry, cfg))
            rows.append(row_from_task_run(run, entry.schema, cfg))
    print(markdown_report(rows), end="")
    print(f"audit log: {audit_path}", file=sys.stderr)
    return OK


def _cmd_report(args) -> int:
    records = read_audit(args.audit)
    rows = [row_from_record(r) for r in records]
    text = markdown_report(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        print(text, end="")
    return OK


def _add_common(p: argparse.ArgumentParser, corpus: bool = True) -> None:
    p.add_argument("--scope", type=int, default=3, help="per-sig atom bound")
    if corpus:
        p.add_argument("--corpus", default=None, help="corpus file (default: built-in)")


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alloydesk",
        description="Bounded checking, sketch solving, and LLM-task running"
        " for a fragment of Alloy.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="bounded equivalence of two formula files")
    p.add_argument("reference")
    p.add_argument("candidate")
    p.add_argument("--schema", default=None, help="schema text or file")
    _add_common(p, corpus=False)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("classify", help="judge a candidates file against a property")
    p.add_argument("property")
    p.add_argument("candidates", help=".json list or blank-line-separated text")
    p.add_argument("--out", default=None, help="directory for the audit log")
    _add_common(p)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("sketch", help="sketch operations")
    sketch_sub = p.add_subparsers(dest="sketch_command", required=True)
    ps = sketch_sub.add_parser("solve", help="enumerate all correct completions")
    ps.add_argument("property")
    _add_common(ps)
    ps.set_defaults(func=_cmd_sketch_solve)

    p = sub.add_parser("ask", help="run LLM tasks and classify the answers")
    p.add_argument("task", choices=[k.value for k in TaskKind] + ["all"])
    p.add_argument("property", help="corpus entry id, or 'all'")
    p.add_argument("--count", type=int, default=20, help="solutions requested")
    p.add_argument("--replay", default=None, help="canned-response JSON file")
    p.add_argument("--config", default=None, help="HTTP transport JSON config")
    p.add_argument("--out", default=".", help="directory for the audit log")
    _add_common(p)
    p.set_defaults(func=_cmd_ask)

    p = sub.add_parser("report", help="markdown tables from an audit log")
    p.add_argument("audit")
    p.add_argument("--out", default=None, help="write to file instead of stdout")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_arg_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
