"""Run records, the append-only audit log, and markdown report tables.

Every prompt/response exchange becomes one JSON line in the audit log,
carrying enough context (schema text, ground-truth body, candidate texts)
that verdicts can be recomputed later without the original corpus file.
Reports aggregate per-property rows into one table per task kind.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass

from .checker import CheckConfig, Verdict, classify, semantic_partition
from .llm import TaskKind, TaskRun
from .parser import ParseError, normalize, parse_formula_body, render
from .schema import Instance, Schema, parse_schema

_AUDIT_LOCK = threading.Lock()

_TASK_TITLES = {
    TaskKind.ENGLISH_TO_ALLOY.value: "English to Alloy",
    TaskKind.ALLOY_TO_ALLOY.value: "Alloy to Alloy",
    TaskKind.SKETCH_TO_ALLOY.value: "Sketch to Alloy",
}


@dataclass(frozen=True)
class ReportRow:
    property_id: str
    task_kind: str
    correct: int
    syntax_error: int
    wrong: int
    unique_syntactic: int
    semantic_classes: int
    retry_count: int = 0

    @property
    def total(self) -> int:
        return self.correct + self.syntax_error + self.wrong


def instance_to_json(inst: Instance) -> dict:
    return {
        "atoms": {sig: list(inst.universe.atoms(sig)) for sig, _ in inst.universe.counts},
        "relations": {
            name: sorted("->".join(t) for t in tuples)
            for name, tuples in inst.relations
        },
        "text": inst.describe(),
    }


def verdict_to_json(v: Verdict) -> dict:
    out: dict = {"kind": v.kind}
    if v.parse_error is not None:
        out["parse_error"] = str(v.parse_error)
    if v.counterexample is not None:
        out["counterexample"] = instance_to_json(v.counterexample)
    return out


def uniqueness_counts(
    candidates: list[str], schema: Schema, cfg: CheckConfig
) -> tuple[int, int]:
    """(syntactically unique, semantic classes) among the parseable candidates.

    Syntactic uniqueness is equality of normalized rendered forms; semantic
    classes come from brute-force truth-vector partitioning.
    """
    parsed = []
    normal_forms = set()
    for text in candidates:
        # Empty texts classify as syntax errors, so they are not formulas here.
        if not text.strip():
            continue
        try:
            f = parse_formula_body(text, schema)
        except ParseError:
            continue
        parsed.append(f)
        normal_forms.add(render(normalize(f)))
    if not parsed:
        return 0, 0
    return len(normal_forms), len(semantic_partition(parsed, schema, cfg))


def row_from_task_run(run: TaskRun, schema: Schema, cfg: CheckConfig) -> ReportRow:
    correct, syntax, wrong = run.verdict_counts()
    unique_syn, sem_classes = uniqueness_counts(
        [c.text for c in run.classified], schema, cfg
    )
    return ReportRow(
        property_id=run.request.property_id,
        task_kind=run.request.task_kind.value,
        correct=correct,
        syntax_error=syntax,
        wrong=wrong,
        unique_syntactic=unique_syn,
        semantic_classes=sem_classes,
        retry_count=run.retry_count,
    )


def classify_batch(
    ground_truth_text: str,
    candidates: list[str],
    schema: Schema,
    cfg: CheckConfig = CheckConfig(),
) -> list[tuple[str, Verdict]]:
    """Classify stored candidate texts; empty candidates count as syntax errors."""
    ground_truth = parse_formula_body(ground_truth_text, schema)
    results = []
    for text in candidates:
        if not text.strip():
            results.append((text, Verdict.syntax_error(ParseError("empty candidate"))))
        else:
            results.append((text, classify(ground_truth, text, schema, cfg)))
    return results


def record_from_task_run(run: TaskRun, entry, cfg: CheckConfig) -> dict:
    """One audit-log record per prompt/response exchange (retries included)."""
    return {
        "run_id": f"{run.request.property_id}/{run.request.task_kind.value}"
        f"/scope{cfg.max_scope}",
        "property": run.request.property_id,
        "task_kind": run.request.task_kind.value,
        "scope": cfg.max_scope,
        "solution_count": run.request.solution_count,
        "schema_text": entry.schema_text,
        "reference_text": entry.reference_text,
        "prompt": run.request.rendered_prompt,
        "responses": [
            {
                "raw_text": r.raw_text,
                "model": r.model,
                "timestamp": r.timestamp,
                "token_usage": r.token_usage,
            }
            for r in run.responses
        ],
        "candidates": [
            {"text": c.text, "verdict": verdict_to_json(c.verdict)}
            for c in run.classified
        ],
        "retry_count": run.retry_count,
    }


def append_audit(path: str, record: dict) -> None:
    line = json.dumps(record, sort_keys=True)
    with _AUDIT_LOCK:
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")


def read_audit(path: str) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(json.loads(line))
    return records


def reclassify_record(record: dict, cfg: CheckConfig | None = None) -> list[str]:
    """Recompute verdict kinds for a stored record from its own fields."""
    cfg = cfg or CheckConfig(max_scope=record["scope"])
    schema = parse_schema(record["schema_text"])
    results = classify_batch(
        record["reference_text"],
        [c["text"] for c in record["candidates"]],
        schema,
        cfg,
    )
    return [v.kind for _, v in results]


def row_from_record(record: dict, cfg: CheckConfig | None = None) -> ReportRow:
    cfg = cfg or CheckConfig(max_scope=record["scope"])
    schema = parse_schema(record["schema_text"])
    kinds = [c["verdict"]["kind"] for c in record["candidates"]]
    unique_syn, sem_classes = uniqueness_counts(
        [c["text"] for c in record["candidates"]], schema, cfg
    )
    return ReportRow(
        property_id=record["property"],
        task_kind=record["task_kind"],
        correct=kinds.count("correct"),
        syntax_error=kinds.count("syntax_error"),
        wrong=kinds.count("wrong"),
        unique_syntactic=unique_syn,
        semantic_classes=sem_classes,
        retry_count=record.get("retry_count", 0),
    )


_HEADER = (
    "| Property | Correct | Syntax error | Wrong | Unique (syntactic) "
    "| Semantic classes | Retries |"
)
_RULE = "|---|---|---|---|---|---|---|"


def markdown_report(rows: list[ReportRow]) -> str:
    """One markdown table per task kind, rows alphabetical by property."""
    known = [k.value for k in TaskKind]
    extras = sorted({r.task_kind for r in rows} - set(known))
    sections = []
    for kind in known + extras:
        sections.append(f"## {_TASK_TITLES.get(kind, kind)}\n")
        sections.append(_HEADER)
        sections.append(_RULE)
        for row in sorted(
            (r for r in rows if r.task_kind == kind),
            key=lambda r: r.property_id,
        ):
            sections.append(
                f"| {row.property_id} | {row.correct} | {row.syntax_error} "
                f"| {row.wrong} | {row.unique_syntactic} "
                f"| {row.semantic_classes} | {row.retry_count} |"
            )
        sections.append("")
    return "\n".join(sections).rstrip("\n") + "\n"
