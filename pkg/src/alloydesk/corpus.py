r"""The built-in property corpus and a plain-text corpus file format.

Eleven classic properties of graphs and binary relations, each with a
natural-language description, a reference formula, and a sketch. The three
graph properties use ``sig Node { link: set Node }``; the eight relation
properties use ``sig S { r: set S }``.

The file format is line-oriented: ``[PropertyName]`` opens an entry,
``key = value`` sets a field, and ``key = <<<`` starts a here-doc closed
by a line holding only ``>>>``. Keys are description, schema, reference,
and sketch.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .checker import CheckConfig
from .formulas import Formula
from .parser import ParseError, parse_formula_body
from .schema import Schema, SchemaError, parse_schema
from .sketch import Sketch, first_solution, parse_sketch

GRAPH_SCHEMA_TEXT = "sig Node { link: set Node }"
RELATION_SCHEMA_TEXT = "sig S { r: set S }"


class ValidationError(Exception):
    """A corpus entry breaks an invariant; names the entry and the problem."""

    def __init__(self, entry_id: str, problem: str):
        super().__init__(f"corpus entry {entry_id!r}: {problem}")
        self.entry_id = entry_id
        self.problem = problem


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    description: str
    schema_text: str
    schema: Schema
    reference_text: str
    reference: Formula
    sketch_text: str
    sketch: Sketch


def _entry(
    entry_id: str, description: str, schema_text: str, reference: str, sketch: str
) -> CorpusEntry:
    schema = parse_schema(schema_text)
    return CorpusEntry(
        id=entry_id,
        description=description,
        schema_text=schema_text,
        schema=schema,
        reference_text=reference,
        reference=parse_formula_body(reference, schema),
        sketch_text=sketch,
        sketch=parse_sketch(sketch, schema),
    )


_COMPARISON_SET = "co := {| =|in|!=|!in |}"
_GRAPH_EXPR_SET = "e := {| Node|n|((Node|n).(*|^)link) |}"
_RELATION_EXPR_SET = "e := {| r|s|t|((s|t)->(s|t)) |}"
_KEYWORD_SET = "q := {| all|no|some|lone|one |}"
_POINT_EXPR_SET = "e := {| r|s|(s.r) |}"

_PAIR_HOLE = "\\E,e\\ \\CO,co\\ \\E,e\\"
_KEYWORD_HOLE = "\\Q,q\\ \\E,e\\"


def _raw_entries() -> list[tuple[str, str, str, str, str]]:
    """(id, description, schema text, reference body, sketch text) per property."""
    return [
        (
            "DAG",
            "Directed acyclic graph",
            GRAPH_SCHEMA_TEXT,
            "all n: Node | n !in n.^link",
            "pred DAG {\n"
            "  // Directed acyclic graph\n"
            f"  all n: Node | {_PAIR_HOLE}\n"
            "}\n"
            f"{_COMPARISON_SET}\n{_GRAPH_EXPR_SET}",
        ),
        (
            "Cycle",
            "Graph with directed cycle",
            GRAPH_SCHEMA_TEXT,
            "some n: Node | n in n.^link",
            "pred Cycle {\n"
            "  // Graph with directed cycle\n"
            f"  some n: Node | {_PAIR_HOLE}\n"
            "}\n"
            f"{_COMPARISON_SET}\n{_GRAPH_EXPR_SET}",
        ),
        (
            "Circular",
            "The number of nodes is equal to the number of edges and the graph"
            " has a directed cycle that visits all nodes",
            GRAPH_SCHEMA_TEXT,
            "#Node = #link\nall n: Node | one n.link\nall m, n: Node | m in n.^link",
            "pred Circular {\n"
            "  // The number of nodes is equal to the number of edges and the"
            " graph has a directed cycle that visits all nodes\n"
            "#Node = #link\n"
            "  all n: Node | one n.link\n"
            f"  all m, n: Node | {_PAIR_HOLE}\n"
            "}\n"
            f"{_COMPARISON_SET}\n"
            "e := {| (Node|m|n).(*|^)link |}",
        ),
        (
            "Connex",
            "For every pair of elements in S, either the first is related to"
            " the second or vice versa",
            RELATION_SCHEMA_TEXT,
            "all s, t: S |\n  s->t in r or t->s in r",
            "pred Connex{\n"
            "  // For every pair of elements in S, either the first is related"
            " to the second or vice versa\n"
            f"  all s, t: S | s->t in r or {_PAIR_HOLE}\n"
            "}\n"
            f"{_COMPARISON_SET}\n{_RELATION_EXPR_SET}",
        ),
        (
            "Reflexive",
            "Every element in S is related to itself",
            RELATION_SCHEMA_TEXT,
            "all s: S | s->s in r",
            "pred Reflexive{\n"
            "  // Every element in S is related to itself\n"
            f"  all s: S | {_PAIR_HOLE}\n"
            "}\n"
            f"{_COMPARISON_SET}\n"
            "e := {| r|s|(s->s) |}",
        ),
        (
            "Symmetric",
            "If element x in S is related to y, then y is also related to x",
            RELATION_SCHEMA_TEXT,
            "all s, t: S |\n  s->t in r implies t->s in r",
            "pred Symmetric{\n"
            "  // If element x in S is related to y, then y is also related to x\n"
            f"  all s, t: S | s->t in r implies {_PAIR_HOLE}\n"
            "}\n"
            f"{_COMPARISON_SET}\n{_RELATION_EXPR_SET}",
        ),
        (
            "Transitive",
            "If element x in S is related to y and y is related to z, then x"
            " is also related to z",
            RELATION_SCHEMA_TEXT,
            "all s, t, u: S |\n  s->t in r and t->u in r\n    implies s->u in r",
            # The two-variable expression set used by the other relation
            # sketches cannot mention u, so no filling is equivalent to
            # transitivity (brute-force verified). Shipped set adds u.
            "pred Transitive{\n"
            "  // If element x in S is related to y and y is related to z,"
            " then x is also related to z\n"
            f"  all s, t, u: S | s->t in r and t->u in r implies {_PAIR_HOLE}\n"
            "}\n"
            f"{_COMPARISON_SET}\n"
            "e := {| r|s|t|u|((s|t|u)->(s|t|u)) |}",
        ),
        (
            "Antisymmetric",
            "If element x in S is related to y and y is related to x, then x"
            " and y are the same element",
            RELATION_SCHEMA_TEXT,
            "all s, t: S |\n  s->t in r and t->s in r\n    implies s = t",
            "pred Antisymmetric{\n"
            "  // If element x in S is related to y and y is related to x,"
            " then x and y are the same element\n"
            f"  all s, t: S | s->t in r and t->s in r implies {_PAIR_HOLE}\n"
            "}\n"
            f"{_COMPARISON_SET}\n{_RELATION_EXPR_SET}",
        ),
        (
            "Irreflexive",
            "No element in S is related to itself",
            RELATION_SCHEMA_TEXT,
            "all s, t: S |\n  s->t in r implies s != t",
            "pred Irreflexive {\n"
            "  -- No element in S is related to itself\n"
            "  all s, t: S | s->t in r implies \\E,e\\ \\O,o\\ \\E,e\\\n"
            "}\n"
            "e := {| S|s|t|(s|t)->(s|t)|(s|t).r |}\n"
            "o := {| in|!in|=|!= |}",
        ),
        (
            "Functional",
            "Every element in S is related to at most one element (making r a"
            " partial function)",
            RELATION_SCHEMA_TEXT,
            "all s: S | lone s.r",
            "pred Functional{\n"
            "  // Every element in S is related to at most one element (making"
            " r a partial function)\n"
            f"  all s: S | {_KEYWORD_HOLE}\n"
            "}\n"
            f"{_KEYWORD_SET}\n{_POINT_EXPR_SET}",
        ),
        (
            "Function",
            "Every element in S is related to exactly one element (making r a"
            " total function)",
            RELATION_SCHEMA_TEXT,
            "all s: S | one s.r",
            "pred Function{\n"
            "  // Every element in S is related to exactly one element (making"
            " r a total function)\n"
            f"  all s: S | {_KEYWORD_HOLE}\n"
            "}\n"
            f"{_KEYWORD_SET}\n{_POINT_EXPR_SET}",
        ),
    ]


@lru_cache(maxsize=1)
def _builtin() -> tuple[CorpusEntry, ...]:
    return tuple(_entry(*raw) for raw in _raw_entries())


def builtin_corpus() -> list[CorpusEntry]:
    """The 11 built-in properties, graph properties first."""
    return list(_builtin())


def get_entry(entry_id: str, entries: list[CorpusEntry] | None = None) -> CorpusEntry:
    entries = builtin_corpus() if entries is None else entries
    for e in entries:
        if e.id == entry_id:
            return e
    known = ", ".join(e.id for e in entries)
    raise KeyError(f"no corpus entry {entry_id!r} (known: {known})")


def validate_entry(entry: CorpusEntry, cfg: CheckConfig = CheckConfig()) -> None:
    """Check the semantic invariants: the sketch must have a correct completion."""
    if first_solution(entry.sketch, entry.reference, entry.schema, cfg) is None:
        raise ValidationError(entry.id, "sketch has no correct completion")


def load_corpus(
    path: str, validate: bool = True, cfg: CheckConfig = CheckConfig()
) -> list[CorpusEntry]:
    """Read entries from a corpus file; IO errors propagate as OSError.

    With ``validate`` (the default), each entry's sketch is brute-force
    checked for solvability against its reference formula.
    """
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    entries: list[CorpusEntry] = []
    current_id: str | None = None
    fields: dict[str, str] = {}
    lines = text.split("\n")
    i = 0

    def finish() -> None:
        if current_id is None:
            return
        for key in ("description", "schema", "reference", "sketch"):
            if key not in fields:
                raise ValidationError(current_id, f"missing field {key!r}")
        try:
            entry = _entry(
                current_id,
                fields["description"],
                fields["schema"],
                fields["reference"],
                fields["sketch"],
            )
        except (ParseError, SchemaError) as err:
            raise ValidationError(current_id, str(err)) from err
        if validate:
            validate_entry(entry, cfg)
        entries.append(entry)

    while i < len(lines):
        line = lines[i]
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            i += 1
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            finish()
            current_id = stripped[1:-1].strip()
            fields = {}
            i += 1
            continue
        if "=" in line and current_id is not None:
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if value == "<<<":
                block = []
                i += 1
                while i < len(lines) and lines[i].strip() != ">>>":
                    block.append(lines[i])
                    i += 1
                if i >= len(lines):
                    raise ValidationError(current_id, "unterminated <<< block")
                value = "\n".join(block)
            fields[key] = value
            i += 1
            continue
        raise ValidationError(
            current_id or "?", f"unrecognized corpus line: {stripped!r}"
        )
    finish()
    return entries


def dump_corpus(entries: list[CorpusEntry], path: str) -> None:
    """Write entries in the corpus file format (round-trips with load_corpus)."""
    blocks = []
    for e in entries:
        blocks.append(
            f"[{e.id}]\n"
            f"description = {e.description}\n"
            f"schema = {e.schema_text}\n"
            f"reference = <<<\n{e.reference_text}\n>>>\n"
            f"sketch = <<<\n{e.sketch_text}\n>>>\n"
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(blocks))
