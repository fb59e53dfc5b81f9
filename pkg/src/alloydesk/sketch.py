r"""Sketches: predicate bodies with named holes plus candidate sets.

A hole is written ``\E,name\`` (expression), ``\O,name\`` or ``\CO,name\``
(comparison operator; the two spellings are one hole kind), or ``\Q,name\``
(quantifier/multiplicity keyword). Each hole names a candidate set defined
on its own line as ``name := {| alt1|alt2|... |}``. Alternatives may
contain nested ``(a|b|...)`` groups, which expand combinatorially left to
right; expansion is plain text substitution, done before any parsing.

Solving a sketch is brute force: substitute every combination of
candidates into the body, skip the ones that fail to parse or type-check,
and keep exactly those whose completed formula is equivalent to the ground
truth on every instance within scope.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional

from .checker import CheckConfig, all_instances
from .evaluator import eval_formula
from .formulas import Formula
from .parser import ParseError, parse_formula_body
from .schema import Schema

_MARKER_RE = re.compile(r"\\([A-Za-z]+),([A-Za-z_]\w*)\\")
_DEF_RE = re.compile(r"^\s*([A-Za-z_]\w*)\s*:=\s*(\{\|.*\|\})\s*$")
_PRED_WRAP_RE = re.compile(r"^\s*pred\s+[A-Za-z_]\w*\s*\{(.*)\}\s*$", re.DOTALL)
_FENCE_RE = re.compile(r"^\s*```.*$", re.MULTILINE)


class HoleKind(Enum):
    EXPRESSION = "expression"
    OPERATOR = "operator"
    QUANTIFIER = "quantifier"


_KIND_BY_MARKER = {
    "E": HoleKind.EXPRESSION,
    "O": HoleKind.OPERATOR,
    "CO": HoleKind.OPERATOR,
    "Q": HoleKind.QUANTIFIER,
}


@dataclass(frozen=True)
class Hole:
    kind: HoleKind
    set_name: str


@dataclass(frozen=True)
class CandidateSet:
    """A named set of textual alternatives, kept in written form."""

    name: str
    pattern: str  # "{| ... |}" as written


@dataclass(frozen=True)
class Sketch:
    schema: Schema
    body_template: str  # hole markers still in place
    holes: tuple[Hole, ...]
    candidate_sets: tuple[CandidateSet, ...]
    source_text: str

    def candidate_set(self, name: str) -> CandidateSet:
        for cs in self.candidate_sets:
            if cs.name == name:
                return cs
        raise KeyError(name)


@dataclass(frozen=True)
class Completion:
    """One filled-in sketch: the chosen candidate per hole and the result."""

    choices: tuple[str, ...]
    text: str
    formula: Formula


def _split_top(s: str, line: int = 1) -> list[str]:
    """Split on '|' at parenthesis depth zero."""
    parts, depth, start = [], 0, 0
    for i, c in enumerate(s):
        if c == "(":
            depth += 1
        elif c == ")":
            depth -= 1
            if depth < 0:
                raise ParseError("unbalanced ')' in candidate pattern", line)
        elif c == "|" and depth == 0:
            parts.append(s[start:i])
            start = i + 1
    if depth != 0:
        raise ParseError("unbalanced '(' in candidate pattern", line)
    parts.append(s[start:])
    return parts


def _expand_alternative(s: str) -> list[str]:
    """Expand every parenthesized group in ``s``, left to right."""
    i = s.find("(")
    if i < 0:
        return [s]
    depth = 0
    j = i
    for j in range(i, len(s)):
        if s[j] == "(":
            depth += 1
        elif s[j] == ")":
            depth -= 1
            if depth == 0:
                break
    if depth != 0:
        raise ParseError("unbalanced '(' in candidate pattern")
    choices = [
        expanded
        for alt in _split_top(s[i + 1 : j])
        for expanded in _expand_alternative(alt.strip())
    ]
    tails = _expand_alternative(s[j + 1 :])
    return [s[:i] + c + t for c in choices for t in tails]


def expand_candidate_set(cs: CandidateSet) -> list[str]:
    """All concrete texts of a candidate set, order-preserving, deduplicated.

    ``{| Node|n|((Node|n).(*|^)link) |}`` expands to Node, n, Node.*link,
    Node.^link, n.*link, n.^link: top-level ``|`` separates alternatives
    and nested groups multiply out left to right.
    """
    m = re.fullmatch(r"\{\|(.*)\|\}", cs.pattern.strip(), re.DOTALL)
    if not m:
        raise ParseError(f"candidate set {cs.name!r} is not of the form {{| ... |}}")
    out: list[str] = []
    seen: set[str] = set()
    for alt in _split_top(m.group(1)):
        for text in _expand_alternative(alt.strip()):
            if text not in seen:
                seen.add(text)
                out.append(text)
    if not out or any(not t for t in out):
        raise ParseError(f"candidate set {cs.name!r} has an empty alternative")
    return out


def parse_sketch(text: str, schema: Schema) -> Sketch:
    """Read a sketch: a predicate body (optionally pred-wrapped) with hole
    markers, followed by one ``name := {| ... |}`` line per candidate set.

    Raises ParseError for unknown marker kinds, undefined or unused-name
    references, and malformed candidate sets.
    """
    source = text
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    text = _FENCE_RE.sub("", text)
    body_lines: list[str] = []
    sets: list[CandidateSet] = []
    for line in text.split("\n"):
        m = _DEF_RE.match(line)
        if m:
            if any(cs.name == m.group(1) for cs in sets):
                raise ParseError(f"candidate set {m.group(1)!r} defined twice")
            sets.append(CandidateSet(m.group(1), m.group(2)))
        elif re.match(r"^\s*[A-Za-z_]\w*\s*:=", line):
            raise ParseError(f"malformed candidate set definition: {line.strip()!r}")
        else:
            body_lines.append(line)
    body = "\n".join(body_lines).strip("\n")
    m = _PRED_WRAP_RE.match(body)
    if m:
        body = m.group(1).strip("\n")
    holes: list[Hole] = []
    for hm in re.finditer(r"\\([A-Za-z]+),([^\\]*)\\", body):
        kind_text, name = hm.group(1), hm.group(2)
        if kind_text not in _KIND_BY_MARKER:
            raise ParseError(f"unknown hole marker kind {kind_text!r}")
        if not re.fullmatch(r"[A-Za-z_]\w*", name):
            raise ParseError(f"bad candidate-set name {name!r} in hole marker")
        if not any(cs.name == name for cs in sets):
            raise ParseError(f"hole names undefined candidate set {name!r}")
        holes.append(Hole(_KIND_BY_MARKER[kind_text], name))
    sketch = Sketch(schema, body, tuple(holes), tuple(sets), source)
    for cs in sets:
        expand_candidate_set(cs)  # validates shape and nonemptiness
    return sketch


def _substitute(template: str, choices: tuple[str, ...]) -> str:
    it = iter(choices)
    return _MARKER_RE.sub(lambda _m: next(it), template)


class CompletionStream:
    """Iterate valid completions; count raw combinations and skipped ones.

    ``raw_count`` is the full Cartesian product size; ``skipped`` (final
    after exhaustion) counts substitutions that failed to parse or
    type-check. Completions come in lexicographic order by candidate
    index, first hole most significant.
    """

    def __init__(self, sketch: Sketch):
        self.sketch = sketch
        self.choice_lists = [
            expand_candidate_set(sketch.candidate_set(h.set_name))
            for h in sketch.holes
        ]
        self.raw_count = math.prod(len(c) for c in self.choice_lists)
        self.skipped = 0

    def __iter__(self) -> Iterator[Completion]:
        for combo in itertools.product(*self.choice_lists):
            text = _substitute(self.sketch.body_template, combo)
            try:
                formula = parse_formula_body(text, self.sketch.schema)
            except ParseError:
                self.skipped += 1
                continue
            yield Completion(combo, text, formula)


def enumerate_completions(sketch: Sketch) -> CompletionStream:
    """Stream all completions that parse and type-check."""
    return CompletionStream(sketch)


def solve_sketch(
    sketch: Sketch,
    ground_truth: Formula,
    schema: Schema,
    cfg: CheckConfig = CheckConfig(),
) -> list[Completion]:
    """All completions equivalent to the ground truth, in enumeration order."""
    instances = all_instances(schema, cfg)
    expected = [eval_formula(ground_truth, inst) for inst in instances]
    solutions = []
    for completion in enumerate_completions(sketch):
        if all(
            eval_formula(completion.formula, inst) == want
            for inst, want in zip(instances, expected)
        ):
            solutions.append(completion)
    return solutions


def first_solution(
    sketch: Sketch,
    ground_truth: Formula,
    schema: Schema,
    cfg: CheckConfig = CheckConfig(),
) -> Optional[Completion]:
    """The first correct completion, or None; cheap solvability probe."""
    instances = all_instances(schema, cfg)
    expected = [eval_formula(ground_truth, inst) for inst in instances]
    for completion in enumerate_completions(sketch):
        if all(
            eval_formula(completion.formula, inst) == want
            for inst, want in zip(instances, expected)
        ):
            return completion
    return None
