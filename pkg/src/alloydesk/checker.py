"""Brute-force bounded checking: enumerate every instance, compare verdicts.

Equivalence here always means "agree on every instance up to the
configured scope". The sweep visits universes smallest first and instances
in the deterministic enumeration order of the schema module, so the first
counterexample found is a stable, minimal-ish witness.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from .evaluator import eval_formula
from .formulas import Formula
from .parser import ParseError, parse_formula_body
from .schema import Instance, Schema, enumerate_instances, enumerate_universes


@dataclass(frozen=True)
class CheckConfig:
    """Per-sig atom bound for the exhaustive sweep (the scope), default 3."""

    max_scope: int = 3


@lru_cache(maxsize=16)
def _instances(schema: Schema, max_scope: int) -> tuple[Instance, ...]:
    out = []
    for universe in enumerate_universes(schema, max_scope):
        out.extend(enumerate_instances(schema, universe))
    return tuple(out)


def all_instances(schema: Schema, cfg: CheckConfig = CheckConfig()) -> tuple[Instance, ...]:
    """Every instance at every universe up to the scope, in sweep order."""
    return _instances(schema, cfg.max_scope)


def find_instances(
    f: Formula,
    schema: Schema,
    cfg: CheckConfig = CheckConfig(),
    limit: int = 10,
) -> list[Instance]:
    """The first ``limit`` satisfying instances in enumeration order."""
    found = []
    for inst in all_instances(schema, cfg):
        if eval_formula(f, inst):
            found.append(inst)
            if len(found) >= limit:
                break
    return found


@dataclass(frozen=True)
class EquivalenceResult:
    """Outcome of an exhaustive sweep over two formulas.

    When not equivalent, carries the first differing instance together
    with both truth values on it.
    """

    equivalent: bool
    counterexample: Optional[Instance] = None
    left_value: Optional[bool] = None
    right_value: Optional[bool] = None


def check_equivalence(
    p: Formula,
    q: Formula,
    schema: Schema,
    cfg: CheckConfig = CheckConfig(),
) -> EquivalenceResult:
    """Sweep all instances; stop at the first on which ``p`` and ``q`` differ."""
    for inst in all_instances(schema, cfg):
        pv = eval_formula(p, inst)
        qv = eval_formula(q, inst)
        if pv != qv:
            return EquivalenceResult(False, inst, pv, qv)
    return EquivalenceResult(True)


CORRECT = "correct"
SYNTAX_ERROR = "syntax_error"
WRONG = "wrong"


@dataclass(frozen=True)
class Verdict:
    """How a candidate text fares against a ground-truth formula."""

    kind: str
    parse_error: Optional[ParseError] = None
    counterexample: Optional[Instance] = None

    @classmethod
    def correct(cls) -> "Verdict":
        return cls(CORRECT)

    @classmethod
    def syntax_error(cls, err: ParseError) -> "Verdict":
        return cls(SYNTAX_ERROR, parse_error=err)

    @classmethod
    def wrong(cls, counterexample: Instance) -> "Verdict":
        return cls(WRONG, counterexample=counterexample)


def classify(
    ground_truth: Formula,
    candidate_text: str,
    schema: Schema,
    cfg: CheckConfig = CheckConfig(),
) -> Verdict:
    """Parse the candidate, then decide Correct / SyntaxError / Wrong.

    Wrong carries the first instance on which the candidate and the ground
    truth disagree.
    """
    try:
        candidate = parse_formula_body(candidate_text, schema)
    except ParseError as err:
        return Verdict.syntax_error(err)
    result = check_equivalence(ground_truth, candidate, schema, cfg)
    if result.equivalent:
        return Verdict.correct()
    assert result.counterexample is not None
    return Verdict.wrong(result.counterexample)


def semantic_partition(
    formulas: list[Formula],
    schema: Schema,
    cfg: CheckConfig = CheckConfig(),
) -> list[list[Formula]]:
    """Group formulas into equivalence classes under the bounded sweep.

    Two formulas land in one class exactly when they agree on every
    instance (same criterion as check_equivalence). Classes keep first-
    seen order; so do members within a class.
    """
    instances = all_instances(schema, cfg)
    classes: dict[tuple, list[Formula]] = {}
    for f in formulas:
        signature = tuple(eval_formula(f, inst) for inst in instances)
        classes.setdefault(signature, []).append(f)
    return list(classes.values())
