"""Evaluate expressions and formulas on a concrete instance.

An expression denotes a set of atom tuples (a frozenset); a formula
denotes a truth value. The environment binds quantified variable names to
single atoms. Semantics of note:

* ``.`` is relational composition; ``^`` is the irreflexive transitive
  closure; ``*`` adds the identity over the whole universe.
* ``univ`` holds every atom of every sig; ``iden`` is the identity on it.
* Quantifier kinds count satisfying assignments: ``all`` means every
  assignment satisfies the body (vacuously true over an empty domain),
  ``some`` at least one, ``no`` none, ``lone`` at most one, ``one``
  exactly one.
* A multiplicity formula applies the same counting to the tuples of its
  expression; ``all e`` holds when ``e`` covers the full tuple product of
  its arity over the universe.
* ``#`` counts tuples exactly (arbitrary-size integers, no wraparound).
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Mapping

from .formulas import (
    And,
    Card,
    Closure,
    Compare,
    Conj,
    Expr,
    FieldRef,
    Formula,
    Iden,
    Iff,
    IllTypedError,
    Implies,
    IntCompare,
    IntExpr,
    IntLiteral,
    Intersect,
    Join,
    Minus,
    Mult,
    NoneSet,
    Not,
    Or,
    Product,
    Quant,
    ReflClosure,
    SigRef,
    Transpose,
    TrueFormula,
    Union,
    Univ,
    VarRef,
    arity_of,
)
from .schema import Instance

_EMPTY: Mapping[str, str] = {}


@lru_cache(maxsize=65536)
def _transitive_closure(pairs: frozenset) -> frozenset:
    result = set(pairs)
    while True:
        step = {
            (a, d)
            for (a, b) in result
            for (c, d) in pairs
            if b == c and (a, d) not in result
        }
        if not step:
            return frozenset(result)
        result |= step


def eval_expr(expr: Expr, inst: Instance, env: Mapping[str, str] = _EMPTY) -> frozenset:
    """The set of atom tuples ``expr`` denotes on ``inst`` under ``env``."""
    if isinstance(expr, SigRef):
        return frozenset((a,) for a in inst.universe.atoms(expr.name))
    if isinstance(expr, FieldRef):
        return inst.relation(expr.name)
    if isinstance(expr, VarRef):
        try:
            return frozenset({(env[expr.name],)})
        except KeyError:
            raise IllTypedError(f"unbound variable {expr.name!r}") from None
    if isinstance(expr, Iden):
        return frozenset((a, a) for a in inst.universe.all_atoms())
    if isinstance(expr, NoneSet):
        return frozenset()
    if isinstance(expr, Univ):
        return frozenset((a,) for a in inst.universe.all_atoms())
    if isinstance(expr, Join):
        left = eval_expr(expr.left, inst, env)
        right = eval_expr(expr.right, inst, env)
        return frozenset(
            x[:-1] + y[1:] for x in left for y in right if x[-1] == y[0]
        )
    if isinstance(expr, Product):
        left = eval_expr(expr.left, inst, env)
        right = eval_expr(expr.right, inst, env)
        return frozenset(x + y for x in left for y in right)
    if isinstance(expr, Union):
        return eval_expr(expr.left, inst, env) | eval_expr(expr.right, inst, env)
    if isinstance(expr, Intersect):
        return eval_expr(expr.left, inst, env) & eval_expr(expr.right, inst, env)
    if isinstance(expr, Minus):
        return eval_expr(expr.left, inst, env) - eval_expr(expr.right, inst, env)
    if isinstance(expr, Closure):
        return _transitive_closure(eval_expr(expr.expr, inst, env))
    if isinstance(expr, ReflClosure):
        return _transitive_closure(eval_expr(expr.expr, inst, env)) | frozenset(
            (a, a) for a in inst.universe.all_atoms()
        )
    if isinstance(expr, Transpose):
        return frozenset((b, a) for (a, b) in eval_expr(expr.expr, inst, env))
    raise IllTypedError(f"not an expression: {expr!r}")


def eval_int_expr(
    ie: IntExpr, inst: Instance, env: Mapping[str, str] = _EMPTY
) -> int:
    if isinstance(ie, IntLiteral):
        return ie.value
    if isinstance(ie, Card):
        return len(eval_expr(ie.expr, inst, env))
    raise IllTypedError(f"not an integer expression: {ie!r}")


def _count_satisfies(kind: str, count: int, saw_two: bool) -> bool:
    if kind == "no":
        return count == 0
    if kind == "some":
        return count >= 1
    if kind == "lone":
        return not saw_two
    if kind == "one":
        return count == 1 and not saw_two
    raise IllTypedError(f"bad counting kind {kind!r}")


def eval_formula(
    f: Formula, inst: Instance, env: Mapping[str, str] = _EMPTY
) -> bool:
    """Truth value of ``f`` on ``inst`` under ``env``."""
    if isinstance(f, TrueFormula):
        return True
    if isinstance(f, Conj):
        return all(eval_formula(p, inst, env) for p in f.parts)
    if isinstance(f, Not):
        return not eval_formula(f.body, inst, env)
    if isinstance(f, And):
        return eval_formula(f.left, inst, env) and eval_formula(f.right, inst, env)
    if isinstance(f, Or):
        return eval_formula(f.left, inst, env) or eval_formula(f.right, inst, env)
    if isinstance(f, Implies):
        return (not eval_formula(f.left, inst, env)) or eval_formula(
            f.right, inst, env
        )
    if isinstance(f, Iff):
        return eval_formula(f.left, inst, env) == eval_formula(f.right, inst, env)
    if isinstance(f, Compare):
        left = eval_expr(f.left, inst, env)
        right = eval_expr(f.right, inst, env)
        if f.op == "in":
            return left <= right
        if f.op == "!in":
            return not (left <= right)
        if f.op == "=":
            return left == right
        return left != right
    if isinstance(f, IntCompare):
        left = eval_int_expr(f.left, inst, env)
        right = eval_int_expr(f.right, inst, env)
        return left == right if f.op == "=" else left != right
    if isinstance(f, Mult):
        tuples = eval_expr(f.expr, inst, env)
        if f.kind == "all":
            arity = arity_of(f.expr)
            atoms = inst.universe.all_atoms()
            return all(
                t in tuples for t in itertools.product(atoms, repeat=arity)
            )
        n = len(tuples)
        return _count_satisfies(f.kind, n, n >= 2)
    if isinstance(f, Quant):
        domain = eval_expr(f.domain, inst, env)
        atoms = [t[0] for t in domain]
        assignments = itertools.product(atoms, repeat=len(f.vars))
        if f.kind == "all":
            return all(
                eval_formula(f.body, inst, {**env, **dict(zip(f.vars, combo))})
                for combo in assignments
            )
        if f.kind == "some":
            return any(
                eval_formula(f.body, inst, {**env, **dict(zip(f.vars, combo))})
                for combo in assignments
            )
        count = 0
        for combo in assignments:
            if eval_formula(f.body, inst, {**env, **dict(zip(f.vars, combo))}):
                count += 1
                if count >= 2:
                    break
        return _count_satisfies(f.kind, count, count >= 2)
    raise IllTypedError(f"not a formula: {f!r}")
