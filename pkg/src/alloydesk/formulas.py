"""AST node types for the relational formula fragment, plus arity rules.

Formulas are built from quantifiers, multiplicity tests, set comparisons,
cardinality comparisons, and the boolean connectives. Expressions denote
sets of atom tuples. All nodes are immutable and hashable, so formulas can
be dict keys and structural equality is plain ``==``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

from .schema import Schema


class IllTypedError(Exception):
    """An expression breaks the arity rules (or names an unknown declaration)."""


# ---------------------------------------------------------------- expressions


class Expr:
    pass


@dataclass(frozen=True)
class SigRef(Expr):
    name: str


@dataclass(frozen=True)
class FieldRef(Expr):
    name: str


@dataclass(frozen=True)
class VarRef(Expr):
    name: str


@dataclass(frozen=True)
class Iden(Expr):
    """Identity relation over the whole universe."""


@dataclass(frozen=True)
class NoneSet(Expr):
    """The empty unary set (``none``)."""


@dataclass(frozen=True)
class Univ(Expr):
    """Every atom of every sig (``univ``)."""


@dataclass(frozen=True)
class Join(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Product(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Union(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Intersect(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Minus(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Closure(Expr):
    """Irreflexive transitive closure (``^``); operand must be binary."""

    expr: Expr


@dataclass(frozen=True)
class ReflClosure(Expr):
    """Reflexive-transitive closure (``*``): closure plus iden."""

    expr: Expr


@dataclass(frozen=True)
class Transpose(Expr):
    expr: Expr


# ------------------------------------------------------- integer expressions


class IntExpr:
    pass


@dataclass(frozen=True)
class IntLiteral(IntExpr):
    value: int


@dataclass(frozen=True)
class Card(IntExpr):
    """Tuple count of a set expression (``#``). Exact, never wraps."""

    expr: Expr


# ------------------------------------------------------------------ formulas


class Formula:
    pass


QUANT_KINDS = ("all", "some", "no", "lone", "one")
MULT_KINDS = ("no", "some", "lone", "one", "all")
SET_COMPARE_OPS = ("in", "!in", "=", "!=")
INT_COMPARE_OPS = ("=", "!=")


@dataclass(frozen=True)
class Quant(Formula):
    """``kind v1, v2: domain | body``; every variable ranges over the domain."""

    kind: str
    vars: tuple[str, ...]
    domain: Expr
    body: Formula

    def __post_init__(self) -> None:
        if self.kind not in QUANT_KINDS:
            raise ValueError(f"bad quantifier kind {self.kind!r}")
        if not self.vars:
            raise ValueError("quantifier needs at least one variable")


@dataclass(frozen=True)
class Mult(Formula):
    """Multiplicity test applied to an expression, e.g. ``no ^link & iden``."""

    kind: str
    expr: Expr

    def __post_init__(self) -> None:
        if self.kind not in MULT_KINDS:
            raise ValueError(f"bad multiplicity kind {self.kind!r}")


@dataclass(frozen=True)
class Compare(Formula):
    left: Expr
    op: str
    right: Expr

    def __post_init__(self) -> None:
        if self.op not in SET_COMPARE_OPS:
            raise ValueError(f"bad comparison op {self.op!r}")


@dataclass(frozen=True)
class IntCompare(Formula):
    left: IntExpr
    op: str
    right: IntExpr

    def __post_init__(self) -> None:
        if self.op not in INT_COMPARE_OPS:
            raise ValueError(f"bad integer comparison op {self.op!r}")


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Conj(Formula):
    """A predicate body of several juxtaposed constraint lines."""

    parts: tuple[Formula, ...]


@dataclass(frozen=True)
class TrueFormula(Formula):
    """The empty predicate body."""


# --------------------------------------------------------------------- arity


def arity_of(
    expr: Expr,
    schema: Optional[Schema] = None,
    env: Optional[Mapping[str, int]] = None,
) -> int:
    """Arity of an expression; raises IllTypedError on rule violations.

    Atoms and variables have arity 1 and fields arity 2; products add
    arities; a join of arities a and b has a+b-2, which must stay >= 1;
    closure and transpose demand arity exactly 2; the set operators demand
    equal arities on both sides. With ``schema`` given, sig and field names
    are also checked against the declarations, and ``env`` gives the arity
    of bound variables (always 1 in this fragment).
    """
    if isinstance(expr, SigRef):
        if schema is not None and not schema.has_sig(expr.name):
            raise IllTypedError(f"unknown sig {expr.name!r}")
        return 1
    if isinstance(expr, FieldRef):
        if schema is not None and not schema.has_field(expr.name):
            raise IllTypedError(f"unknown field {expr.name!r}")
        return 2
    if isinstance(expr, VarRef):
        if env is not None and expr.name not in env:
            raise IllTypedError(f"unbound variable {expr.name!r}")
        return 1 if env is None else env[expr.name]
    if isinstance(expr, (NoneSet, Univ)):
        return 1
    if isinstance(expr, Iden):
        return 2
    if isinstance(expr, Join):
        a = arity_of(expr.left, schema, env)
        b = arity_of(expr.right, schema, env)
        if a + b - 2 < 1:
            raise IllTypedError("join of two unary expressions has arity 0")
        return a + b - 2
    if isinstance(expr, Product):
        return arity_of(expr.left, schema, env) + arity_of(expr.right, schema, env)
    if isinstance(expr, (Union, Intersect, Minus)):
        a = arity_of(expr.left, schema, env)
        b = arity_of(expr.right, schema, env)
        if a != b:
            raise IllTypedError(f"set operator on arities {a} and {b}")
        return a
    if isinstance(expr, (Closure, ReflClosure, Transpose)):
        a = arity_of(expr.expr, schema, env)
        if a != 2:
            raise IllTypedError(f"unary relational operator on arity {a}")
        return 2
    raise IllTypedError(f"not an expression: {expr!r}")
