"""Parse predicate-body text to formulas, render formulas back, normalize.

The accepted surface syntax is the Alloy fragment the corpus lives in:
quantifiers and multiplicity keywords (``all some no lone one``), set
comparisons (``in``/``not in``/``=``/``!=``), cardinality (``#``) compared
with ``=``/``!=``, boolean connectives in both keyword and ASCII spellings
(``and``/``&&``, ``or``/``||``, ``implies``/``=>``, ``iff``/``<=>``,
``not``/``!``), and relational operators ``. -> & + - ^ * ~`` plus the
constants ``iden``, ``none``, ``univ``.

Operator binding, tightest first: unary ``^ * ~``; ``.``; ``->``; ``&``;
``+ -``; ``#``; comparisons; ``!``; ``&&``; ``||``; ``=>`` (right
associative); ``<=>``.

A predicate body is a sequence of juxtaposed constraints (newlines are
plain whitespace); two or more become a conjunction node. The empty body
is the true formula. A bare expression where a formula is expected is an
error unless introduced by a multiplicity keyword. Quantified variables
shadow sig and field names, inner binders shadow outer ones.

``render`` emits canonical text (keyword connectives, minimal parentheses)
that reparses to a structurally equal formula. ``normalize`` additionally
alpha-renames bound variables to ``v0, v1, ...`` and sorts the operands of
commutative operators, giving a stable key for syntactic deduplication.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

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
from .schema import Schema


class ParseError(Exception):
    """Syntax, name-resolution, or arity failure, with source position."""

    def __init__(self, message: str, line: int = 1, col: int = 1, snippet: str = ""):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col
        self.snippet = snippet


@dataclass(frozen=True)
class _Token:
    kind: str
    value: str
    line: int
    col: int


_KEYWORDS = frozenset(
    [
        "all", "some", "no", "lone", "one",
        "not", "in", "and", "or", "implies", "iff",
        "iden", "none", "univ",
    ]
)
_QUANT_WORDS = ("all", "some", "no", "lone", "one")
# Longest first so e.g. "<=>" is not read as "<" "=" ">".
_MULTI_OPS = ("<=>", "=>", "||", "&&", "!=", "->")
_SINGLE_OPS = "(){}|:,.&+-^*~#=!"
_IDENT_RE = re.compile(r"[A-Za-z_]\w*")
_INT_RE = re.compile(r"\d+")

_FENCE_RE = re.compile(r"^\s*```.*$", re.MULTILINE)
_PRED_RE = re.compile(r"^\s*pred\s+[A-Za-z_]\w*\s*\{(.*)\}\s*$", re.DOTALL)


def _preprocess(text: str) -> str:
    """Normalize line endings, drop markdown fences and a pred wrapper."""
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    text = _FENCE_RE.sub("", text)
    m = _PRED_RE.match(text)
    if m:
        text = m.group(1)
    return text


def _tokenize(text: str) -> list[_Token]:
    toks: list[_Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t":
            i += 1
            col += 1
            continue
        if text.startswith("--", i) or text.startswith("//", i):
            j = text.find("\n", i)
            i = n if j < 0 else j
            continue
        if text.startswith("!in", i) and not (
            i + 3 < n and (text[i + 3].isalnum() or text[i + 3] == "_")
        ):
            # "!in" only when not a prefix of an identifier like "!inner"
            toks.append(_Token("!in", "!in", line, col))
            i += 3
            col += 3
            continue
        for op in _MULTI_OPS:
            if text.startswith(op, i):
                toks.append(_Token(op, op, line, col))
                i += len(op)
                col += len(op)
                break
        else:
            if c in _SINGLE_OPS:
                toks.append(_Token(c, c, line, col))
                i += 1
                col += 1
                continue
            m = _INT_RE.match(text, i)
            if m:
                toks.append(_Token("INT", m.group(), line, col))
                col += len(m.group())
                i = m.end()
                continue
            m = _IDENT_RE.match(text, i)
            if m:
                word = m.group()
                kind = word if word in _KEYWORDS else "IDENT"
                toks.append(_Token(kind, word, line, col))
                col += len(word)
                i = m.end()
                continue
            raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(_Token("EOF", "", line, col))
    return toks


class _Parser:
    def __init__(self, tokens: list[_Token], schema: Schema, source: str):
        self.toks = tokens
        self.pos = 0
        self.schema = schema
        self.lines = source.split("\n")
        self.vars: list[str] = []  # innermost binder last

    # ---------------------------------------------------------- plumbing

    def peek(self, ahead: int = 0) -> _Token:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def advance(self) -> _Token:
        tok = self.toks[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            self.fail(f"expected {kind!r}, found {tok.value!r}" if tok.kind != "EOF"
                      else f"expected {kind!r}, found end of input", tok)
        return self.advance()

    def fail(self, message: str, tok: Optional[_Token] = None) -> None:
        tok = tok or self.peek()
        snippet = self.lines[tok.line - 1] if 0 < tok.line <= len(self.lines) else ""
        raise ParseError(message, tok.line, tok.col, snippet)

    def _check_arity(self, expr: Expr, at: _Token, want: Optional[int] = None) -> int:
        env = {v: 1 for v in self.vars}
        try:
            a = arity_of(expr, self.schema, env)
        except IllTypedError as e:
            self.fail(str(e), at)
        if want is not None and a != want:
            self.fail(f"expected an expression of arity {want}, got arity {a}", at)
        return a

    # ---------------------------------------------------------- formulas

    def parse_body(self) -> Formula:
        parts = []
        while self.peek().kind != "EOF":
            parts.append(self.parse_formula())
        if not parts:
            return TrueFormula()
        if len(parts) == 1:
            return parts[0]
        return Conj(tuple(parts))

    def parse_formula(self) -> Formula:
        return self._parse_iff()

    def _parse_iff(self) -> Formula:
        left = self._parse_implies()
        while self.peek().kind in ("iff", "<=>"):
            self.advance()
            left = Iff(left, self._parse_implies())
        return left

    def _parse_implies(self) -> Formula:
        left = self._parse_or()
        if self.peek().kind in ("implies", "=>"):
            self.advance()
            return Implies(left, self._parse_implies())
        return left

    def _parse_or(self) -> Formula:
        left = self._parse_and()
        while self.peek().kind in ("or", "||"):
            self.advance()
            left = Or(left, self._parse_and())
        return left

    def _parse_and(self) -> Formula:
        left = self._parse_negation()
        while self.peek().kind in ("and", "&&"):
            self.advance()
            left = And(left, self._parse_negation())
        return left

    def _parse_negation(self) -> Formula:
        if self.peek().kind in ("not", "!"):
            # "not in" after an expression never reaches here: the word is
            # consumed inside _parse_comparison.
            self.advance()
            return Not(self._parse_negation())
        return self._parse_primary_formula()

    def _quantifier_ahead(self) -> bool:
        i = self.pos + 1
        if self.toks[i].kind != "IDENT":
            return False
        i += 1
        while self.toks[i].kind == ",":
            if self.toks[i + 1].kind != "IDENT":
                return False
            i += 2
        return self.toks[i].kind == ":"

    def _parse_primary_formula(self) -> Formula:
        tok = self.peek()
        if tok.kind in _QUANT_WORDS:
            if self._quantifier_ahead():
                return self._parse_quantified()
            self.advance()
            at = self.peek()
            expr = self.parse_expr()
            self._check_arity(expr, at)
            return Mult(tok.kind, expr)
        # Either a comparison or a parenthesized formula; try the comparison
        # first and fall back, since both can start with "(".
        mark = self.pos
        try:
            return self._parse_comparison()
        except ParseError as cmp_err:
            self.pos = mark
            if tok.kind == "(":
                self.advance()
                f = self.parse_formula()
                self.expect(")")
                return f
            raise cmp_err

    def _parse_quantified(self) -> Formula:
        kw = self.advance()
        names = [self.expect("IDENT").value]
        while self.peek().kind == ",":
            self.advance()
            names.append(self.expect("IDENT").value)
        if len(set(names)) != len(names):
            self.fail(f"duplicate variable in quantifier", kw)
        self.expect(":")
        at = self.peek()
        domain = self.parse_expr()
        self._check_arity(domain, at, want=1)
        self.expect("|")
        self.vars.extend(names)
        try:
            body = self.parse_formula()
        finally:
            del self.vars[len(self.vars) - len(names):]
        return Quant(kw.kind, tuple(names), domain, body)

    def _parse_comparison(self) -> Formula:
        start = self.peek()
        left = self._parse_comparand()
        op_tok = self.peek()
        if op_tok.kind == "in":
            op = "in"
            self.advance()
        elif op_tok.kind == "!in":
            op = "!in"
            self.advance()
        elif op_tok.kind == "not" and self.peek(1).kind == "in":
            op = "!in"
            self.advance()
            self.advance()
        elif op_tok.kind in ("=", "!="):
            op = op_tok.kind
            self.advance()
        else:
            self.fail("expected a comparison operator", op_tok)
        right_at = self.peek()
        right = self._parse_comparand()
        left_int = isinstance(left, IntExpr)
        right_int = isinstance(right, IntExpr)
        if left_int != right_int:
            self.fail("cannot compare an integer with a set", op_tok)
        if left_int:
            if op not in ("=", "!="):
                self.fail(f"operator {op!r} is not defined on integers", op_tok)
            return IntCompare(left, op, right)
        la = self._check_arity(left, start)
        ra = self._check_arity(right, right_at)
        if la != ra:
            self.fail(f"comparison between arities {la} and {ra}", op_tok)
        return Compare(left, op, right)

    def _parse_comparand(self):
        tok = self.peek()
        if tok.kind == "#":
            self.advance()
            at = self.peek()
            expr = self.parse_expr()
            self._check_arity(expr, at)
            return Card(expr)
        if tok.kind == "INT":
            self.advance()
            return IntLiteral(int(tok.value))
        return self.parse_expr()

    # -------------------------------------------------------- expressions

    def parse_expr(self) -> Expr:
        left = self._parse_intersect()
        while self.peek().kind in ("+", "-"):
            op = self.advance().kind
            right = self._parse_intersect()
            left = Union(left, right) if op == "+" else Minus(left, right)
        return left

    def _parse_intersect(self) -> Expr:
        left = self._parse_product()
        while self.peek().kind == "&":
            self.advance()
            left = Intersect(left, self._parse_product())
        return left

    def _parse_product(self) -> Expr:
        left = self._parse_join()
        while self.peek().kind == "->":
            self.advance()
            left = Product(left, self._parse_join())
        return left

    def _parse_join(self) -> Expr:
        left = self._parse_unary_expr()
        while self.peek().kind == ".":
            self.advance()
            left = Join(left, self._parse_unary_expr())
        return left

    def _parse_unary_expr(self) -> Expr:
        tok = self.peek()
        if tok.kind in ("^", "*", "~"):
            self.advance()
            inner = self._parse_unary_expr()
            if tok.kind == "^":
                return Closure(inner)
            if tok.kind == "*":
                return ReflClosure(inner)
            return Transpose(inner)
        return self._parse_atom_expr()

    def _parse_atom_expr(self) -> Expr:
        tok = self.peek()
        if tok.kind == "(":
            self.advance()
            expr = self.parse_expr()
            self.expect(")")
            return expr
        if tok.kind == "iden":
            self.advance()
            return Iden()
        if tok.kind == "none":
            self.advance()
            return NoneSet()
        if tok.kind == "univ":
            self.advance()
            return Univ()
        if tok.kind == "IDENT":
            self.advance()
            name = tok.value
            if name in self.vars:
                return VarRef(name)
            if self.schema.has_sig(name):
                return SigRef(name)
            if self.schema.has_field(name):
                return FieldRef(name)
            self.fail(f"unknown name {name!r}", tok)
        if tok.kind == "EOF":
            self.fail("unexpected end of input", tok)
        self.fail(f"unexpected token {tok.value!r}", tok)
        raise AssertionError("unreachable")


def parse_formula_body(text: str, schema: Schema) -> Formula:
    """Parse the body of a predicate over ``schema`` into a Formula.

    Accepts raw bodies, ``pred Name { ... }`` wrappers, markdown-fenced
    blocks, and ``--``/``//`` comments. Raises ParseError (with line,
    column, and source snippet) on syntax, unknown-name, or arity errors.
    """
    cleaned = _preprocess(text)
    parser = _Parser(_tokenize(cleaned), schema, cleaned)
    body = parser.parse_body()
    return body


# -------------------------------------------------------------------- render

_P_IFF, _P_IMPLIES, _P_OR, _P_AND, _P_NOT, _P_FATOM = 1, 2, 3, 4, 5, 6
_E_UNION, _E_INTERSECT, _E_PRODUCT, _E_JOIN, _E_UNARY, _E_ATOM = 1, 2, 3, 4, 5, 6

_OP_WORDS = {"in": "in", "!in": "not in", "=": "=", "!=": "!="}


def _expr_prec(e: Expr) -> int:
    if isinstance(e, (Union, Minus)):
        return _E_UNION
    if isinstance(e, Intersect):
        return _E_INTERSECT
    if isinstance(e, Product):
        return _E_PRODUCT
    if isinstance(e, Join):
        return _E_JOIN
    if isinstance(e, (Closure, ReflClosure, Transpose)):
        return _E_UNARY
    return _E_ATOM


def _render_expr(e: Expr, parent: int = 0, right_side: bool = False) -> str:
    prec = _expr_prec(e)
    if isinstance(e, (SigRef, FieldRef, VarRef)):
        text = e.name
    elif isinstance(e, Iden):
        text = "iden"
    elif isinstance(e, NoneSet):
        text = "none"
    elif isinstance(e, Univ):
        text = "univ"
    elif isinstance(e, (Union, Minus)):
        op = " + " if isinstance(e, Union) else " - "
        text = (
            _render_expr(e.left, prec) + op + _render_expr(e.right, prec, True)
        )
    elif isinstance(e, Intersect):
        text = _render_expr(e.left, prec) + " & " + _render_expr(e.right, prec, True)
    elif isinstance(e, Product):
        text = _render_expr(e.left, prec) + "->" + _render_expr(e.right, prec, True)
    elif isinstance(e, Join):
        text = _render_expr(e.left, prec) + "." + _render_expr(e.right, prec, True)
    elif isinstance(e, Closure):
        text = "^" + _render_expr(e.expr, prec)
    elif isinstance(e, ReflClosure):
        text = "*" + _render_expr(e.expr, prec)
    elif isinstance(e, Transpose):
        text = "~" + _render_expr(e.expr, prec)
    else:
        raise ValueError(f"cannot render {e!r}")
    # Binary expression operators are left associative, so an equal-
    # precedence child needs parentheses only on the right.
    if prec < parent or (prec == parent and right_side):
        return f"({text})"
    return text


def _render_int(ie: IntExpr) -> str:
    if isinstance(ie, IntLiteral):
        return str(ie.value)
    if isinstance(ie, Card):
        inner = _render_expr(ie.expr)
        if _expr_prec(ie.expr) >= _E_JOIN:
            return f"#{inner}"
        return f"#({inner})"
    raise ValueError(f"cannot render {ie!r}")


def _formula_prec(f: Formula) -> int:
    if isinstance(f, Iff):
        return _P_IFF
    if isinstance(f, Implies):
        return _P_IMPLIES
    if isinstance(f, Or):
        return _P_OR
    if isinstance(f, (And, Conj)):
        return _P_AND
    if isinstance(f, Not):
        return _P_NOT
    if isinstance(f, Quant):
        # The body extends as far right as possible, so a quantifier is
        # parenthesized whenever it sits under a connective.
        return 0
    return _P_FATOM


def _render_formula(f: Formula, parent: int = 0, right_side: bool = False) -> str:
    prec = _formula_prec(f)
    if isinstance(f, TrueFormula):
        raise ValueError("the empty body renders only at top level")
    if isinstance(f, Quant):
        vars_text = ", ".join(f.vars)
        text = f"{f.kind} {vars_text}: {_render_expr(f.domain)} | " + _render_formula(
            f.body
        )
    elif isinstance(f, Mult):
        text = f"{f.kind} {_render_expr(f.expr)}"
    elif isinstance(f, Compare):
        text = (
            f"{_render_expr(f.left)} {_OP_WORDS[f.op]} {_render_expr(f.right)}"
        )
    elif isinstance(f, IntCompare):
        text = f"{_render_int(f.left)} {f.op} {_render_int(f.right)}"
    elif isinstance(f, Not):
        text = "not " + _render_formula(f.body, prec)
    elif isinstance(f, And):
        text = _render_formula(f.left, prec) + " and " + _render_formula(f.right, prec, True)
    elif isinstance(f, Or):
        text = _render_formula(f.left, prec) + " or " + _render_formula(f.right, prec, True)
    elif isinstance(f, Implies):
        # Right associative: parenthesize an implication on the left.
        text = (
            _render_formula(f.left, prec, True)
            + " implies "
            + _render_formula(f.right, prec)
        )
    elif isinstance(f, Iff):
        text = _render_formula(f.left, prec) + " iff " + _render_formula(f.right, prec, True)
    elif isinstance(f, Conj):
        text = " and ".join(_render_formula(p, _P_AND) for p in f.parts)
    else:
        raise ValueError(f"cannot render {f!r}")
    if isinstance(f, (Quant, Conj)):
        return f"({text})" if parent > 0 else text
    if isinstance(f, Not):
        return f"({text})" if parent > prec else text
    if prec < parent or (prec == parent and right_side):
        return f"({text})"
    return text


def render(f: Formula) -> str:
    """Canonical text for a formula; reparsing gives a structurally equal AST.

    Multi-part bodies render one constraint per line; the true formula
    renders as the empty string.
    """
    if isinstance(f, TrueFormula):
        return ""
    if isinstance(f, Conj):
        return "\n".join(_render_formula(p) for p in f.parts)
    return _render_formula(f)


# ----------------------------------------------------------------- normalize


def _conj_members(f: Formula) -> list[Formula]:
    if isinstance(f, Conj):
        return [m for p in f.parts for m in _conj_members(p)]
    if isinstance(f, And):
        return _conj_members(f.left) + _conj_members(f.right)
    return [f]


def _chain(members, node_type):
    out = members[0]
    for m in members[1:]:
        out = node_type(out, m)
    return out


def _sorted_structure(f, env: dict, depth: int):
    """Return (node, key) with commutative operands sorted bottom-up.

    Keys are s-expressions in which bound variables appear by binder depth,
    so the order is stable under alpha-renaming and the whole pass is
    idempotent.
    """
    if isinstance(f, (SigRef, FieldRef)):
        return f, f.name
    if isinstance(f, VarRef):
        return f, env.get(f.name, f.name)
    if isinstance(f, Iden):
        return f, "iden"
    if isinstance(f, NoneSet):
        return f, "none"
    if isinstance(f, Univ):
        return f, "univ"
    if isinstance(f, (Union, Intersect)):
        op = "+" if isinstance(f, Union) else "&"
        node_type = type(f)

        def flatten(e):
            if isinstance(e, node_type):
                return flatten(e.left) + flatten(e.right)
            return [e]

        pairs = sorted(
            (_sorted_structure(m, env, depth) for m in flatten(f)),
            key=lambda nk: nk[1],
        )
        node = _chain([n for n, _ in pairs], node_type)
        return node, f"({op} {' '.join(k for _, k in pairs)})"
    if isinstance(f, Minus):
        l, kl = _sorted_structure(f.left, env, depth)
        r, kr = _sorted_structure(f.right, env, depth)
        return Minus(l, r), f"(- {kl} {kr})"
    if isinstance(f, (Join, Product)):
        op = "." if isinstance(f, Join) else "->"
        l, kl = _sorted_structure(f.left, env, depth)
        r, kr = _sorted_structure(f.right, env, depth)
        return type(f)(l, r), f"({op} {kl} {kr})"
    if isinstance(f, (Closure, ReflClosure, Transpose)):
        op = {Closure: "^", ReflClosure: "*", Transpose: "~"}[type(f)]
        e, k = _sorted_structure(f.expr, env, depth)
        return type(f)(e), f"({op} {k})"
    if isinstance(f, IntLiteral):
        return f, str(f.value)
    if isinstance(f, Card):
        e, k = _sorted_structure(f.expr, env, depth)
        return Card(e), f"(# {k})"
    if isinstance(f, TrueFormula):
        return f, "(true)"
    if isinstance(f, Quant):
        new_env = dict(env)
        for i, name in enumerate(f.vars):
            new_env[name] = f"?{depth + i}"
        d, kd = _sorted_structure(f.domain, env, depth)
        b, kb = _sorted_structure(f.body, new_env, depth + len(f.vars))
        node = Quant(f.kind, f.vars, d, b)
        return node, f"({f.kind} {len(f.vars)} {kd} {kb})"
    if isinstance(f, Mult):
        e, k = _sorted_structure(f.expr, env, depth)
        return Mult(f.kind, e), f"(mult-{f.kind} {k})"
    if isinstance(f, Compare):
        l, kl = _sorted_structure(f.left, env, depth)
        r, kr = _sorted_structure(f.right, env, depth)
        if f.op in ("=", "!=") and kr < kl:
            l, r, kl, kr = r, l, kr, kl
        return Compare(l, f.op, r), f"({f.op} {kl} {kr})"
    if isinstance(f, IntCompare):
        l, kl = _sorted_structure(f.left, env, depth)
        r, kr = _sorted_structure(f.right, env, depth)
        if kr < kl:
            l, r, kl, kr = r, l, kr, kl
        return IntCompare(l, f.op, r), f"(int{f.op} {kl} {kr})"
    if isinstance(f, Not):
        b, k = _sorted_structure(f.body, env, depth)
        return Not(b), f"(not {k})"
    if isinstance(f, (And, Or)):
        op = "and" if isinstance(f, And) else "or"
        node_type = type(f)

        def flatten_f(x):
            if isinstance(x, node_type):
                return flatten_f(x.left) + flatten_f(x.right)
            return [x]

        pairs = sorted(
            (_sorted_structure(m, env, depth) for m in flatten_f(f)),
            key=lambda nk: nk[1],
        )
        node = _chain([n for n, _ in pairs], node_type)
        return node, f"({op} {' '.join(k for _, k in pairs)})"
    if isinstance(f, Implies):
        l, kl = _sorted_structure(f.left, env, depth)
        r, kr = _sorted_structure(f.right, env, depth)
        return Implies(l, r), f"(implies {kl} {kr})"
    if isinstance(f, Iff):
        l, kl = _sorted_structure(f.left, env, depth)
        r, kr = _sorted_structure(f.right, env, depth)
        if kr < kl:
            l, r, kl, kr = r, l, kr, kl
        return Iff(l, r), f"(iff {kl} {kr})"
    if isinstance(f, Conj):
        pairs = sorted(
            (_sorted_structure(m, env, depth) for m in _conj_members(f)),
            key=lambda nk: nk[1],
        )
        return Conj(tuple(n for n, _ in pairs)), (
            "(conj " + " ".join(k for _, k in pairs) + ")"
        )
    raise ValueError(f"cannot normalize {f!r}")


def _rename_sequential(f, env: dict, counter: list):
    if isinstance(f, VarRef):
        return VarRef(env.get(f.name, f.name))
    if isinstance(f, (SigRef, FieldRef, Iden, NoneSet, Univ, IntLiteral, TrueFormula)):
        return f
    if isinstance(f, Quant):
        domain = _rename_sequential(f.domain, env, counter)
        new_env = dict(env)
        new_names = []
        for name in f.vars:
            fresh = f"v{counter[0]}"
            counter[0] += 1
            new_env[name] = fresh
            new_names.append(fresh)
        body = _rename_sequential(f.body, new_env, counter)
        return Quant(f.kind, tuple(new_names), domain, body)
    if isinstance(f, (Join, Product, Union, Intersect, Minus)):
        return type(f)(
            _rename_sequential(f.left, env, counter),
            _rename_sequential(f.right, env, counter),
        )
    if isinstance(f, (Closure, ReflClosure, Transpose)):
        return type(f)(_rename_sequential(f.expr, env, counter))
    if isinstance(f, Card):
        return Card(_rename_sequential(f.expr, env, counter))
    if isinstance(f, Mult):
        return Mult(f.kind, _rename_sequential(f.expr, env, counter))
    if isinstance(f, Compare):
        return Compare(
            _rename_sequential(f.left, env, counter),
            f.op,
            _rename_sequential(f.right, env, counter),
        )
    if isinstance(f, IntCompare):
        return IntCompare(
            _rename_sequential(f.left, env, counter),
            f.op,
            _rename_sequential(f.right, env, counter),
        )
    if isinstance(f, Not):
        return Not(_rename_sequential(f.body, env, counter))
    if isinstance(f, (And, Or, Implies, Iff)):
        return type(f)(
            _rename_sequential(f.left, env, counter),
            _rename_sequential(f.right, env, counter),
        )
    if isinstance(f, Conj):
        return Conj(tuple(_rename_sequential(p, env, counter) for p in f.parts))
    raise ValueError(f"cannot rename {f!r}")


def normalize(f: Formula) -> Formula:
    """Canonical form: sorted commutative operands, variables v0, v1, ...

    Idempotent and evaluation-preserving. Conjunction chains at the top
    level (both multi-line bodies and explicit ``and``) flatten into one
    sorted conjunction, so the same constraints written in a different
    order or spelling normalize identically.
    """
    if isinstance(f, TrueFormula):
        return f
    sorted_f, _key = _sorted_structure(f, {}, 0)
    if isinstance(sorted_f, (And, Conj)):
        members = _conj_members(sorted_f)
        if len(members) > 1:
            sorted_f = Conj(tuple(members))
        else:
            sorted_f = members[0]
    return _rename_sequential(sorted_f, {}, [0])
