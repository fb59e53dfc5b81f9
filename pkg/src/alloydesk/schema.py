"""Signatures, bounded universes, and concrete instances.

Everything downstream is finite and enumerable by construction: a scope of
N means every signature independently holds 0..N atoms, and a field ranges
over all valuations of source-atom/target-atom pairs allowed by its
multiplicity. Atoms are named ``<SigName><index>`` with 0-based indices
(``S0``, ``S1``, ...). Enumeration order is deterministic everywhere so
that "first counterexample" is a stable notion.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterator


class SchemaError(ValueError):
    """A declaration-level problem: duplicate names, unknown targets, bad text."""


class Multiplicity(str, Enum):
    SET = "set"    # any set of targets per source atom
    ONE = "one"    # exactly one target per source atom
    LONE = "lone"  # at most one target per source atom


@dataclass(frozen=True)
class FieldDecl:
    """A binary field declared inside a sig; the source sig is the owner."""

    name: str
    target: str
    multiplicity: Multiplicity = Multiplicity.SET


@dataclass(frozen=True)
class SigDecl:
    name: str
    fields: tuple[FieldDecl, ...] = ()


@dataclass(frozen=True)
class Schema:
    """An ordered collection of sig declarations. Order fixes enumeration order."""

    sigs: tuple[SigDecl, ...]

    def __post_init__(self) -> None:
        names: set[str] = set()
        for sig in self.sigs:
            if sig.name in names:
                raise SchemaError(f"duplicate sig name {sig.name!r}")
            names.add(sig.name)
        fields: set[str] = set()
        for owner, fld in self.fields():
            if fld.name in fields or fld.name in names:
                raise SchemaError(f"duplicate declaration name {fld.name!r}")
            fields.add(fld.name)
            if fld.target not in names:
                raise SchemaError(
                    f"field {fld.name!r} targets undeclared sig {fld.target!r}"
                )

    def sig_names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.sigs)

    def has_sig(self, name: str) -> bool:
        return any(s.name == name for s in self.sigs)

    def fields(self) -> tuple[tuple[str, FieldDecl], ...]:
        """All (owner sig name, field) pairs in declaration order."""
        return tuple((s.name, f) for s in self.sigs for f in s.fields)

    def has_field(self, name: str) -> bool:
        return any(f.name == name for _, f in self.fields())

    def field(self, name: str) -> tuple[str, FieldDecl]:
        for owner, f in self.fields():
            if f.name == name:
                return owner, f
        raise SchemaError(f"no field named {name!r}")

    def alloy_text(self) -> str:
        """Render the declarations in Alloy surface syntax."""
        blocks = []
        for sig in self.sigs:
            if sig.fields:
                body = ",\n".join(
                    f"  {f.name}: {f.multiplicity.value} {f.target}" for f in sig.fields
                )
                blocks.append(f"sig {sig.name} {{\n{body}\n}}")
            else:
                blocks.append(f"sig {sig.name} {{}}")
        return "\n".join(blocks)


_SIG_DECL_RE = re.compile(r"sig\s+([A-Za-z_]\w*)\s*\{([^{}]*)\}")
_FIELD_DECL_RE = re.compile(
    r"^([A-Za-z_]\w*)\s*:\s*(?:(set|one|lone)\s+)?([A-Za-z_]\w*)$"
)


def parse_schema(text: str) -> Schema:
    """Parse one or more ``sig Name { field: set Target, ... }`` declarations.

    A field without a multiplicity keyword defaults to ``one``, as in Alloy.
    """
    stripped = _SIG_DECL_RE.sub("", text).strip()
    if stripped:
        raise SchemaError(f"unrecognized schema text: {stripped.splitlines()[0]!r}")
    sigs = []
    for m in _SIG_DECL_RE.finditer(text):
        name, body = m.group(1), m.group(2).strip()
        fields = []
        if body:
            for part in body.split(","):
                part = " ".join(part.split())
                fm = _FIELD_DECL_RE.match(part)
                if not fm:
                    raise SchemaError(f"bad field declaration {part!r} in sig {name}")
                mult = Multiplicity(fm.group(2) or "one")
                fields.append(FieldDecl(fm.group(1), fm.group(3), mult))
        sigs.append(SigDecl(name, tuple(fields)))
    if not sigs:
        raise SchemaError("no sig declarations found")
    return Schema(tuple(sigs))


@lru_cache(maxsize=None)
def _sig_atoms(sig: str, count: int) -> tuple[str, ...]:
    return tuple(f"{sig}{i}" for i in range(count))


@dataclass(frozen=True)
class Universe:
    """How many atoms each sig holds, in schema order."""

    counts: tuple[tuple[str, int], ...]

    def count(self, sig: str) -> int:
        for name, n in self.counts:
            if name == sig:
                return n
        raise SchemaError(f"no sig named {sig!r} in universe")

    def atoms(self, sig: str) -> tuple[str, ...]:
        return _sig_atoms(sig, self.count(sig))

    def all_atoms(self) -> tuple[str, ...]:
        return tuple(
            atom for name, n in self.counts for atom in _sig_atoms(name, n)
        )

    def size(self) -> int:
        return sum(n for _, n in self.counts)


@dataclass(frozen=True)
class Instance:
    """A universe plus one concrete relation per declared field."""

    universe: Universe
    relations: tuple[tuple[str, frozenset], ...]

    def relation(self, name: str) -> frozenset:
        for fname, rel in self.relations:
            if fname == name:
                return rel
        raise SchemaError(f"no field named {name!r} in instance")

    def describe(self) -> str:
        """Human-readable atom/tuple listing, one line per sig and field."""
        lines = []
        for sig, _n in self.universe.counts:
            atoms = ", ".join(self.universe.atoms(sig))
            lines.append(f"{sig} = {{{atoms}}}")
        for fname, rel in self.relations:
            pairs = ", ".join("->".join(t) for t in sorted(rel))
            lines.append(f"{fname} = {{{pairs}}}")
        return "\n".join(lines)


def enumerate_universes(schema: Schema, max_scope: int) -> list[Universe]:
    """All universes with 0..max_scope atoms per sig, lexicographic by count.

    The empty universe comes first; with one sig, scope 3 yields 4 universes.
    """
    if max_scope < 0:
        raise SchemaError("max_scope must be nonnegative")
    names = schema.sig_names()
    out = []
    for combo in itertools.product(range(max_scope + 1), repeat=len(names)):
        out.append(Universe(tuple(zip(names, combo))))
    return out


def _subsets_lex(pairs: list[tuple]) -> Iterator[frozenset]:
    """Every subset of ``pairs``, lexicographic by the sorted tuple list."""
    n = len(pairs)
    acc: list[tuple] = []

    def rec(start: int) -> Iterator[frozenset]:
        yield frozenset(acc)
        for i in range(start, n):
            acc.append(pairs[i])
            yield from rec(i + 1)
            acc.pop()

    yield from rec(0)


def _field_valuations(
    universe: Universe, owner: str, field: FieldDecl
) -> list[frozenset]:
    src = universe.atoms(owner)
    tgt = universe.atoms(field.target)
    if field.multiplicity is Multiplicity.SET:
        pairs = [(a, b) for a in src for b in tgt]
        return list(_subsets_lex(pairs))
    if field.multiplicity is Multiplicity.ONE:
        choices = [[(a, b) for b in tgt] for a in src]
        return [frozenset(picked) for picked in itertools.product(*choices)]
    # LONE: per source atom, either no tuple or one target
    choices = [[None] + [(a, b) for b in tgt] for a in src]
    return [
        frozenset(p for p in picked if p is not None)
        for picked in itertools.product(*choices)
    ]


def enumerate_instances(schema: Schema, universe: Universe) -> Iterator[Instance]:
    """All instances over ``universe``, respecting field multiplicities.

    Fields vary in declaration order, the first field slowest; within one
    ``set`` field, subsets come in lexicographic order (empty relation
    first). A single binary set field over n atoms yields 2^(n*n) instances.
    """
    named = [(f.name, _field_valuations(universe, owner, f))
             for owner, f in schema.fields()]
    names = [n for n, _ in named]
    pools = [v for _, v in named]
    for combo in itertools.product(*pools):
        yield Instance(universe, tuple(zip(names, combo)))


def validate_instance(schema: Schema, inst: Instance) -> None:
    """Raise SchemaError unless every relation is in bounds and in multiplicity."""
    declared = dict(inst.universe.counts)
    if set(declared) != set(schema.sig_names()):
        raise SchemaError("universe sigs do not match schema")
    for owner, field in schema.fields():
        rel = inst.relation(field.name)
        src = set(inst.universe.atoms(owner))
        tgt = set(inst.universe.atoms(field.target))
        outdeg: dict[str, int] = {}
        for t in rel:
            if len(t) != 2 or t[0] not in src or t[1] not in tgt:
                raise SchemaError(f"tuple {t!r} out of bounds for field {field.name}")
            outdeg[t[0]] = outdeg.get(t[0], 0) + 1
        if field.multiplicity is Multiplicity.ONE:
            if any(outdeg.get(a, 0) != 1 for a in src):
                raise SchemaError(f"field {field.name} violates 'one'")
        elif field.multiplicity is Multiplicity.LONE:
            if any(n > 1 for n in outdeg.values()):
                raise SchemaError(f"field {field.name} violates 'lone'")
