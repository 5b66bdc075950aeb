"""Propositional formulas: conjunction and implication only.

Grammar (ASCII):

    formula     := conjunction ( '->' formula )?        # right-associative
    conjunction := operand ( '&' operand )*              # left-assoc, binds tighter
    operand     := ATOM | '(' formula ')'
    ATOM        := [a-z][a-z0-9_]*

Conjunctions are kept flattened: ``(a & b) & c`` and ``a & (b & c)``
normalize to the same 3-ary conjunction, so chain notation compares equal
regardless of grouping.  Conjunction is treated as associative, not
commutative: ``a & b`` and ``b & a`` are different formulas.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Sequence, Union

import numpy as np

__all__ = [
    "Atom",
    "Conjunction",
    "Implication",
    "Formula",
    "FormulaSyntaxError",
    "conjunction",
    "parse_formula",
    "format_formula",
    "normalize",
    "normalize_equal",
    "atoms",
    "truth_table",
    "entails",
]


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Conjunction:
    parts: tuple["Formula", ...]


@dataclass(frozen=True)
class Implication:
    antecedent: "Formula"
    consequent: "Formula"


Formula = Union[Atom, Conjunction, Implication]


class FormulaSyntaxError(ValueError):
    """Bad formula text; ``column`` is the 1-based failing position."""

    def __init__(self, message: str, column: int):
        super().__init__(f"{message} (column {column})")
        self.column = column


def conjunction(parts: Sequence[Formula]) -> Formula:
    """Build a flattened conjunction; a single part is returned as-is."""
    flat: list[Formula] = []
    for part in parts:
        if isinstance(part, Conjunction):
            flat.extend(part.parts)
        else:
            flat.append(part)
    if not flat:
        raise ValueError("conjunction needs at least one part")
    if len(flat) == 1:
        return flat[0]
    return Conjunction(tuple(flat))


def normalize(f: Formula) -> Formula:
    """Recursively flatten all conjunctions."""
    if isinstance(f, Atom):
        return f
    if isinstance(f, Conjunction):
        return conjunction([normalize(p) for p in f.parts])
    return Implication(normalize(f.antecedent), normalize(f.consequent))


def normalize_equal(f: Formula, g: Formula) -> bool:
    """Equality up to conjunction flattening (order-sensitive)."""
    return normalize(f) == normalize(g)


# -- parsing ----------------------------------------------------------------

_TOKEN = re.compile(r"[a-z][a-z0-9_]*|->|&|\(|\)|\s+")


@dataclass
class _Token:
    text: str
    column: int  # 1-based


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos + 1)
        if not m.group().isspace():
            tokens.append(_Token(m.group(), pos + 1))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> str | None:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos].text
        return None

    def here(self) -> int:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos].column
        return len(self.text) + 1

    def take(self) -> _Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def formula(self) -> Formula:
        left = self.conjunction()
        if self.peek() == "->":
            self.take()
            return Implication(left, self.formula())
        return left

    def conjunction(self) -> Formula:
        parts = [self.operand()]
        while self.peek() == "&":
            self.take()
            parts.append(self.operand())
        return conjunction(parts)

    def operand(self) -> Formula:
        tok = self.peek()
        if tok == "(":
            self.take()
            inner = self.formula()
            if self.peek() != ")":
                raise FormulaSyntaxError("expected ')'", self.here())
            self.take()
            return inner
        if tok is None or tok in ("->", "&", ")"):
            raise FormulaSyntaxError("expected an atom or '('", self.here())
        return Atom(self.take().text)


def parse_formula(text: str) -> Formula:
    """Parse ASCII formula text; raises :class:`FormulaSyntaxError`."""
    parser = _Parser(text)
    result = parser.formula()
    if parser.peek() is not None:
        raise FormulaSyntaxError(
            f"unexpected token {parser.peek()!r} after formula", parser.here()
        )
    return result


def format_formula(f: Formula) -> str:
    """Print a formula so that ``parse_formula`` round-trips it."""
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Conjunction):
        return " & ".join(_conjunct_text(p) for p in f.parts)
    antecedent = format_formula(f.antecedent)
    if isinstance(f.antecedent, Implication):
        antecedent = f"({antecedent})"
    return f"{antecedent} -> {format_formula(f.consequent)}"


def _conjunct_text(part: Formula) -> str:
    text = format_formula(part)
    if isinstance(part, (Implication, Conjunction)):
        return f"({text})"
    return text


# -- semantics ---------------------------------------------------------------


def atoms(formulas: Formula | Sequence[Formula]) -> list[str]:
    """Sorted atom names occurring in the formula(s)."""
    if isinstance(formulas, (Atom, Conjunction, Implication)):
        formulas = [formulas]
    names: set[str] = set()

    def walk(f: Formula) -> None:
        if isinstance(f, Atom):
            names.add(f.name)
        elif isinstance(f, Conjunction):
            for p in f.parts:
                walk(p)
        else:
            walk(f.antecedent)
            walk(f.consequent)

    for f in formulas:
        walk(f)
    return sorted(names)


def truth_table(f: Formula, atom_order: Sequence[str]) -> np.ndarray:
    """Truth value of ``f`` under all 2**n assignments of ``atom_order``.

    Row ``i`` assigns atom ``k`` the bit ``(i >> k) & 1``.
    """
    n = len(atom_order)
    rows = 1 << n
    index = {name: k for k, name in enumerate(atom_order)}
    assignment_ids = np.arange(rows, dtype=np.uint32)

    def evaluate(g: Formula) -> np.ndarray:
        if isinstance(g, Atom):
            return (assignment_ids >> np.uint32(index[g.name])) & np.uint32(1) == 1
        if isinstance(g, Conjunction):
            value = evaluate(g.parts[0])
            for p in g.parts[1:]:
                value = value & evaluate(p)
            return value
        return ~evaluate(g.antecedent) | evaluate(g.consequent)

    return evaluate(f)


def entails(assumptions: Sequence[Formula], conclusion: Formula) -> bool:
    """Brute-force semantic entailment over the atoms of all formulas."""
    atom_order = atoms(list(assumptions) + [conclusion])
    if len(atom_order) > 26:
        raise ValueError("entailment check limited to 26 atoms")
    rows = np.ones(1 << len(atom_order), dtype=bool)
    for f in assumptions:
        rows &= truth_table(f, atom_order)
    return bool(np.all(~rows | truth_table(conclusion, atom_order)))
