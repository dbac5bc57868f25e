"""LTL formulas: syntax tree, parser, printer, negation normal form and a
lasso-word evaluator used as a semantic reference."""

from __future__ import annotations

import re
from functools import lru_cache
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import LtlSyntaxError, UnknownOperator

__all__ = [
    "Formula", "TrueConst", "FalseConst", "Atom", "Not", "And", "Or", "Implies",
    "Next", "Until", "Release", "Eventually", "Always", "TRUE", "FALSE",
    "LassoWord", "parse_ltl", "to_str", "to_nnf", "is_nnf", "atoms",
    "subformulas", "eval_lasso", "strip_comments",
]


@dataclass(frozen=True)
class Formula:
    def children(self) -> tuple[Formula, ...]:
        return ()

    def __str__(self) -> str:
        return to_str(self)


@dataclass(frozen=True)
class TrueConst(Formula):
    pass


@dataclass(frozen=True)
class FalseConst(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class _Unary(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class _Binary(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


class Not(_Unary):
    pass


class Next(_Unary):
    pass


class Eventually(_Unary):
    pass


class Always(_Unary):
    pass


class And(_Binary):
    pass


class Or(_Binary):
    pass


class Implies(_Binary):
    pass


class Until(_Binary):
    pass


class Release(_Binary):
    pass


TRUE = TrueConst()
FALSE = FalseConst()


def strip_comments(text: str) -> str:
    """Drop ``#`` line comments."""
    return "\n".join(line.split("#", 1)[0] for line in text.splitlines())


# ---------------------------------------------------------------- lexer

_WORD = re.compile(r"[A-Za-z0-9_@]+")
_KEYWORDS = {
    "true": "true", "false": "false",
    "F": "F", "G": "G", "X": "X", "U": "U", "R": "R",
}
_SYMBOLS = [
    ("&&", "&"), ("||", "|"), ("->", "->"), ("<>", "F"), ("[]", "G"),
    ("&", "&"), ("|", "|"), ("!", "!"), ("(", "("), (")", ")"),
]
_PUNCT = re.compile(r"[^\sA-Za-z0-9_@()]+")


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    pos: int  # character index


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        m = _WORD.match(text, i)
        if m:
            word = m.group()
            tokens.append(_Token(_KEYWORDS.get(word, "atom"), word, i))
            i = m.end()
            continue
        for sym, kind in _SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(_Token(kind, sym, i))
                i += len(sym)
                break
        else:
            m = _PUNCT.match(text, i)
            bad = m.group() if m else c
            raise UnknownOperator(
                f"unknown operator {bad!r}", _byte_offset(text, i))
    tokens.append(_Token("end", "", n))
    return tokens


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


# ---------------------------------------------------------------- parser

_UNARY = {"!": Not, "X": Next, "F": Eventually, "G": Always}
_PRIMARY_START = {"atom", "true", "false", "(", "!", "X", "F", "G"}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def error(self, expected) -> LtlSyntaxError:
        tok = self.tok
        what = "end of input" if tok.kind == "end" else f"token {tok.text!r}"
        return LtlSyntaxError(f"unexpected {what}",
                              _byte_offset(self.text, tok.pos), expected)

    def take(self, kind: str) -> _Token:
        if self.tok.kind != kind:
            raise self.error({kind})
        tok = self.tok
        self.i += 1
        return tok

    def parse(self) -> Formula:
        f = self.implies()
        if self.tok.kind != "end":
            raise self.error({"end of input", "&", "|", "->", "U", "R"})
        return f

    def implies(self) -> Formula:
        left = self.disjunction()
        if self.tok.kind == "->":
            self.i += 1
            return Implies(left, self.implies())
        return left

    def disjunction(self) -> Formula:
        left = self.conjunction()
        while self.tok.kind == "|":
            self.i += 1
            left = Or(left, self.conjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.binary_temporal()
        while self.tok.kind == "&":
            self.i += 1
            left = And(left, self.binary_temporal())
        return left

    def binary_temporal(self) -> Formula:
        left = self.unary()
        kind = self.tok.kind
        if kind in ("U", "R"):
            self.i += 1
            right = self.binary_temporal()
            return Until(left, right) if kind == "U" else Release(left, right)
        return left

    def unary(self) -> Formula:
        tok = self.tok
        if tok.kind in _UNARY:
            self.i += 1
            return _UNARY[tok.kind](self.unary())
        if tok.kind == "atom":
            self.i += 1
            return Atom(tok.text)
        if tok.kind == "true":
            self.i += 1
            return TRUE
        if tok.kind == "false":
            self.i += 1
            return FALSE
        if tok.kind == "(":
            self.i += 1
            f = self.implies()
            self.take(")")
            return f
        raise self.error(_PRIMARY_START)


def parse_ltl(text: str) -> Formula:
    """Parse formula text (``#`` comments allowed) into a syntax tree.

    Precedence from tightest: unary operators, ``U``/``R`` (right
    associative), ``&``, ``|``, ``->`` (right associative).
    """
    text = strip_comments(text)
    if not text.strip():
        raise LtlSyntaxError("empty formula", 0, {"atom"})
    return _Parser(text).parse()


# --------------------------------------------------------------- printer

_BIN_SYMBOL = {And: "&", Or: "|", Implies: "->", Until: "U", Release: "R"}
_UN_SYMBOL = {Not: "!", Next: "X ", Eventually: "F ", Always: "G "}


def to_str(f: Formula) -> str:
    """Render a formula in the surface syntax; reparses to the same tree."""
    if isinstance(f, TrueConst):
        return "true"
    if isinstance(f, FalseConst):
        return "false"
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, _Unary):
        inner = to_str(f.arg)
        if isinstance(f.arg, _Binary):
            inner = f"({inner})"
        return _UN_SYMBOL[type(f)] + inner
    parts = []
    for child in (f.left, f.right):
        s = to_str(child)
        parts.append(f"({s})" if isinstance(child, _Binary) else s)
    return f"{parts[0]} {_BIN_SYMBOL[type(f)]} {parts[1]}"


# ------------------------------------------------------------- utilities

def subformulas(f: Formula) -> Iterator[Formula]:
    """Post-order traversal (children before parents)."""
    for child in f.children():
        yield from subformulas(child)
    yield f


def atoms(f: Formula) -> frozenset[str]:
    return frozenset(g.name for g in subformulas(f) if isinstance(g, Atom))


def _neg(f: Formula) -> Formula:
    return to_nnf(Not(f))


def to_nnf(f: Formula) -> Formula:
    """Negation normal form over true/false/literals, &, |, X, U, R."""
    if isinstance(f, (TrueConst, FalseConst, Atom)):
        return f
    if isinstance(f, And):
        return And(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, Or):
        return Or(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, Implies):
        return Or(_neg(f.left), to_nnf(f.right))
    if isinstance(f, Next):
        return Next(to_nnf(f.arg))
    if isinstance(f, Until):
        return Until(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, Release):
        return Release(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, Eventually):
        return Until(TRUE, to_nnf(f.arg))
    if isinstance(f, Always):
        return Release(FALSE, to_nnf(f.arg))

    g = f.arg  # f is Not
    if isinstance(g, TrueConst):
        return FALSE
    if isinstance(g, FalseConst):
        return TRUE
    if isinstance(g, Atom):
        return f
    if isinstance(g, Not):
        return to_nnf(g.arg)
    if isinstance(g, And):
        return Or(_neg(g.left), _neg(g.right))
    if isinstance(g, Or):
        return And(_neg(g.left), _neg(g.right))
    if isinstance(g, Implies):
        return And(to_nnf(g.left), _neg(g.right))
    if isinstance(g, Next):
        return Next(_neg(g.arg))
    if isinstance(g, Until):
        return Release(_neg(g.left), _neg(g.right))
    if isinstance(g, Release):
        return Until(_neg(g.left), _neg(g.right))
    if isinstance(g, Eventually):
        return Release(FALSE, _neg(g.arg))
    if isinstance(g, Always):
        return Until(TRUE, _neg(g.arg))
    raise TypeError(f"not a formula: {f!r}")


def is_nnf(f: Formula) -> bool:
    for g in subformulas(f):
        if isinstance(g, (Eventually, Always, Implies)):
            return False
        if isinstance(g, Not) and not isinstance(g.arg, Atom):
            return False
    return True


# -------------------------------------------------------- lasso semantics

@dataclass(frozen=True)
class LassoWord:
    """The infinite word ``prefix . cycle^omega`` over sets of atom names."""

    prefix: tuple[frozenset[str], ...]
    cycle: tuple[frozenset[str], ...]

    def __post_init__(self):
        if not self.cycle:
            raise ValueError("cycle must be non-empty")
        object.__setattr__(self, "prefix", tuple(frozenset(p) for p in self.prefix))
        object.__setattr__(self, "cycle", tuple(frozenset(c) for c in self.cycle))

    @classmethod
    def of(cls, prefix: Iterable[Iterable[str]], cycle: Iterable[Iterable[str]]):
        return cls(tuple(frozenset(p) for p in prefix),
                   tuple(frozenset(c) for c in cycle))

    def __len__(self):
        return len(self.prefix) + len(self.cycle)

    def letter(self, i: int) -> frozenset[str]:
        """Letter at position ``i`` of the infinite word."""
        k = len(self.prefix)
        return self.prefix[i] if i < k else self.cycle[(i - k) % len(self.cycle)]

    def successor(self, i: int) -> int:
        """Next distinct position; positions wrap from the end of the cycle."""
        return i + 1 if i + 1 < len(self) else len(self.prefix)


def eval_lasso(f: Formula, word: LassoWord) -> bool:
    """Does ``word`` satisfy ``f`` at position 0?

    Truth values of each subformula over the finitely many distinct
    positions are kept as bitmasks; U is the least and R the greatest
    fixpoint of its one-step unfolding.
    """
    n = len(word)
    full = (1 << n) - 1
    succ = [word.successor(i) for i in range(n)]
    letters = [word.letter(i) for i in range(n)]

    def shift(x):  # bit i of result = bit succ(i) of x
        out = 0
        for i in range(n):
            if x >> succ[i] & 1:
                out |= 1 << i
        return out

    vals: list[int] = []
    for op, a, b in _program(f):
        if op == "atom":
            v = 0
            for i in range(n):
                if a in letters[i]:
                    v |= 1 << i
        elif op == "true":
            v = full
        elif op == "false":
            v = 0
        elif op == "not":
            v = full & ~vals[a]
        elif op == "and":
            v = vals[a] & vals[b]
        elif op == "or":
            v = vals[a] | vals[b]
        elif op == "implies":
            v = (full & ~vals[a]) | vals[b]
        elif op == "next":
            v = shift(vals[a])
        else:
            left = full if a is None else vals[a] if a >= 0 else 0
            right = vals[b]
            if op == "until":
                v = 0
                while True:
                    nv = right | (left & shift(v))
                    if nv == v:
                        break
                    v = nv
            else:
                v = full
                while True:
                    nv = right & (left | shift(v))
                    if nv == v:
                        break
                    v = nv
        vals.append(v)
    return bool(vals[-1] & 1)


_OPS = {Not: "not", And: "and", Or: "or", Implies: "implies", Next: "next",
        Until: "until", Release: "release"}


@lru_cache(maxsize=1024)
def _program(f: Formula) -> tuple:
    """Flatten ``f`` into post-order instructions over value slots.

    F x compiles to ``true U x`` (left slot None) and G x to ``false R x``
    (left slot -1).
    """
    slots: dict[int, int] = {}
    prog: list[tuple] = []

    def emit(g):
        key = id(g)
        if key in slots:
            return slots[key]
        if isinstance(g, Atom):
            ins = ("atom", g.name, None)
        elif isinstance(g, TrueConst):
            ins = ("true", None, None)
        elif isinstance(g, FalseConst):
            ins = ("false", None, None)
        elif isinstance(g, Eventually):
            ins = ("until", None, emit(g.arg))
        elif isinstance(g, Always):
            ins = ("release", -1, emit(g.arg))
        elif isinstance(g, _Unary):
            ins = (_OPS[type(g)], emit(g.arg), None)
        elif isinstance(g, _Binary):
            ins = (_OPS[type(g)], emit(g.left), emit(g.right))
        else:
            raise TypeError(f"not a formula: {g!r}")
        prog.append(ins)
        slots[key] = len(prog) - 1
        return slots[key]

    emit(f)
    return tuple(prog)
