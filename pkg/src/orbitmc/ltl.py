"""LTL formulas over named semialgebraic atoms.

Parser precedence, low to high: U and R (right-associative), then |, &, ->,
and finally the unary operators !, X, F, G.  The negation-free translation
eliminates !, ->, F and G, duplicating predicates to fold atom polarity into
the predicate table.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidInputError
from .predicates import AtomicPredicate


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class FalseF(Formula):
    pass


@dataclass(frozen=True)
class Not(Formula):
    sub: Formula


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
class Next(Formula):
    sub: Formula


@dataclass(frozen=True)
class Finally(Formula):
    sub: Formula


@dataclass(frozen=True)
class Globally(Formula):
    sub: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Release(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class BoundedUntil(Formula):
    left: Formula
    right: Formula
    bound: int


@dataclass(frozen=True)
class BoundedRelease(Formula):
    left: Formula
    right: Formula
    bound: int


TRUE = TrueF()
FALSE = FalseF()


# ---------------------------------------------------------------------------
# parsing


class _Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col


_KEYWORDS = {"U", "R", "X", "F", "G", "true", "false"}


def _tokenize(text):
    tokens = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch in "()!&|":
            tokens.append(_Token(ch, ch, line, col))
            i += 1
            col += 1
            continue
        if text.startswith("->", i):
            tokens.append(_Token("->", "->", line, col))
            i += 2
            col += 2
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = word if word in _KEYWORDS else "ident"
            tokens.append(_Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        raise InvalidInputError(f"syntax error at line {line}, column {col}: {ch!r}")
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self, kind=None):
        tok = self.tokens[self.pos]
        if kind is not None and tok.kind != kind:
            raise InvalidInputError(
                f"syntax error at line {tok.line}, column {tok.col}: "
                f"expected {kind}, found {tok.text or 'end of input'!r}"
            )
        self.pos += 1
        return tok

    def formula(self):
        left = self.or_level()
        tok = self.peek()
        if tok.kind in ("U", "R"):
            self.take()
            right = self.formula()  # right-associative
            return Until(left, right) if tok.kind == "U" else Release(left, right)
        return left

    def or_level(self):
        left = self.and_level()
        while self.peek().kind == "|":
            self.take()
            left = Or(left, self.and_level())
        return left

    def and_level(self):
        left = self.implies_level()
        while self.peek().kind == "&":
            self.take()
            left = And(left, self.implies_level())
        return left

    def implies_level(self):
        left = self.unary()
        if self.peek().kind == "->":
            self.take()
            return Implies(left, self.implies_level())
        return left

    def unary(self):
        tok = self.peek()
        if tok.kind == "!":
            self.take()
            return Not(self.unary())
        if tok.kind == "X":
            self.take()
            return Next(self.unary())
        if tok.kind == "F":
            self.take()
            return Finally(self.unary())
        if tok.kind == "G":
            self.take()
            return Globally(self.unary())
        return self.primary()

    def primary(self):
        tok = self.take()
        if tok.kind == "(":
            f = self.formula()
            self.take(")")
            return f
        if tok.kind == "true":
            return TRUE
        if tok.kind == "false":
            return FALSE
        if tok.kind == "ident":
            return Atom(tok.text)
        raise InvalidInputError(
            f"syntax error at line {tok.line}, column {tok.col}: "
            f"unexpected {tok.text or 'end of input'!r}"
        )


def parse_formula(text: str) -> Formula:
    parser = _Parser(_tokenize(text))
    f = parser.formula()
    parser.take("eof")
    return f


def check_atoms_resolve(f: Formula, preds: dict):
    for name in atom_names(f):
        if name not in preds:
            raise InvalidInputError(f"unknown atom {name!r}")


def atom_names(f: Formula):
    out = set()

    def walk(g):
        if isinstance(g, Atom):
            out.add(g.name)
        elif isinstance(g, (Not, Next, Finally, Globally)):
            walk(g.sub)
        elif isinstance(g, (And, Or, Implies, Until, Release, BoundedUntil, BoundedRelease)):
            walk(g.left)
            walk(g.right)

    walk(f)
    return out


# ---------------------------------------------------------------------------
# pretty printing (inverse of parse on ASTs without bounded operators)

_PREC = {
    Until: 0,
    Release: 0,
    BoundedUntil: 0,
    BoundedRelease: 0,
    Or: 1,
    And: 2,
    Implies: 3,
    Not: 4,
    Next: 4,
    Finally: 4,
    Globally: 4,
    Atom: 5,
    TrueF: 5,
    FalseF: 5,
}


def pretty(f: Formula) -> str:
    def wrap(g, level):
        s = pretty(g)
        return f"({s})" if _PREC[type(g)] < level else s

    if isinstance(f, Atom):
        return f.name
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, Not):
        return "!" + wrap(f.sub, 4)
    if isinstance(f, Next):
        return "X " + wrap(f.sub, 4)
    if isinstance(f, Finally):
        return "F " + wrap(f.sub, 4)
    if isinstance(f, Globally):
        return "G " + wrap(f.sub, 4)
    if isinstance(f, And):
        return f"{wrap(f.left, 2)} & {wrap(f.right, 3)}"
    if isinstance(f, Or):
        return f"{wrap(f.left, 1)} | {wrap(f.right, 2)}"
    if isinstance(f, Implies):
        return f"{wrap(f.left, 4)} -> {wrap(f.right, 3)}"
    if isinstance(f, Until):
        return f"{wrap(f.left, 1)} U {wrap(f.right, 0)}"
    if isinstance(f, Release):
        return f"{wrap(f.left, 1)} R {wrap(f.right, 0)}"
    if isinstance(f, BoundedUntil):
        return f"{wrap(f.left, 1)} U[<={f.bound}] {wrap(f.right, 0)}"
    if isinstance(f, BoundedRelease):
        return f"{wrap(f.left, 1)} R[<={f.bound}] {wrap(f.right, 0)}"
    raise InvalidInputError(f"unknown formula node {f!r}")


# ---------------------------------------------------------------------------
# negation-free normal form


def to_negation_free(f: Formula, preds: dict):
    """NNF with atom polarity folded into duplicated predicates.

    Returns (formula, table) where the table extends preds with the
    complement predicates actually used.
    """
    table = dict(preds)

    def neg_atom(name: str) -> Formula:
        if name not in table:
            raise InvalidInputError(f"unknown atom {name!r}")
        want = table[name].negated("")
        neg_name = f"not_{name}"
        while neg_name in table and not (
            table[neg_name].poly == want.poly and table[neg_name].relation == want.relation
        ):
            neg_name = "_" + neg_name
        if neg_name not in table:
            table[neg_name] = table[name].negated(neg_name)
        return Atom(neg_name)

    def pos(g: Formula) -> Formula:
        if isinstance(g, (Atom, TrueF, FalseF)):
            return g
        if isinstance(g, Not):
            return neg(g.sub)
        if isinstance(g, And):
            return And(pos(g.left), pos(g.right))
        if isinstance(g, Or):
            return Or(pos(g.left), pos(g.right))
        if isinstance(g, Implies):
            return Or(neg(g.left), pos(g.right))
        if isinstance(g, Next):
            return Next(pos(g.sub))
        if isinstance(g, Finally):
            return Until(TRUE, pos(g.sub))
        if isinstance(g, Globally):
            return Release(FALSE, pos(g.sub))
        if isinstance(g, Until):
            return Until(pos(g.left), pos(g.right))
        if isinstance(g, Release):
            return Release(pos(g.left), pos(g.right))
        if isinstance(g, BoundedUntil):
            return BoundedUntil(pos(g.left), pos(g.right), g.bound)
        if isinstance(g, BoundedRelease):
            return BoundedRelease(pos(g.left), pos(g.right), g.bound)
        raise InvalidInputError(f"unknown formula node {g!r}")

    def neg(g: Formula) -> Formula:
        if isinstance(g, Atom):
            return neg_atom(g.name)
        if isinstance(g, TrueF):
            return FALSE
        if isinstance(g, FalseF):
            return TRUE
        if isinstance(g, Not):
            return pos(g.sub)
        if isinstance(g, And):
            return Or(neg(g.left), neg(g.right))
        if isinstance(g, Or):
            return And(neg(g.left), neg(g.right))
        if isinstance(g, Implies):
            return And(pos(g.left), neg(g.right))
        if isinstance(g, Next):
            return Next(neg(g.sub))
        if isinstance(g, Finally):
            return Release(FALSE, neg(g.sub))
        if isinstance(g, Globally):
            return Until(TRUE, neg(g.sub))
        if isinstance(g, Until):
            return Release(neg(g.left), neg(g.right))
        if isinstance(g, Release):
            return Until(neg(g.left), neg(g.right))
        if isinstance(g, BoundedUntil):
            return BoundedRelease(neg(g.left), neg(g.right), g.bound)
        if isinstance(g, BoundedRelease):
            return BoundedUntil(neg(g.left), neg(g.right), g.bound)
        raise InvalidInputError(f"unknown formula node {g!r}")

    return pos(f), table


def temporal_depth(f: Formula) -> int:
    if isinstance(f, (Atom, TrueF, FalseF)):
        return 0
    if isinstance(f, Not):
        return temporal_depth(f.sub)
    if isinstance(f, (And, Or, Implies)):
        return max(temporal_depth(f.left), temporal_depth(f.right))
    if isinstance(f, (Next, Finally, Globally)):
        return 1 + temporal_depth(f.sub)
    if isinstance(f, (Until, Release, BoundedUntil, BoundedRelease)):
        return 1 + max(temporal_depth(f.left), temporal_depth(f.right))
    raise InvalidInputError(f"unknown formula node {f!r}")
