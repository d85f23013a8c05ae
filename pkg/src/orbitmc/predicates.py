"""Semialgebraic atoms: integer polynomial inequalities in x1, x2, x3.

Polynomials are stored densely over all exponent triples up to the total
degree, so the encoding size is at least the degree.  Rational coefficients
in the source text are cleared by the (positive) common denominator, which
does not change the sign predicate.
"""

from __future__ import annotations

import math

import sympy
from gmpy2 import mpq

from .errors import InvalidInputError

_VARS = sympy.symbols("x1 x2 x3")

STRICT = ">"
NONSTRICT = ">="


class Poly3:
    """Integer polynomial in x1, x2, x3, dense up to its total degree."""

    __slots__ = ("coeffs", "total_degree")

    def __init__(self, coeffs):
        clean = {}
        deg = 0
        for key, c in coeffs.items():
            c = int(c)
            if c == 0:
                continue
            e = tuple(int(x) for x in key)
            if len(e) != 3 or any(x < 0 for x in e):
                raise InvalidInputError("bad exponent triple")
            clean[e] = c
            deg = max(deg, sum(e))
        self.coeffs = clean
        self.total_degree = deg

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        return isinstance(other, Poly3) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def neg(self) -> "Poly3":
        return Poly3({e: -c for e, c in self.coeffs.items()})

    def encoding_bits(self) -> int:
        """Dense encoding size: one slot per monomial of total degree <= deg."""
        d = self.total_degree
        slots = (d + 1) * (d + 2) * (d + 3) // 6
        bits = 0
        for e1 in range(d + 1):
            for e2 in range(d + 1 - e1):
                for e3 in range(d + 1 - e1 - e2):
                    c = self.coeffs.get((e1, e2, e3), 0)
                    bits += max(1, abs(c).bit_length())
        return max(bits, slots, d)

    def eval_q(self, v):
        """Exact evaluation at a rational 3-vector."""
        acc = mpq(0)
        for (e1, e2, e3), c in self.coeffs.items():
            acc += c * v[0] ** e1 * v[1] ** e2 * v[2] ** e3
        return acc

    def monomials(self):
        return sorted(self.coeffs.items())

    def __str__(self):
        if self.is_zero:
            return "0"
        parts = []
        for (e1, e2, e3), c in self.monomials():
            body = []
            for name, e in (("x1", e1), ("x2", e2), ("x3", e3)):
                if e == 1:
                    body.append(name)
                elif e > 1:
                    body.append(f"{name}^{e}")
            mono = "*".join(body)
            if not mono:
                term = str(abs(c))
            elif abs(c) == 1:
                term = mono
            else:
                term = f"{abs(c)}*{mono}"
            parts.append(("- " if c < 0 else "+ ") + term)
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]

    @staticmethod
    def parse(text: str) -> "Poly3":
        try:
            expr = sympy.parse_expr(
                text.replace("^", "**"),
                local_dict={s.name: s for s in _VARS},
                evaluate=True,
            )
        except Exception as exc:
            raise InvalidInputError(f"malformed polynomial {text!r}: {exc}") from exc
        expr = sympy.expand(sympy.nsimplify(expr, rational=True))
        if not expr.free_symbols <= set(_VARS):
            extra = expr.free_symbols - set(_VARS)
            raise InvalidInputError(f"unknown variables {sorted(map(str, extra))}")
        poly = sympy.Poly(expr, *_VARS, domain="QQ")
        den = 1
        for c in poly.coeffs():
            den = den * int(c.q) // math.gcd(den, int(c.q))
        coeffs = {}
        for mono, c in zip(poly.monoms(), poly.coeffs()):
            coeffs[mono] = int(c * den)
        return Poly3(coeffs)


class AtomicPredicate:
    """Named inequality p(x) > 0 or p(x) >= 0."""

    __slots__ = ("name", "poly", "relation")

    def __init__(self, name: str, poly: Poly3, relation: str):
        if relation not in (STRICT, NONSTRICT):
            raise InvalidInputError("relation must be '>' or '>='")
        self.name = name
        self.poly = poly
        self.relation = relation

    def __repr__(self):
        return f"AtomicPredicate({self.name}: {self.poly} {self.relation} 0)"

    def negated(self, name: str) -> "AtomicPredicate":
        """Complement predicate: not(p >= 0) is -p > 0 and dually."""
        flipped = STRICT if self.relation == NONSTRICT else NONSTRICT
        return AtomicPredicate(name, self.poly.neg(), flipped)

    def holds_q(self, v) -> bool:
        """Truth at a rational 3-vector."""
        val = self.poly.eval_q(v)
        return val > 0 if self.relation == STRICT else val >= 0

    @staticmethod
    def parse(name: str, text: str) -> "AtomicPredicate":
        text = text.strip()
        for rel in (NONSTRICT, STRICT):
            if rel in text:
                lhs, rhs = text.split(rel, 1)
                if rhs.strip() not in ("0", ""):
                    raise InvalidInputError(
                        f"predicate {name}: right-hand side must be 0"
                    )
                return AtomicPredicate(name, Poly3.parse(lhs), rel)
        # bare polynomial: strict comparison against 0 by default
        return AtomicPredicate(name, Poly3.parse(text), STRICT)
