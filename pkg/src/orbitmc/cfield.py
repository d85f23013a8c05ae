"""Exact arithmetic in Q(lam, conj(lam)) for a complex eigenvalue pair.

Elements are fractions of bivariate rational polynomials in x (standing for
lam) and y (standing for conj(lam)), kept in normal form modulo the ideal
generated by p(x) and S(x, y) = (p(y) - p(x)) / (y - x), where p is the
monic minimal polynomial of lam over Q (degree 2 or 3).  Those two
generators have coprime leading monomials under lex y > x, so reduction
gives canonical representatives and the zero test is syntactic.

Division works on fractions directly, and complex conjugation is the swap
x <-> y followed by reduction.  Conversion to the standard algebraic-number
representation happens only at module boundaries.
"""

from __future__ import annotations

import sympy
from gmpy2 import mpq

from .errors import DomainError, InvalidInputError
from .algebraic import (
    AlgebraicNumber,
    alg_add,
    alg_inv,
    alg_is_zero,
    alg_mul,
    alg_pow,
)

_X, _Y = sympy.symbols("x y")


def _to_sympy_q(q):
    q = mpq(q)
    return sympy.Rational(int(q.numerator), int(q.denominator))


class ConjField:
    """The field Q(lam, conj lam) with lam of degree 2 or 3 over Q."""

    def __init__(self, min_poly, lam_alg: AlgebraicNumber, lamc_alg: AlgebraicNumber):
        d = min_poly.degree()
        if d not in (2, 3):
            raise InvalidInputError("complex eigenvalue degree must be 2 or 3")
        lead = min_poly.coeffs[-1]
        self.monic = [mpq(c, lead) for c in min_poly.coeffs]  # index = degree
        self.degree = d
        self.lam_alg = lam_alg
        self.lamc_alg = lamc_alg
        self.px = sum(_to_sympy_q(c) * _X**i for i, c in enumerate(self.monic))
        # S(x, y) = (p(y) - p(x)) / (y - x), monic in y of degree d - 1
        py = sum(_to_sympy_q(c) * _Y**i for i, c in enumerate(self.monic))
        self.sxy = sympy.expand(sympy.cancel((py - self.px) / (_Y - _X)))
        self._basis = [sympy.Poly(self.sxy, _Y, _X).as_expr(), self.px]
        self._alg_cache = {}

    def reduce(self, expr):
        expr = sympy.expand(expr)
        _, r = sympy.reduced(expr, self._basis, _Y, _X, order="lex")
        return sympy.expand(r)

    def elem(self, num, den=1):
        return FieldFrac(self, self.reduce(num), self.reduce(den))

    def from_rational(self, q):
        return self.elem(_to_sympy_q(q))

    def lam(self):
        return self.elem(_X)

    def lamc(self):
        return self.elem(_Y)

    def eval_alg(self, expr) -> AlgebraicNumber:
        """Value of a reduced polynomial at (lam, conj lam)."""
        poly = sympy.Poly(expr, _X, _Y)
        acc = AlgebraicNumber.from_rational(0)
        for (i, j), c in zip(poly.monoms(), poly.coeffs()):
            c = sympy.Rational(c)
            term = AlgebraicNumber.from_rational(mpq(int(c.p), int(c.q)))
            if i:
                term = alg_mul(term, self._gen_pow(_X, i))
            if j:
                term = alg_mul(term, self._gen_pow(_Y, j))
            acc = alg_add(acc, term)
        return acc

    def _gen_pow(self, sym, e):
        key = (sym, e)
        got = self._alg_cache.get(key)
        if got is None:
            base = self.lam_alg if sym is _X else self.lamc_alg
            got = self._alg_cache[key] = alg_pow(base, e)
        return got


class FieldFrac:
    """Fraction num/den of reduced polynomials; den nonzero at (lam, lamc)."""

    __slots__ = ("field", "num", "den")

    def __init__(self, field: ConjField, num, den):
        if den == 0:
            raise DomainError("zero denominator polynomial")
        self.field = field
        self.num = num
        self.den = den

    def _wrap(self, num, den):
        num = self.field.reduce(num)
        den = self.field.reduce(den)
        if den == 0:
            raise DomainError("denominator vanishes in the field")
        g = sympy.gcd(num, den)
        if g != 1:
            num = sympy.expand(sympy.cancel(num / g))
            den = sympy.expand(sympy.cancel(den / g))
        return FieldFrac(self.field, num, den)

    @property
    def is_zero(self) -> bool:
        return self.num == 0

    def add(self, other: "FieldFrac") -> "FieldFrac":
        return self._wrap(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    def sub(self, other: "FieldFrac") -> "FieldFrac":
        return self._wrap(
            self.num * other.den - other.num * self.den, self.den * other.den
        )

    def mul(self, other: "FieldFrac") -> "FieldFrac":
        return self._wrap(self.num * other.num, self.den * other.den)

    def neg(self) -> "FieldFrac":
        return FieldFrac(self.field, sympy.expand(-self.num), self.den)

    def inv(self) -> "FieldFrac":
        if self.is_zero:
            raise DomainError("inversion of zero field element")
        return self._wrap(self.den, self.num)

    def div(self, other: "FieldFrac") -> "FieldFrac":
        return self.mul(other.inv())

    def pow(self, e: int) -> "FieldFrac":
        if e < 0:
            return self.inv().pow(-e)
        out = self.field.from_rational(1)
        base = self
        while e:
            if e & 1:
                out = out.mul(base)
            e >>= 1
            if e:
                base = base.mul(base)
        return out

    def scale(self, q) -> "FieldFrac":
        return self._wrap(self.num * _to_sympy_q(q), self.den)

    def conj(self) -> "FieldFrac":
        swap = {_X: _Y, _Y: _X}
        return self._wrap(self.num.xreplace(swap), self.den.xreplace(swap))

    def equals(self, other: "FieldFrac") -> bool:
        return self.sub(other).is_zero

    def to_alg(self) -> AlgebraicNumber:
        n = self.field.eval_alg(self.num)
        if self.den == 1:
            return n
        d = self.field.eval_alg(self.den)
        if alg_is_zero(d):
            raise DomainError("denominator evaluates to zero")
        return alg_mul(n, alg_inv(d))

    def __repr__(self):
        if self.den == 1:
            return f"FieldFrac({self.num})"
        return f"FieldFrac(({self.num})/({self.den}))"
