"""Exact univariate integer polynomials.

Coefficient lists are indexed by degree (coeffs[i] is the coefficient of x^i)
and the leading coefficient of a nonzero polynomial is never zero.  Heavy
polynomial algebra (factorisation over Z, resultants) is delegated to sympy;
everything sign-critical (Sturm sequences, evaluation, separation bounds) is
done here in exact rational arithmetic.
"""

from __future__ import annotations

import math
from functools import lru_cache

import sympy
from gmpy2 import mpq

from .errors import InvalidInputError

_X = sympy.Symbol("x")


def _trim(coeffs):
    c = list(coeffs)
    while c and c[-1] == 0:
        c.pop()
    return c


class IntPolynomial:
    """Integer polynomial, coefficients indexed by degree."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        self.coeffs = tuple(int(c) for c in _trim(coeffs))

    # -- basic structure ---------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def degree(self) -> int:
        if self.is_zero:
            raise InvalidInputError("zero polynomial has no degree")
        return len(self.coeffs) - 1

    def height(self) -> int:
        if self.is_zero:
            return 0
        return max(abs(c) for c in self.coeffs)

    def bitsize(self) -> int:
        """Total bit length of the coefficient list (at least 1 per slot)."""
        return sum(max(1, abs(c).bit_length()) for c in self.coeffs)

    def content(self) -> int:
        return math.gcd(*self.coeffs) if self.coeffs else 0

    def primitive(self) -> "IntPolynomial":
        """Primitive part with positive leading coefficient."""
        if self.is_zero:
            return self
        g = self.content()
        if self.coeffs[-1] < 0:
            g = -g
        return IntPolynomial([c // g for c in self.coeffs])

    def __eq__(self, other):
        return isinstance(other, IntPolynomial) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"IntPolynomial({list(self.coeffs)})"

    def __str__(self):
        if self.is_zero:
            return "0"
        parts = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            term = "" if (abs(c) == 1 and i > 0) else str(abs(c))
            if i == 1:
                term += "x"
            elif i > 1:
                term += f"x^{i}"
            parts.append(("-" if c < 0 else "+") + term)
        s = "".join(parts)
        return s[1:] if s.startswith("+") else s

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return IntPolynomial(
            [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)]
        )

    def __sub__(self, other):
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return IntPolynomial(
            [(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)]
        )

    def __mul__(self, other):
        if isinstance(other, int):
            return IntPolynomial([c * other for c in self.coeffs])
        if self.is_zero or other.is_zero:
            return IntPolynomial([])
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return IntPolynomial(out)

    __rmul__ = __mul__

    def derivative(self) -> "IntPolynomial":
        return IntPolynomial([i * c for i, c in enumerate(self.coeffs)][1:])

    # -- evaluation --------------------------------------------------------

    def eval_q(self, x):
        """Exact evaluation at a rational point (Horner)."""
        acc = mpq(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_complex_q(self, re, im):
        """Exact evaluation at a rational complex point; returns (re, im)."""
        ar, ai = mpq(0), mpq(0)
        for c in reversed(self.coeffs):
            ar, ai = ar * re - ai * im + c, ar * im + ai * re
        return ar, ai

    # -- root transforms ---------------------------------------------------

    def negate_input(self) -> "IntPolynomial":
        """p(-x): roots negated."""
        return IntPolynomial([(-c if i % 2 else c) for i, c in enumerate(self.coeffs)])

    def reverse(self) -> "IntPolynomial":
        """x^deg * p(1/x): nonzero roots inverted.  Requires p(0) != 0."""
        if self.is_zero or self.coeffs[0] == 0:
            raise InvalidInputError("reverse requires a nonzero constant term")
        return IntPolynomial(list(reversed(self.coeffs)))

    def scale_roots(self, r) -> "IntPolynomial":
        """Integer polynomial whose roots are r * (roots of self), r rational."""
        r = mpq(r)
        if r == 0:
            raise InvalidInputError("scale factor must be nonzero")
        p, q = int(r.numerator), int(r.denominator)
        d = len(self.coeffs) - 1
        # coefficient of x^i becomes c_i * q^i * p^(d-i)
        out = [c * q**i * p ** (d - i) for i, c in enumerate(self.coeffs)]
        return IntPolynomial(out).primitive()

    def compose_square(self) -> "IntPolynomial":
        """p(x^2): roots are the square roots of the roots of p."""
        out = [0] * (2 * len(self.coeffs) - 1)
        for i, c in enumerate(self.coeffs):
            out[2 * i] = c
        return IntPolynomial(out)

    # -- sympy bridge ------------------------------------------------------

    def to_sympy(self):
        return sympy.Poly(list(reversed(self.coeffs)), _X, domain="ZZ")

    @staticmethod
    def from_sympy(poly) -> "IntPolynomial":
        return IntPolynomial(list(reversed([int(c) for c in poly.all_coeffs()])))

    def squarefree_part(self) -> "IntPolynomial":
        if self.is_zero:
            raise InvalidInputError("zero polynomial")
        return IntPolynomial.from_sympy(self.to_sympy().sqf_part()).primitive()

    def factor_irreducible(self):
        """Irreducible primitive factors over Z (multiplicities dropped)."""
        if self.is_zero:
            raise InvalidInputError("zero polynomial")
        _, factors = self.to_sympy().factor_list()
        out = []
        for f, _mult in factors:
            g = IntPolynomial.from_sympy(sympy.Poly(f, _X)).primitive()
            if not g.is_zero and g.degree() >= 1:
                out.append(g)
        return out

    def factor_with_multiplicity(self):
        """List of (irreducible primitive factor, multiplicity) over Z."""
        if self.is_zero:
            raise InvalidInputError("zero polynomial")
        _, factors = self.to_sympy().factor_list()
        out = []
        for f, mult in factors:
            g = IntPolynomial.from_sympy(sympy.Poly(f, _X)).primitive()
            if not g.is_zero and g.degree() >= 1:
                out.append((g, int(mult)))
        return out

    # -- real-root machinery ----------------------------------------------

    def sturm_sequence(self):
        """Sturm chain as lists of mpq coefficients (index = degree)."""
        def q_trim(c):
            c = list(c)
            while c and c[-1] == 0:
                c.pop()
            return c

        def q_rem(a, b):
            a = list(a)
            db, lb = len(b) - 1, b[-1]
            while len(a) - 1 >= db and a:
                la = a[-1]
                s = la / lb
                k = len(a) - 1 - db
                for i, bc in enumerate(b):
                    a[i + k] -= s * bc
                a = q_trim(a)
            return a

        p0 = q_trim([mpq(c) for c in self.coeffs])
        chain = [p0]
        d = [mpq(i * c) for i, c in enumerate(self.coeffs)][1:]
        d = q_trim(d)
        if d:
            chain.append(d)
            while len(chain[-1]) > 1:
                r = q_rem(chain[-2], chain[-1])
                if not r:
                    break
                chain.append([-c for c in r])
        return chain

    def count_real_roots(self, a, b) -> int:
        """Number of distinct real roots in (a, b], for rationals a < b.

        Requires self squarefree for a correct count of *distinct* roots of
        the original polynomial; callers pass the squarefree part.
        """
        chain = self._sturm_cached()

        def variations(x):
            signs = []
            for c in chain:
                acc = mpq(0)
                for cc in reversed(c):
                    acc = acc * x + cc
                if acc != 0:
                    signs.append(1 if acc > 0 else -1)
            return sum(1 for s, t in zip(signs, signs[1:]) if s != t)

        return variations(mpq(a)) - variations(mpq(b))

    def _sturm_cached(self):
        chain = _STURM_CACHE.get(self.coeffs)
        if chain is None:
            chain = _STURM_CACHE[self.coeffs] = self.sturm_sequence()
        return chain

    def cauchy_root_bound(self):
        """Rational B with all roots in |z| < B."""
        if self.is_zero:
            raise InvalidInputError("zero polynomial")
        lead = abs(self.coeffs[-1])
        if len(self.coeffs) == 1:
            return mpq(1)
        return 1 + mpq(max(abs(c) for c in self.coeffs[:-1]), lead)


_STURM_CACHE: dict = {}


def sqrt_floor_q(x):
    """Rational lower bound on sqrt(x) for rational x >= 0."""
    x = mpq(x)
    if x < 0:
        raise InvalidInputError("negative operand")
    p, q = int(x.numerator), int(x.denominator)
    # sqrt(p/q) = sqrt(p*q)/q
    return mpq(math.isqrt(p * q), q)


def sqrt_ceil_q(x):
    """Rational upper bound on sqrt(x) for rational x >= 0."""
    x = mpq(x)
    if x < 0:
        raise InvalidInputError("negative operand")
    p, q = int(x.numerator), int(x.denominator)
    r = math.isqrt(p * q)
    if r * r < p * q:
        r += 1
    return mpq(r, q)


def sqrt_floor_prec(x, bits: int):
    """Lower bound on sqrt(x) accurate to 2^-bits."""
    x = mpq(x)
    if x < 0:
        raise InvalidInputError("negative operand")
    p, q = int(x.numerator), int(x.denominator)
    scale = 1 << bits
    return mpq(math.isqrt(p * q * scale * scale), q * scale)


def sqrt_ceil_prec(x, bits: int):
    """Upper bound on sqrt(x) accurate to 2^-bits."""
    x = mpq(x)
    if x < 0:
        raise InvalidInputError("negative operand")
    p, q = int(x.numerator), int(x.denominator)
    scale = 1 << bits
    n = p * q * scale * scale
    r = math.isqrt(n)
    if r * r < n:
        r += 1
    return mpq(r, q * scale)


@lru_cache(maxsize=None)
def _sqrt6_lower(bits: int):
    # floor(sqrt(6 * 4^bits)) / 2^bits
    return mpq(math.isqrt(6 << (2 * bits)), 1 << bits)


NO_ROOT_PAIR = mpq(-1)  # sentinel for mignotte_separation on degree < 2


def mignotte_separation(p: IntPolynomial):
    """Rational positive lower bound on |a - b| over distinct roots a, b.

    Uses the bound sqrt(6) / (d^((d+1)/2) * H^(d-1)) with a rational
    underestimate of the numerator and overestimate of the denominator.
    Returns NO_ROOT_PAIR when the degree is below 2 (no pair of roots).
    """
    if p.is_zero:
        raise InvalidInputError("zero polynomial")
    d = p.degree()
    if d < 2:
        return NO_ROOT_PAIR
    h = p.height()
    num = _sqrt6_lower(32)
    # d^((d+1)/2) <= ceil(sqrt(d^(d+1)))
    den = sqrt_ceil_q(mpq(d ** (d + 1))) * h ** (d - 1)
    return num / den


def resultant_add(p: IntPolynomial, q: IntPolynomial) -> IntPolynomial:
    """Integer polynomial with alpha + beta among its roots.

    alpha ranges over roots of p, beta over roots of q.
    """
    y = sympy.Symbol("y")
    py = sympy.Poly(list(reversed(p.coeffs)), y).as_expr()
    qxy = sum(c * (_X - y) ** i for i, c in enumerate(q.coeffs))
    r = sympy.resultant(py, sympy.expand(qxy), y)
    return IntPolynomial.from_sympy(sympy.Poly(r, _X)).primitive()


def resultant_mul(p: IntPolynomial, q: IntPolynomial) -> IntPolynomial:
    """Integer polynomial with alpha * beta among its roots.

    Roots of q at zero are handled by the caller (alpha * 0 is rational).
    """
    y = sympy.Symbol("y")
    py = sympy.Poly(list(reversed(p.coeffs)), y).as_expr()
    m = q.degree()
    # y^m * q(x/y)
    qxy = sum(c * _X**i * y ** (m - i) for i, c in enumerate(q.coeffs))
    r = sympy.resultant(py, sympy.expand(qxy), y)
    poly = sympy.Poly(r, _X)
    if poly.is_zero:
        raise InvalidInputError("degenerate resultant in multiplication")
    return IntPolynomial.from_sympy(poly).primitive()


def from_rational(r) -> IntPolynomial:
    """Minimal polynomial q*x - p of the rational p/q."""
    r = mpq(r)
    return IntPolynomial([-int(r.numerator), int(r.denominator)]).primitive()
