"""Spectral analysis of 3x3 rational matrices.

Classifies the eigenvalue structure into the two regimes the decision
procedure distinguishes (three real eigenvalues, or a complex conjugate pair
plus a real eigenvalue) and produces exact closed forms for the orbit
M^n s as combinations of eigenvalue powers with algebraic coefficients.
"""

from __future__ import annotations

import math

from gmpy2 import mpq

from .cfield import ConjField
from .errors import DomainError, InvalidInputError
from .intpoly import IntPolynomial
from .algebraic import (
    AlgebraicNumber,
    alg_abs,
    alg_add,
    alg_conj,
    alg_equal,
    alg_inv,
    alg_is_zero,
    alg_mul,
    alg_neg,
    alg_pow,
    alg_sub,
    is_root_of_unity,
    poly_complex_roots,
    poly_real_roots,
)

GAMMA_DEGREE_LIMIT = 12  # lambda has degree <= 2, so gamma has degree <= 12


class RationalMatrix3:
    """3x3 matrix over the rationals.

    Inputs of dimension 1 or 2 are zero-padded into the top-left block.
    """

    __slots__ = ("rows",)

    def __init__(self, rows):
        rows = [list(r) for r in rows]
        d = len(rows)
        if d not in (1, 2, 3) or any(len(r) != d for r in rows):
            raise InvalidInputError("matrix must be square of dimension 1, 2 or 3")
        padded = [[mpq(0)] * 3 for _ in range(3)]
        for i in range(d):
            for j in range(d):
                padded[i][j] = mpq(rows[i][j])
        self.rows = tuple(tuple(r) for r in padded)

    def __eq__(self, other):
        return isinstance(other, RationalMatrix3) and self.rows == other.rows

    def __repr__(self):
        return f"RationalMatrix3({[[str(x) for x in r] for r in self.rows]})"

    @staticmethod
    def pad_vector(v):
        v = [mpq(x) for x in v]
        if len(v) not in (1, 2, 3):
            raise InvalidInputError("vector must have dimension 1, 2 or 3")
        return tuple(v + [mpq(0)] * (3 - len(v)))

    def mat_vec(self, v):
        return tuple(sum(self.rows[i][j] * v[j] for j in range(3)) for i in range(3))

    def mat_mul(self, other: "RationalMatrix3") -> "RationalMatrix3":
        return RationalMatrix3(
            [
                [sum(self.rows[i][k] * other.rows[k][j] for k in range(3)) for j in range(3)]
                for i in range(3)
            ]
        )

    @staticmethod
    def identity() -> "RationalMatrix3":
        return RationalMatrix3([[1, 0, 0], [0, 1, 0], [0, 0, 1]])

    def power(self, n: int) -> "RationalMatrix3":
        if n < 0:
            raise InvalidInputError("negative matrix power")
        result = RationalMatrix3.identity()
        base = self
        while n:
            if n & 1:
                result = result.mat_mul(base)
            n >>= 1
            if n:
                base = base.mat_mul(base)
        return result

    def sub_scalar(self, r) -> "RationalMatrix3":
        r = mpq(r)
        out = [list(row) for row in self.rows]
        for i in range(3):
            out[i][i] -= r
        return RationalMatrix3(out)

    def rank(self) -> int:
        m = [list(row) for row in self.rows]
        rank = 0
        col = 0
        for col in range(3):
            piv = None
            for i in range(rank, 3):
                if m[i][col] != 0:
                    piv = i
                    break
            if piv is None:
                continue
            m[rank], m[piv] = m[piv], m[rank]
            p = m[rank][col]
            for i in range(rank + 1, 3):
                if m[i][col] != 0:
                    f = m[i][col] / p
                    for j in range(col, 3):
                        m[i][j] -= f * m[rank][j]
            rank += 1
        return rank


# ---------------------------------------------------------------------------
# characteristic polynomial


def char_poly(M: RationalMatrix3) -> IntPolynomial:
    """Monic-up-to-scaling integer characteristic polynomial det(xI - M)."""
    a = M.rows
    tr = a[0][0] + a[1][1] + a[2][2]
    m2 = (
        a[0][0] * a[1][1]
        - a[0][1] * a[1][0]
        + a[0][0] * a[2][2]
        - a[0][2] * a[2][0]
        + a[1][1] * a[2][2]
        - a[1][2] * a[2][1]
    )
    det = (
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    )
    coeffs = [-det, m2, -tr, mpq(1)]
    den = 1
    for c in coeffs:
        den = den * int(c.denominator) // math.gcd(den, int(c.denominator))
    return IntPolynomial([int(c * den) for c in coeffs]).primitive()


# ---------------------------------------------------------------------------
# classification


class ThreeReal:
    """All eigenvalues real; jordan_case is the size of the largest block."""

    __slots__ = ("eigs", "jordan_case")

    def __init__(self, eigs, jordan_case):
        self.eigs = list(eigs)
        self.jordan_case = jordan_case

    def __repr__(self):
        return f"ThreeReal({self.eigs}, jordan_case={self.jordan_case})"


class ComplexPair:
    """One complex conjugate pair (lam, conj lam) and a real eigenvalue rho."""

    __slots__ = ("lam", "rho", "gamma", "rou_order")

    def __init__(self, lam, rho, gamma, rou_order):
        self.lam = lam
        self.rho = rho
        self.gamma = gamma
        self.rou_order = rou_order

    def __repr__(self):
        return f"ComplexPair(lam={self.lam}, rho={self.rho}, rou_order={self.rou_order})"


def classify(M: RationalMatrix3):
    p = char_poly(M)
    roots = poly_complex_roots(p)
    complex_roots = [r for r in roots if not r.is_real()]
    if complex_roots:
        lam = next(r for r in complex_roots if r.ball().im > 0)
        rho = next(r for r in roots if r.is_real())
        gamma = alg_mul(lam, alg_inv(alg_abs(lam)))
        if gamma.degree > GAMMA_DEGREE_LIMIT:
            raise DomainError("normalized eigenvalue degree exceeds 12")
        # re-anchor gamma on a freshly isolated root: the quotient above
        # carries bulky enclosure data that would inflate rep_size and with
        # it every size-based exponent downstream
        ball = gamma.refine(mpq(1, 2**96))
        for cand in poly_complex_roots(gamma.min_poly):
            if cand.refine(mpq(1, 2**96)).intersects(ball):
                gamma = cand
                break
        order = is_root_of_unity(gamma)
        return ComplexPair(lam, rho, gamma, order)
    # all real; expand distinct roots by multiplicity and find the largest
    # Jordan block via geometric multiplicities
    eigs = []
    max_block = 1
    for factor, mult in p.factor_with_multiplicity():
        for root in poly_real_roots(factor):
            eigs.extend([root] * mult)
            if mult > 1:
                # a repeated eigenvalue of a rational cubic is rational
                rho_q = root.as_rational()
                geo = 3 - M.sub_scalar(rho_q).rank()
                if geo < mult:
                    max_block = max(max_block, mult - geo + 1)
    eigs.sort(key=lambda r: r.refine(mpq(1, 2**40)).re)
    return ThreeReal(eigs, max_block)


# ---------------------------------------------------------------------------
# closed forms


class ComplexForm:
    """M^n s = a_i lam^n + conj(a_i) conj(lam)^n + c_i rho^n componentwise.

    When produced by closed_form the coefficients are also kept as exact
    elements of Q(lam, conj lam) (field, a_f, c_f, rho_f), which downstream
    symbolic processing uses for fast zero-testing and elimination.
    """

    __slots__ = ("lam", "rho", "a", "c", "field", "a_f", "c_f", "rho_f")

    def __init__(self, lam, rho, a, c, field=None, a_f=None, c_f=None, rho_f=None):
        self.lam = lam
        self.rho = rho
        self.a = list(a)
        self.c = list(c)
        self.field = field
        self.a_f = a_f
        self.c_f = c_f
        self.rho_f = rho_f

    n_valid = 0

    def evaluate(self, n: int):
        ln = alg_pow(self.lam, n)
        lcn = alg_conj(ln)
        rn = alg_pow(self.rho, n) if not (alg_is_zero(self.rho) and n > 0) else AlgebraicNumber.from_rational(0)
        if alg_is_zero(self.rho) and n == 0:
            rn = AlgebraicNumber.from_rational(1)
        out = []
        for i in range(3):
            v = alg_add(alg_mul(self.a[i], ln), alg_mul(alg_conj(self.a[i]), lcn))
            v = alg_add(v, alg_mul(self.c[i], rn))
            out.append(v)
        return out


class RealForm:
    """M^n s_i = sum over distinct eigenvalues rho of P_{rho,i}(n) rho^n.

    terms maps each distinct nonzero eigenvalue to a 3-row coefficient table:
    coeffs[i][j] is the algebraic coefficient of n^j in component i.  Valid
    for n >= n_valid; below that the nilpotent part of a singular matrix can
    still contribute and callers must use direct rational powering.
    """

    __slots__ = ("terms", "n_valid")

    def __init__(self, terms, n_valid):
        self.terms = list(terms)
        self.n_valid = n_valid

    def evaluate(self, n: int):
        if n < self.n_valid:
            raise InvalidInputError(f"closed form valid only for n >= {self.n_valid}")
        out = [AlgebraicNumber.from_rational(0) for _ in range(3)]
        for rho, coeffs in self.terms:
            rn = alg_pow(rho, n)
            for i in range(3):
                poly_val = AlgebraicNumber.from_rational(0)
                for j, cf in enumerate(coeffs[i]):
                    if alg_is_zero(cf):
                        continue
                    term = alg_mul(cf, AlgebraicNumber.from_rational(n**j))
                    poly_val = alg_add(poly_val, term)
                out[i] = alg_add(out[i], alg_mul(poly_val, rn))
        return out


def _solve_alg(A, b):
    """Gaussian elimination over algebraic numbers; A square, nonsingular."""
    n = len(A)
    m = [row[:] + [b[i]] for i, row in enumerate(A)]
    for col in range(n):
        piv = None
        for i in range(col, n):
            if not alg_is_zero(m[i][col]):
                piv = i
                break
        if piv is None:
            raise DomainError("singular coefficient system")
        m[col], m[piv] = m[piv], m[col]
        inv = alg_inv(m[col][col])
        m[col] = [alg_mul(x, inv) for x in m[col]]
        for i in range(n):
            if i == col or alg_is_zero(m[i][col]):
                continue
            f = m[i][col]
            m[i] = [alg_sub(m[i][k], alg_mul(f, m[col][k])) for k in range(n + 1)]
    return [m[i][n] for i in range(n)]


def closed_form(M: RationalMatrix3, s, cls):
    s = RationalMatrix3.pad_vector(s)
    if isinstance(cls, ComplexPair):
        return _closed_form_complex(M, s, cls)
    if isinstance(cls, ThreeReal):
        return _closed_form_real(M, s, cls)
    raise InvalidInputError("unknown classification")


def _orbit_prefix(M, s, count):
    out = [s]
    v = s
    for _ in range(count - 1):
        v = M.mat_vec(v)
        out.append(v)
    return out


def _solve_field(A, b):
    """Gaussian elimination over ConjField fractions; A square, nonsingular."""
    n = len(A)
    m = [row[:] + [b[i]] for i, row in enumerate(A)]
    for col in range(n):
        piv = None
        for i in range(col, n):
            if not m[i][col].is_zero:
                piv = i
                break
        if piv is None:
            raise DomainError("singular coefficient system")
        m[col], m[piv] = m[piv], m[col]
        inv = m[col][col].inv()
        m[col] = [x.mul(inv) for x in m[col]]
        for i in range(n):
            if i == col or m[i][col].is_zero:
                continue
            f = m[i][col]
            m[i] = [m[i][k].sub(f.mul(m[col][k])) for k in range(n + 1)]
    return [m[i][n] for i in range(n)]


def _closed_form_complex(M, s, cls):
    lam = cls.lam
    F = ConjField(lam.min_poly, lam, alg_conj(lam))
    p = char_poly(M)
    trace = -mpq(p.coeffs[2], p.coeffs[3])  # sum of all three eigenvalues
    x, y = F.lam(), F.lamc()
    rho_f = F.from_rational(trace).sub(x).sub(y)
    one = F.from_rational(1)
    basis = []
    for n in range(3):
        row = []
        for base in (x, y, rho_f):
            # 0^0 = 1 convention keeps the n = 0 row nonsingular
            row.append(base.pow(n) if n else one)
        basis.append(row)
    samples = _orbit_prefix(M, s, 3)
    a, c, a_f, c_f = [], [], [], []
    for i in range(3):
        rhs = [F.from_rational(samples[n][i]) for n in range(3)]
        ai, bi, ci = _solve_field(basis, rhs)
        if not bi.equals(ai.conj()):
            raise DomainError("conjugate-pair coefficient structure violated")
        if not ci.equals(ci.conj()):
            raise DomainError("real-eigenvalue coefficient must be real")
        a_f.append(ai)
        c_f.append(ci)
        a.append(ai.to_alg())
        c.append(ci.to_alg())
    return ComplexForm(lam, cls.rho, a, c, field=F, a_f=a_f, c_f=c_f, rho_f=rho_f)


def _closed_form_real(M, s, cls):
    p = char_poly(M)
    spectrum = []  # (root, multiplicity) over distinct roots
    zero_mult = 0
    for factor, mult in p.factor_with_multiplicity():
        for root in poly_real_roots(factor):
            if alg_is_zero(root):
                zero_mult = mult
            else:
                spectrum.append((root, mult))
    n_unknown = sum(mult for _, mult in spectrum)
    n_valid = zero_mult
    if n_unknown == 0:
        return RealForm([], n_valid)
    samples = _orbit_prefix(M, s, n_valid + n_unknown)
    rows = []
    for n in range(n_valid, n_valid + n_unknown):
        row = []
        for rho, mult in spectrum:
            rn = alg_pow(rho, n)
            for j in range(mult):
                row.append(alg_mul(AlgebraicNumber.from_rational(n**j), rn))
        rows.append(row)
    terms = [(rho, [[None] * mult for _ in range(3)]) for rho, mult in spectrum]
    for i in range(3):
        rhs = [
            AlgebraicNumber.from_rational(samples[n][i])
            for n in range(n_valid, n_valid + n_unknown)
        ]
        sol = _solve_alg([r[:] for r in rows], rhs)
        k = 0
        for t, (rho, mult) in enumerate(spectrum):
            for j in range(mult):
                terms[t][1][i][j] = sol[k]
                k += 1
    return RealForm(terms, n_valid)
