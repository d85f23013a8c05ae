"""Exact algebraic numbers in standard representation.

A value is stored as (min_poly, center, radius): an irreducible primitive
integer polynomial together with a rational complex disk containing exactly
one of its roots.  All arithmetic goes through resultants followed by
re-isolation, so results stay in standard form.  Sign and equality decisions
interleave disk refinement with exact degenerate tests and therefore always
terminate.
"""

from __future__ import annotations

import mpmath
from gmpy2 import mpq

from .errors import DomainError, InvalidInputError
from .intpoly import (
    IntPolynomial,
    NO_ROOT_PAIR,
    from_rational,
    mignotte_separation,
    resultant_add,
    resultant_mul,
    sqrt_ceil_prec,
    sqrt_ceil_q,
    sqrt_floor_prec,
    sqrt_floor_q,
)

import sympy

_X = sympy.Symbol("x")
_Y = sympy.Symbol("y")


# ---------------------------------------------------------------------------
# complex balls


class ComplexBall:
    """Rational complex disk; arithmetic is outward-rounded."""

    __slots__ = ("re", "im", "radius")

    def __init__(self, re, im, radius):
        self.re = mpq(re)
        self.im = mpq(im)
        self.radius = mpq(radius)
        if self.radius < 0:
            raise InvalidInputError("negative ball radius")

    def __repr__(self):
        return f"ComplexBall({self.re}, {self.im}, r={self.radius})"

    def contains_zero(self) -> bool:
        return self.re * self.re + self.im * self.im <= self.radius * self.radius

    def abs_upper(self):
        return sqrt_ceil_q(self.re * self.re + self.im * self.im) + self.radius

    def abs_lower(self):
        low = sqrt_floor_q(self.re * self.re + self.im * self.im) - self.radius
        return low if low > 0 else mpq(0)

    def add(self, other: "ComplexBall") -> "ComplexBall":
        return ComplexBall(self.re + other.re, self.im + other.im, self.radius + other.radius)

    def neg(self) -> "ComplexBall":
        return ComplexBall(-self.re, -self.im, self.radius)

    def conj(self) -> "ComplexBall":
        return ComplexBall(self.re, -self.im, self.radius)

    def mul(self, other: "ComplexBall") -> "ComplexBall":
        a, b = self, other
        cr = a.re * b.re - a.im * b.im
        ci = a.re * b.im + a.im * b.re
        ra = sqrt_ceil_q(a.re * a.re + a.im * a.im)
        rb = sqrt_ceil_q(b.re * b.re + b.im * b.im)
        return ComplexBall(cr, ci, ra * b.radius + rb * a.radius + a.radius * b.radius)

    def scale_q(self, s) -> "ComplexBall":
        s = mpq(s)
        return ComplexBall(self.re * s, self.im * s, self.radius * abs(s))

    def inv(self):
        """Outward-rounded reciprocal; returns None if 0 cannot be excluded."""
        low = self.abs_lower()
        if low <= self.radius or low == 0:
            return None
        n2 = self.re * self.re + self.im * self.im
        return ComplexBall(self.re / n2, -self.im / n2, self.radius / (low * (low - self.radius)))

    def intersects(self, other: "ComplexBall") -> bool:
        dr = self.re - other.re
        di = self.im - other.im
        s = self.radius + other.radius
        return dr * dr + di * di <= s * s

    def eval_int_poly(self, p: IntPolynomial) -> "ComplexBall":
        acc = ComplexBall(0, 0, 0)
        for c in reversed(p.coeffs):
            acc = acc.mul(self).add(ComplexBall(c, 0, 0))
        if p.is_zero:
            return ComplexBall(0, 0, 0)
        return acc


# ---------------------------------------------------------------------------
# helpers


def _mpf_to_mpq(x) -> "mpq":
    if not x:
        return mpq(0)
    p, q = mpmath.libmp.to_rational(x._mpf_)
    return mpq(p, q)


def _round_dyadic(x, bits: int):
    x = mpq(x)
    scaled = x * (1 << bits)
    n = scaled.numerator // scaled.denominator
    return mpq(n, 1 << bits)


def _mig_quarter(p: IntPolynomial):
    m = mignotte_separation(p)
    if m == NO_ROOT_PAIR:
        return mpq(1, 4)
    return m / 4


class AlgebraicNumber:
    """Algebraic number in standard representation.

    Immutable as a value; the isolating disk may be replaced by a smaller
    one as refinement results are cached, which never changes the value.
    """

    __slots__ = ("min_poly", "center", "radius", "_real", "_interval")

    def __init__(self, min_poly: IntPolynomial, center, radius, real: bool, interval=None):
        self.min_poly = min_poly
        self.center = (mpq(center[0]), mpq(center[1]))
        self.radius = mpq(radius)
        self._real = real
        # for real roots: (lo, hi) rational interval containing exactly this root
        self._interval = interval

    # -- construction ------------------------------------------------------

    @staticmethod
    def from_rational(r) -> "AlgebraicNumber":
        r = mpq(r)
        return AlgebraicNumber(from_rational(r), (r, mpq(0)), mpq(0), True, (r, r))

    @property
    def degree(self) -> int:
        return self.min_poly.degree()

    @property
    def is_rational(self) -> bool:
        return self.degree == 1

    def as_rational(self):
        if not self.is_rational:
            raise DomainError("not a rational number")
        c0, c1 = self.min_poly.coeffs
        return mpq(-c0, c1)

    def is_real(self) -> bool:
        return self._real

    def ball(self) -> ComplexBall:
        return ComplexBall(self.center[0], self.center[1], self.radius)

    def rep_size(self) -> int:
        """Bit length of the standard representation."""
        bits = self.min_poly.bitsize()
        for q in (self.center[0], self.center[1], self.radius):
            bits += max(1, int(q.numerator).bit_length()) + max(
                1, int(q.denominator).bit_length()
            )
        return bits

    def __repr__(self):
        c = self.ball()
        return f"AlgebraicNumber({self.min_poly}, ~({float(c.re):.6g}{float(c.im):+.6g}i))"

    # -- refinement --------------------------------------------------------

    def refine(self, eps) -> ComplexBall:
        """Disk containing this number with radius at most eps."""
        eps = mpq(eps)
        if eps <= 0:
            raise InvalidInputError("eps must be positive")
        if self.radius <= eps:
            return self.ball()
        if self._real:
            self._refine_real(eps)
        else:
            self._refine_complex(eps)
        return self.ball()

    def _set_box(self, re, im, radius, interval=None):
        object.__setattr__(self, "center", (mpq(re), mpq(im)))
        object.__setattr__(self, "radius", mpq(radius))
        if interval is not None:
            object.__setattr__(self, "_interval", interval)

    def _refine_real(self, eps):
        p = self.min_poly
        sq = p  # irreducible, hence squarefree
        lo, hi = self._interval
        if lo == hi:
            self._set_box(lo, 0, 0)
            return
        while hi - lo > eps:
            mid = (lo + hi) / 2
            if p.eval_q(mid) == 0:
                lo = hi = mid
                break
            if sq.count_real_roots(lo, mid) == 1:
                hi = mid
            else:
                lo = mid
        self._set_box((lo + hi) / 2, 0, (hi - lo) / 2, (lo, hi))

    def _refine_complex(self, eps):
        p = self.min_poly
        dp = p.derivative()
        d = p.degree()
        zre, zim = self.center[0], self.center[1]
        target_bits = _bits_for(eps) + 32
        for _ in range(64):
            pv_re, pv_im = p.eval_complex_q(zre, zim)
            dv_re, dv_im = dp.eval_complex_q(zre, zim)
            dn = dv_re * dv_re + dv_im * dv_im
            if dn == 0:
                break
            # Newton step z - p/p'
            sr = (pv_re * dv_re + pv_im * dv_im) / dn
            si = (pv_im * dv_re - pv_re * dv_im) / dn
            nre = _round_dyadic(zre - sr, target_bits)
            nim = _round_dyadic(zim - si, target_bits)
            rho = _inclusion_radius(p, dp, d, nre, nim)
            if rho is None:
                break
            # same-root guarantee: new disk must stay near the old one
            dr, di = nre - self.center[0], nim - self.center[1]
            if dr * dr + di * di > (self.radius + rho) * (self.radius + rho):
                break
            if rho <= eps:
                self._set_box(nre, nim, rho)
                return
            zre, zim = nre, nim
            target_bits *= 2
        # fallback: global re-isolation at higher precision
        for root in _isolate_complex_roots(p, min(eps, self.radius) / 4):
            if root.ball().intersects(self.ball()):
                self._set_box(root.center[0], root.center[1], root.radius)
                if root.radius > eps:
                    self._refine_complex(eps)
                return
        raise DomainError("refinement lost track of the isolated root")


def _bits_for(eps) -> int:
    eps = mpq(eps)
    if eps >= 1:
        return 8
    return int((int(eps.denominator) // max(1, int(eps.numerator))).bit_length()) + 8


def _inclusion_radius(p: IntPolynomial, dp: IntPolynomial, d: int, zre, zim):
    """Rational rho with a root of p within rho of z, or None at p'(z)=0."""
    pv_re, pv_im = p.eval_complex_q(zre, zim)
    dv_re, dv_im = dp.eval_complex_q(zre, zim)
    dn = dv_re * dv_re + dv_im * dv_im
    if dn == 0:
        return None
    num = pv_re * pv_re + pv_im * pv_im
    return sqrt_ceil_q(mpq(d * d) * num / dn)


# ---------------------------------------------------------------------------
# root isolation


def _isolate_real_roots_irreducible(p: IntPolynomial, target=None):
    """Real roots of an irreducible primitive polynomial."""
    if p.degree() == 1:
        c0, c1 = p.coeffs
        return [AlgebraicNumber.from_rational(mpq(-c0, c1))]
    tau = _mig_quarter(p) / 2
    if target is not None:
        tau = min(tau, mpq(target))
    bound = p.cauchy_root_bound()
    stack = [(-bound, bound)]
    roots = []
    while stack:
        lo, hi = stack.pop()
        n = p.count_real_roots(lo, hi)
        if n == 0:
            continue
        if n == 1 and hi - lo <= 2 * tau:
            roots.append(
                AlgebraicNumber(p, ((lo + hi) / 2, mpq(0)), (hi - lo) / 2, True, (lo, hi))
            )
            continue
        mid = (lo + hi) / 2
        # irreducible with degree >= 2 has no rational roots, so p(mid) != 0
        stack.append((lo, mid))
        stack.append((mid, hi))
    roots.sort(key=lambda r: r.center[0])
    return roots


def _isolate_complex_roots(p: IntPolynomial, target=None):
    """All roots (real and complex) of an irreducible primitive polynomial."""
    d = p.degree()
    if d == 1:
        c0, c1 = p.coeffs
        return [AlgebraicNumber.from_rational(mpq(-c0, c1))]
    tau = _mig_quarter(p) / 2
    if target is not None:
        tau = min(tau, mpq(target))
    dp = p.derivative()
    bits = max(64, 2 * _bits_for(tau))
    for _attempt in range(12):
        with mpmath.workprec(bits):
            try:
                approx = mpmath.polyroots(
                    [mpmath.mpf(c) for c in reversed(p.coeffs)],
                    maxsteps=200,
                    extraprec=bits,
                )
            except mpmath.libmp.NoConvergence:
                bits *= 2
                continue
            cand = []
            ok = True
            for z in approx:
                zre = _round_dyadic(_mpf_to_mpq(mpmath.mpf(z.real)), bits)
                zim = _round_dyadic(_mpf_to_mpq(mpmath.mpf(z.imag)), bits)
                zre, zim, rho = _polish(p, dp, d, zre, zim, tau, bits)
                if rho is None or rho > tau:
                    ok = False
                    break
                cand.append((zre, zim, rho))
        if ok and len(cand) == d and _pairwise_disjoint(cand):
            roots = []
            for zre, zim, rho in cand:
                real = _disk_is_real(cand, zre, zim, rho)
                interval = (zre - rho, zre + rho) if real else None
                if real:
                    zim = mpq(0)
                roots.append(AlgebraicNumber(p, (zre, zim), rho, real, interval))
            return roots
        bits *= 2
    raise DomainError(f"failed to isolate roots of {p}")


def _polish(p, dp, d, zre, zim, tau, bits):
    best = None
    for _ in range(40):
        rho = _inclusion_radius(p, dp, d, zre, zim)
        if rho is None:
            return zre, zim, best
        best = rho
        if rho <= tau:
            return zre, zim, rho
        pv_re, pv_im = p.eval_complex_q(zre, zim)
        dv_re, dv_im = dp.eval_complex_q(zre, zim)
        dn = dv_re * dv_re + dv_im * dv_im
        sr = (pv_re * dv_re + pv_im * dv_im) / dn
        si = (pv_im * dv_re - pv_re * dv_im) / dn
        zre = _round_dyadic(zre - sr, bits)
        zim = _round_dyadic(zim - si, bits)
    return zre, zim, best


def _pairwise_disjoint(cand) -> bool:
    for i in range(len(cand)):
        for j in range(i + 1, len(cand)):
            dr = cand[i][0] - cand[j][0]
            di = cand[i][1] - cand[j][1]
            s = cand[i][2] + cand[j][2]
            if dr * dr + di * di <= s * s:
                return False
    return True


def _disk_is_real(cand, zre, zim, rho):
    """The root in this disk is real iff its conjugate disk is itself.

    Roots come in conjugate pairs; the disk of the conjugate root is the
    mirrored disk.  If the mirrored disk meets no *other* disk, conjugation
    maps this root to itself.
    """
    if abs(zim) > rho:
        return False
    # mirrored disk coincides with a disk in the list; if it is this one,
    # the root is self-conjugate
    for ore, oim, orho in cand:
        if ore == zre and oim == zim and orho == rho:
            continue
        dr, di = ore - zre, oim + zim
        if dr * dr + di * di <= (orho + rho) * (orho + rho):
            return False
    return True


# ---------------------------------------------------------------------------
# public root isolation


def poly_real_roots(p: IntPolynomial):
    """Distinct real roots of p with pairwise disjoint isolating boxes."""
    if p.is_zero:
        raise InvalidInputError("zero polynomial has no root representation")
    sq = p.squarefree_part()
    tau = _mig_quarter(sq) / 2
    roots = []
    for f in sq.factor_irreducible():
        roots.extend(_isolate_real_roots_irreducible(f, tau))
    _separate(roots)
    roots.sort(key=lambda r: r.center[0])
    return roots


def poly_complex_roots(p: IntPolynomial):
    """Distinct complex roots of p, each counted once."""
    if p.is_zero:
        raise InvalidInputError("zero polynomial has no root representation")
    sq = p.squarefree_part()
    tau = _mig_quarter(sq) / 2
    roots = []
    for f in sq.factor_irreducible():
        roots.extend(_isolate_complex_roots(f, tau))
    _separate(roots)
    return roots


def _separate(roots):
    """Refine until all isolating disks are pairwise disjoint."""
    changed = True
    guard = 0
    while changed:
        changed = False
        guard += 1
        if guard > 200:
            raise DomainError("failed to separate root boxes")
        for i in range(len(roots)):
            for j in range(i + 1, len(roots)):
                a, b = roots[i], roots[j]
                if a.ball().intersects(b.ball()):
                    if a.min_poly == b.min_poly and alg_equal(a, b):
                        raise DomainError("duplicate root in isolation output")
                    a.refine(a.radius / 4 if a.radius > 0 else mpq(1))
                    b.refine(b.radius / 4 if b.radius > 0 else mpq(1))
                    changed = True


# ---------------------------------------------------------------------------
# candidate selection for arithmetic results


def _select_root(rpoly: IntPolynomial, box_fn) -> AlgebraicNumber:
    """Pick the root of rpoly designated by a shrinking enclosure.

    box_fn(eps) must return a ComplexBall containing the true value, with
    radius tending to 0 as eps does.
    """
    if rpoly.is_zero:
        raise InvalidInputError("zero annihilator")
    sq = rpoly.squarefree_part()
    cands = []
    for f in sq.factor_irreducible():
        cands.extend(_isolate_complex_roots(f))
    eps = mpq(1, 256)
    for _ in range(300):
        box = box_fn(eps)
        viable = []
        for c in cands:
            c.refine(eps)
            if c.ball().intersects(box):
                viable.append(c)
        if len(viable) == 1:
            return viable[0]
        if not viable:
            raise DomainError("enclosure matched no candidate root")
        cands = viable
        eps /= 64
    raise DomainError("candidate selection did not converge")


# ---------------------------------------------------------------------------
# arithmetic


def alg_add(a: AlgebraicNumber, b: AlgebraicNumber) -> AlgebraicNumber:
    if a.is_rational and b.is_rational:
        return AlgebraicNumber.from_rational(a.as_rational() + b.as_rational())
    if a.is_rational:
        a, b = b, a
    if b.is_rational:
        return _translate(a, b.as_rational())
    rpoly = resultant_add(a.min_poly, b.min_poly)
    return _select_root(rpoly, lambda eps: a.refine(eps).add(b.refine(eps)))


def _translate(a: AlgebraicNumber, r) -> AlgebraicNumber:
    """a + r for rational r, by substituting x - r into the minimal polynomial."""
    r = mpq(r)
    if r == 0:
        return a
    y = sympy.Symbol("y")
    num, den = int(r.numerator), int(r.denominator)
    expr = sum(
        c * (den * _X - num) ** i * den ** (a.degree - i)
        for i, c in enumerate(a.min_poly.coeffs)
    )
    p = IntPolynomial.from_sympy(sympy.Poly(sympy.expand(expr), _X)).primitive()
    interval = None
    if a._real and a._interval is not None:
        interval = (a._interval[0] + r, a._interval[1] + r)
    out = AlgebraicNumber(p, (a.center[0] + r, a.center[1]), a.radius, a._real, interval)
    cap = _mig_quarter(p)
    if out.radius > cap:
        out.refine(cap)
    return out


def alg_neg(a: AlgebraicNumber) -> AlgebraicNumber:
    if a.is_rational:
        return AlgebraicNumber.from_rational(-a.as_rational())
    interval = None
    if a._real and a._interval is not None:
        interval = (-a._interval[1], -a._interval[0])
    return AlgebraicNumber(
        a.min_poly.negate_input().primitive(),
        (-a.center[0], -a.center[1]),
        a.radius,
        a._real,
        interval,
    )


def alg_sub(a: AlgebraicNumber, b: AlgebraicNumber) -> AlgebraicNumber:
    return alg_add(a, alg_neg(b))


def alg_mul(a: AlgebraicNumber, b: AlgebraicNumber) -> AlgebraicNumber:
    if a.is_rational and b.is_rational:
        return AlgebraicNumber.from_rational(a.as_rational() * b.as_rational())
    if a.is_rational:
        a, b = b, a
    if b.is_rational:
        r = b.as_rational()
        if r == 0:
            return AlgebraicNumber.from_rational(0)
        return _scale(a, r)
    rpoly = resultant_mul(a.min_poly, b.min_poly)
    return _select_root(rpoly, lambda eps: a.refine(eps).mul(b.refine(eps)))


def _scale(a: AlgebraicNumber, r) -> AlgebraicNumber:
    r = mpq(r)
    p = a.min_poly.scale_roots(r)
    interval = None
    if a._real and a._interval is not None:
        lo, hi = a._interval[0] * r, a._interval[1] * r
        interval = (lo, hi) if lo <= hi else (hi, lo)
    out = AlgebraicNumber(
        p, (a.center[0] * r, a.center[1] * r), a.radius * abs(r), a._real, interval
    )
    cap = _mig_quarter(p)
    if out.radius > cap:
        out.refine(cap)
    return out


def alg_inv(a: AlgebraicNumber) -> AlgebraicNumber:
    if a.is_rational:
        r = a.as_rational()
        if r == 0:
            raise DomainError("inversion of zero")
        return AlgebraicNumber.from_rational(1 / r)
    p = a.min_poly.reverse().primitive()

    def box_fn(eps):
        e = eps
        for _ in range(200):
            ball = a.refine(e).inv()
            if ball is not None and ball.radius <= eps:
                return ball
            e /= 16
        raise DomainError("failed to enclose reciprocal")

    return _select_root(p, box_fn)


def alg_conj(a: AlgebraicNumber) -> AlgebraicNumber:
    if a._real:
        return a
    return AlgebraicNumber(a.min_poly, (a.center[0], -a.center[1]), a.radius, False)


def alg_re(a: AlgebraicNumber) -> AlgebraicNumber:
    if a._real:
        return a
    twice = alg_add(a, alg_conj(a))
    return _scale(twice, mpq(1, 2)) if not twice.is_rational else AlgebraicNumber.from_rational(
        twice.as_rational() / 2
    )


_I_POLY = IntPolynomial([1, 0, 1])
IMAGINARY_UNIT = AlgebraicNumber(_I_POLY, (mpq(0), mpq(1)), mpq(0), False)
MINUS_I = AlgebraicNumber(_I_POLY, (mpq(0), mpq(-1)), mpq(0), False)


def alg_im(a: AlgebraicNumber) -> AlgebraicNumber:
    if a._real:
        return AlgebraicNumber.from_rational(0)
    diff = alg_sub(a, alg_conj(a))  # 2i * Im(a)
    if diff.is_rational:  # only possible when Im(a) = 0
        return AlgebraicNumber.from_rational(0)
    twice = alg_mul(diff, MINUS_I)  # 2 * Im(a), real
    if twice.is_rational:
        return AlgebraicNumber.from_rational(twice.as_rational() / 2)
    return _scale(twice, mpq(1, 2))


def alg_sqrt_nonneg(a: AlgebraicNumber) -> AlgebraicNumber:
    """Square root of a real algebraic number that is >= 0."""
    if not a._real:
        raise DomainError("square root defined here for nonnegative reals only")
    if a.is_rational:
        r = a.as_rational()
        if r < 0:
            raise DomainError("negative operand")
        s = sqrt_floor_q(r)
        if s * s == r:
            return AlgebraicNumber.from_rational(s)
    rpoly = a.min_poly.compose_square()

    def box_fn(eps):
        e = min(eps, mpq(1, 16)) ** 2
        bits = _bits_for(eps) + 8
        for _ in range(200):
            ball = a.refine(e)
            lo = ball.re - ball.radius
            hi = ball.re + ball.radius
            if lo < 0:
                lo = mpq(0)
            slo = sqrt_floor_prec(lo, bits)
            shi = sqrt_ceil_prec(hi, bits)
            if (shi - slo) / 2 <= eps:
                return ComplexBall((slo + shi) / 2, 0, (shi - slo) / 2)
            e /= 256
            bits *= 2
        raise DomainError("failed to enclose square root")

    return _select_root(rpoly, box_fn)


def alg_abs(a: AlgebraicNumber) -> AlgebraicNumber:
    if a._real:
        return a if alg_sign(a) >= 0 else alg_neg(a)
    norm = alg_mul(a, alg_conj(a))
    return alg_sqrt_nonneg(norm)


def alg_sign(a: AlgebraicNumber) -> int:
    """Exact sign of a real algebraic number."""
    if not a._real:
        raise DomainError("sign of a non-real number")
    if a.is_rational:
        r = a.as_rational()
        return 0 if r == 0 else (1 if r > 0 else -1)
    # irreducible of degree >= 2: nonzero constant term, so the value is nonzero
    eps = min(a.radius, mpq(1, 16))
    for _ in range(10000):
        ball = a.refine(eps)
        if ball.re - ball.radius > 0:
            return 1
        if ball.re + ball.radius < 0:
            return -1
        eps /= 256
    raise DomainError("sign refinement did not terminate")


def alg_equal(a: AlgebraicNumber, b: AlgebraicNumber) -> bool:
    if a is b:
        return True
    if a.min_poly != b.min_poly:
        return False
    if a.is_rational:
        return True  # same degree-1 minimal polynomial: same value
    sep4 = _mig_quarter(a.min_poly)
    ba = a.refine(sep4 / 2)
    bb = b.refine(sep4 / 2)
    dr, di = ba.re - bb.re, ba.im - bb.im
    # distinct roots of the same irreducible polynomial are > 4*sep4 apart
    return dr * dr + di * di < (2 * sep4) * (2 * sep4)


def alg_is_zero(a: AlgebraicNumber) -> bool:
    return a.is_rational and a.as_rational() == 0


# ---------------------------------------------------------------------------
# number-field powering


def field_pow_mod(min_poly: IntPolynomial, e: int):
    """x^e reduced mod min_poly; rational coefficient list (index = degree)."""
    m = [mpq(c) for c in min_poly.coeffs]
    d = len(m) - 1
    lead = m[-1]

    def reduce(v):
        while len(v) > d:
            top = v.pop()
            if top == 0:
                continue
            s = top / lead
            k = len(v) - d
            for i in range(d):
                v[k + i] -= s * m[i]
        while v and v[-1] == 0:
            v.pop()
        return v

    def mul(u, v):
        out = [mpq(0)] * (len(u) + len(v) - 1)
        for i, x in enumerate(u):
            if x == 0:
                continue
            for j, y in enumerate(v):
                out[i + j] += x * y
        return reduce(out)

    result = [mpq(1)]
    base = reduce([mpq(0), mpq(1)])
    k = e
    while k:
        if k & 1:
            result = mul(result, base)
        k >>= 1
        if k:
            base = mul(base, base)
    return result


def from_field_element(alpha: AlgebraicNumber, qcoeffs) -> AlgebraicNumber:
    """Standard representation of q(alpha) for rational coefficients q."""
    qcoeffs = [mpq(c) for c in qcoeffs]
    while qcoeffs and qcoeffs[-1] == 0:
        qcoeffs.pop()
    if not qcoeffs:
        return AlgebraicNumber.from_rational(0)
    if len(qcoeffs) == 1:
        return AlgebraicNumber.from_rational(qcoeffs[0])
    if alpha.is_rational:
        acc = mpq(0)
        r = alpha.as_rational()
        for c in reversed(qcoeffs):
            acc = acc * r + c
        return AlgebraicNumber.from_rational(acc)
    den = 1
    for c in qcoeffs:
        den = den * int(c.denominator) // __import__("math").gcd(den, int(c.denominator))
    ints = [int(c * den) for c in qcoeffs]
    py = sympy.Poly(list(reversed(alpha.min_poly.coeffs)), _Y).as_expr()
    qy = sum(c * _Y**i for i, c in enumerate(ints))
    r = sympy.resultant(py, den * _X - qy, _Y)
    rpoly = IntPolynomial.from_sympy(sympy.Poly(r, _X)).primitive()

    def box_fn(eps):
        e = eps / max(1, len(qcoeffs))
        for _ in range(200):
            ball = alpha.refine(e)
            acc = ComplexBall(0, 0, 0)
            for c in reversed(qcoeffs):
                acc = acc.mul(ball).add(ComplexBall(c, 0, 0))
            if acc.radius <= eps:
                return acc
            e /= 64
        raise DomainError("failed to enclose field element")

    return _select_root(rpoly, box_fn)


def alg_pow(a: AlgebraicNumber, e: int) -> AlgebraicNumber:
    if e == 0:
        return AlgebraicNumber.from_rational(1)
    if e < 0:
        return alg_pow(alg_inv(a), -e)
    if a.is_rational:
        return AlgebraicNumber.from_rational(a.as_rational() ** e)
    return from_field_element(a, field_pow_mod(a.min_poly, e))


# ---------------------------------------------------------------------------
# roots of unity and gap bounds

ROU_ORDER_LIMIT = 144  # degree <= 12 forces the order of a root of unity <= 144


def is_root_of_unity(g: AlgebraicNumber):
    """Smallest order d <= 144 with g^d = 1, or None.

    Requires |g| = 1 exactly.
    """
    if g.is_rational:
        r = g.as_rational()
        if abs(r) != 1:
            raise DomainError("|g| must be 1")
        return 1 if r == 1 else 2
    norm = alg_mul(g, alg_conj(g))
    if not (norm.is_rational and norm.as_rational() == 1):
        raise DomainError("|g| must be 1")
    one = [mpq(1)]
    for d in range(1, ROU_ORDER_LIMIT + 1):
        if field_pow_mod(g.min_poly, d) == one:
            return d
    return None


def baker_gap(alpha: AlgebraicNumber, beta: AlgebraicNumber, n: int, C: int):
    """Exact rational 1 / n^((|alpha| + |beta|)^C) from Baker's theorem shape.

    Valid as a lower bound on |alpha^n - beta| only relative to the
    configured constant C.
    """
    if n < 2:
        raise InvalidInputError("n must be at least 2")
    e = (alpha.rep_size() + beta.rep_size()) ** C
    return mpq(1, n**e)
