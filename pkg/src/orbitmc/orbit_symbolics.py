"""Exponential-sum analysis of p(M^n s) along a matrix orbit.

Starting from a closed form of the orbit, a predicate polynomial is expanded
monomial by monomial into a sum of terms alpha * lam^(n p1) * conj(lam)^(n p2)
* rho^(n p3).  Dividing by the maximal term modulus Lambda splits the sum
into a dominant trigonometric polynomial f evaluated at powers of the
rotation gamma = lam/|lam| plus a geometrically decaying residual.  The sign
of p(M^n s) for large n is then read off from which arc of the unit circle
(delimited by the zeros of f) the point gamma^n falls into.

All coefficient arithmetic in the complex regime is exact in the field
Q(lam, conj lam); conversions to ball or standard algebraic form happen only
at decision points.
"""

from __future__ import annotations

import math

import mpmath
import sympy
from gmpy2 import mpq

from .errors import (
    DomainError,
    InconclusiveError,
    InvalidInputError,
    WrongRegimeError,
)
from .intpoly import IntPolynomial
from .algebraic import (
    AlgebraicNumber,
    ComplexBall,
    alg_add,
    alg_conj,
    alg_equal,
    alg_inv,
    alg_is_zero,
    alg_mul,
    alg_neg,
    alg_pow,
    alg_sign,
    alg_sqrt_nonneg,
    alg_sub,
    poly_complex_roots,
)
from .cfield import ConjField, FieldFrac, _X as _FX, _Y as _FY
from .predicates import AtomicPredicate
from .spectral import ComplexForm, ComplexPair, RationalMatrix3, RealForm
from .torus import (
    Arc,
    TorusPoint,
    TorusSet,
    _angle_enclosure,
    _dyadic_iv,
    _pi_bounds,
    _sort_circular,
)

_Z = sympy.Symbol("z")


# ---------------------------------------------------------------------------
# small helpers: multinomials and polynomials in n over algebraic numbers


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _multinomial(ks):
    out = math.factorial(sum(ks))
    for k in ks:
        out //= math.factorial(k)
    return out


_ZERO = AlgebraicNumber.from_rational(0)


def _np_trim(p):
    while p and alg_is_zero(p[-1]):
        p.pop()
    return p


def _np_add(a, b):
    out = []
    for i in range(max(len(a), len(b))):
        x = a[i] if i < len(a) else _ZERO
        y = b[i] if i < len(b) else _ZERO
        out.append(alg_add(x, y))
    return _np_trim(out)


def _np_mul(a, b):
    if not a or not b:
        return []
    out = [_ZERO] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if alg_is_zero(x):
            continue
        for j, y in enumerate(b):
            out[i + j] = alg_add(out[i + j], alg_mul(x, y))
    return _np_trim(out)


def _np_scale(a, q):
    f = AlgebraicNumber.from_rational(q)
    return _np_trim([alg_mul(x, f) for x in a])


def _np_eval(a, n):
    acc = _ZERO
    for c in reversed(a):
        acc = alg_add(alg_mul(acc, AlgebraicNumber.from_rational(n)), c)
    return acc


# ---------------------------------------------------------------------------
# exponential sums


class ExponentialSum:
    """p(M^n s) as a finite sum of exponential terms.

    Complex regime: terms_f maps (p1, p2, p3) to a coefficient in
    Q(lam, conj lam); the value of the sum at n is
    sum alpha * lam^(n p1) conj(lam)^(n p2) rho^(n p3).

    Real regime: terms maps exponent tuples over the distinct nonzero real
    eigenvalues (padded to length 3) to polynomial-in-n coefficient lists.
    """

    def __init__(self, kind, n_valid=0, field=None, terms_f=None, lam=None, rho=None,
                 rho_f=None, terms=None, eigs=None):
        self.kind = kind
        self.n_valid = n_valid
        self.field = field
        self.terms_f = terms_f
        self.lam = lam
        self.rho = rho
        self.rho_f = rho_f
        self._terms = terms
        self.eigs = eigs

    @property
    def terms(self):
        """Coefficient map with AlgebraicNumber (complex) or polynomial
        coefficient lists (real) as values."""
        if self._terms is None:
            self._terms = {k: v.to_alg() for k, v in self.terms_f.items()}
        return self._terms

    def evaluate(self, n: int) -> AlgebraicNumber:
        if n < self.n_valid:
            raise InvalidInputError(f"sum valid only for n >= {self.n_valid}")
        if self.kind == "complex":
            F = self.field
            acc = F.from_rational(0)
            x, y = F.lam(), F.lamc()
            for (p1, p2, p3), alpha in self.terms_f.items():
                t = alpha
                if n * p1:
                    t = t.mul(x.pow(n * p1))
                if n * p2:
                    t = t.mul(y.pow(n * p2))
                if n * p3:
                    t = t.mul(self.rho_f.pow(n * p3))
                acc = acc.add(t)
            return acc.to_alg()
        acc = _ZERO
        for key, poly in self._terms.items():
            t = _np_eval(poly, n)
            for e, rho in zip(key, self.eigs):
                if e:
                    t = alg_mul(t, alg_pow(rho, n * e))
            acc = alg_add(acc, t)
        return acc


def aggregate(pred: AtomicPredicate, orbit) -> ExponentialSum:
    """Expand p(M^n s) into exponential terms by multinomial expansion."""
    if isinstance(orbit, ComplexForm):
        return _aggregate_complex(pred, orbit)
    if isinstance(orbit, RealForm):
        return _aggregate_real(pred, orbit)
    raise InvalidInputError("unsupported closed form")


def _aggregate_complex(pred, orbit):
    if orbit.field is None:
        raise InvalidInputError("closed form lacks exact field coefficients")
    F = orbit.field
    total = {}
    for (e1, e2, e3), c in pred.poly.coeffs.items():
        mono = {(0, 0, 0): F.from_rational(c)}
        for i, e in enumerate((e1, e2, e3)):
            if e == 0:
                continue
            ai = orbit.a_f[i]
            aci = ai.conj()
            ci = orbit.c_f[i]
            parts = {}
            for j1, j2, j3 in _compositions(e, 3):
                v = F.from_rational(_multinomial((j1, j2, j3)))
                if j1:
                    v = v.mul(ai.pow(j1))
                if j2:
                    v = v.mul(aci.pow(j2))
                if j3:
                    v = v.mul(ci.pow(j3))
                if not v.is_zero:
                    parts[(j1, j2, j3)] = v
            mono = _convolve(mono, parts)
        for key, v in mono.items():
            if key in total:
                total[key] = total[key].add(v)
            else:
                total[key] = v
    total = {k: v for k, v in total.items() if not v.is_zero}
    return ExponentialSum(
        "complex",
        field=F,
        terms_f=total,
        lam=orbit.lam,
        rho=orbit.rho,
        rho_f=orbit.rho_f,
    )


def _convolve(a, b):
    out = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            key = tuple(x + y for x, y in zip(ka, kb))
            v = va.mul(vb)
            if key in out:
                out[key] = out[key].add(v)
            else:
                out[key] = v
    return {k: v for k, v in out.items() if not v.is_zero}


def _aggregate_real(pred, orbit):
    eigs = [rho for rho, _ in orbit.terms]
    t = len(eigs)
    # componentwise closed form as exponent-keyed polynomial coefficients
    comps = []
    for i in range(3):
        comp = {}
        for idx, (rho, coeffs) in enumerate(orbit.terms):
            poly = _np_trim(list(coeffs[i]))
            if poly:
                key = tuple(1 if j == idx else 0 for j in range(t))
                comp[key] = poly
        comps.append(comp)
    total = {}
    for (e1, e2, e3), c in pred.poly.coeffs.items():
        mono = {(0,) * t: [AlgebraicNumber.from_rational(c)]}
        for i, e in enumerate((e1, e2, e3)):
            if e == 0:
                continue
            base = comps[i]
            prod = {(0,) * t: [AlgebraicNumber.from_rational(1)]}
            for _ in range(e):
                prod = _convolve_np(prod, base)
            mono = _convolve_np(mono, prod)
            if not mono:
                break
        for key, poly in mono.items():
            total[key] = _np_add(total.get(key, []), poly)
    total = {k: v for k, v in total.items() if v}
    padded = {k + (0,) * (3 - t): v for k, v in total.items()}
    return ExponentialSum("real", n_valid=orbit.n_valid, terms=padded, eigs=eigs)


def _convolve_np(a, b):
    out = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            key = tuple(x + y for x, y in zip(ka, kb))
            v = _np_mul(va, vb)
            if not v:
                continue
            out[key] = _np_add(out.get(key, []), v)
    return {k: v for k, v in out.items() if v}


def all_zero(es: ExponentialSum) -> bool:
    """True iff every coefficient is exactly zero, so p(M^n s) = 0 for all
    n >= n_valid and the atom collapses to a constant."""
    if es.kind == "complex":
        return not es.terms_f
    return not es._terms


# ---------------------------------------------------------------------------
# normalization by the dominant modulus


class NormalizedExpression:
    """e(n) = sum_m beta_m gamma^(n m) + conj + r(n) with |mu_l| < 1."""

    def __init__(self, betas_f, gamma, rou_order, residual, Lambda, Lambda_sq,
                 field, n_valid=0):
        self.betas_f = betas_f
        self.gamma = gamma
        self.rou_order = rou_order
        self.residual = residual
        self.Lambda = Lambda
        self.Lambda_sq = Lambda_sq
        self.field = field
        self.n_valid = n_valid
        self._betas = None

    @property
    def betas(self):
        if self._betas is None:
            self._betas = [b.to_alg() for b in self.betas_f]
        return self._betas

    @property
    def k(self):
        return len(self.betas_f) - 1

    def rep_size(self) -> int:
        total = self.gamma.rep_size()
        for b in self.betas:
            total += b.rep_size()
        for chi, mu in self.residual:
            total += chi.rep_size() + mu.rep_size()
        return total

    def evaluate(self, n: int) -> AlgebraicNumber:
        """f(gamma^n) + r(n), exact."""
        acc = _ZERO
        for m, b in enumerate(self.betas):
            if alg_is_zero(b):
                continue
            t = alg_mul(b, alg_pow(self.gamma, n * m)) if m else b
            acc = alg_add(acc, alg_add(t, alg_conj(t)))
        for chi, mu in self.residual:
            t = alg_mul(chi, alg_pow(mu, n))
            acc = alg_add(acc, alg_add(t, alg_conj(t)))
        return acc


def normalize(es: ExponentialSum, cls) -> NormalizedExpression:
    if not isinstance(cls, ComplexPair) or es.kind != "complex":
        raise WrongRegimeError("normalization applies to the complex-pair regime")
    if not es.terms_f:
        raise InvalidInputError("all coefficients are zero")
    F = es.field
    norm_lam = F.lam().mul(F.lamc())  # |lam|^2
    rho_sq = es.rho_f.mul(es.rho_f)
    rho_zero = es.rho_f.is_zero
    rho_negative = (not rho_zero) and alg_sign(es.rho) < 0

    work = dict(es.terms_f)
    n_valid = es.n_valid
    if rho_zero:
        dropped = [k for k in work if k[2] > 0]
        if dropped:
            # rho^(n p3) vanishes for every n >= 1
            for k in dropped:
                del work[k]
            n_valid = max(n_valid, 1)
        if not work:
            raise InvalidInputError("expression vanishes for all n >= 1")

    # conjugate symmetry: the sum is real for every n
    for (p1, p2, p3), alpha in work.items():
        mirror = work.get((p2, p1, p3))
        if mirror is None or not mirror.equals(alpha.conj()):
            raise DomainError("coefficient map is not conjugate-symmetric")

    msq_cache = {}

    def msq_alg(key):
        p1, p2, p3 = key
        ck = (p1 + p2, p3)
        if ck not in msq_cache:
            v = norm_lam.pow(p1 + p2)
            if p3:
                v = v.mul(rho_sq.pow(p3))
            msq_cache[ck] = v.to_alg()
        return msq_cache[ck]

    entries = [(key, alpha, msq_alg(key)) for key, alpha in work.items()]

    while True:
        top = entries[0][2]
        for _, _, m in entries[1:]:
            if alg_sign(alg_sub(m, top)) > 0:
                top = m
        dominant = [e for e in entries if alg_equal(e[2], top)]
        rest = [e for e in entries if not alg_equal(e[2], top)]
        k = max(key[0] - key[1] for key, _, _ in dominant)
        betas_f = [F.from_rational(0)] * (k + 1)
        for key, alpha, _ in dominant:
            m = key[0] - key[1]
            if m > 0:
                betas_f[m] = betas_f[m].add(alpha)
            elif m == 0:
                betas_f[0] = betas_f[0].add(alpha.scale(mpq(1, 2)))
        if any(not b.is_zero for b in betas_f):
            break
        # the dominant part cancels identically; it contributes zero for
        # every n, so it can be removed and the next scale takes over
        if not rest:
            raise DomainError("expression cancels identically at every scale")
        entries = rest

    if rho_negative and any(key[2] % 2 for key, _, _ in dominant):
        raise DomainError(
            "dominant terms carry an alternating sign from a negative real "
            "eigenvalue; this parity-mixed case is not supported"
        )
    if not betas_f[0].equals(betas_f[0].conj()):
        raise DomainError("constant dominant coefficient must be real")

    Lambda_sq = top
    Lambda = alg_sqrt_nonneg(Lambda_sq)
    lam_inv = alg_inv(Lambda)

    residual = []
    for (p1, p2, p3), alpha, msq in [(e[0], e[1], e[2]) for e in rest]:
        if p1 < p2:
            continue  # conjugate partner of a listed term
        term = F.lam().pow(p1).mul(F.lamc().pow(p2))
        if p3:
            term = term.mul(es.rho_f.pow(p3))
        mu = alg_mul(term.to_alg(), lam_inv)
        chi = alpha.scale(mpq(1, 2)).to_alg() if p1 == p2 else alpha.to_alg()
        residual.append((chi, mu))

    return NormalizedExpression(
        betas_f, cls.gamma, cls.rou_order, residual, Lambda, Lambda_sq, F,
        n_valid=n_valid,
    )


# ---------------------------------------------------------------------------
# dominant function and its zeros on the unit circle


class DominantFunction:
    """f(z) = sum_m beta_m z^m + conj(beta_m) conj(z)^m, real on |z| = 1."""

    def __init__(self, betas_f, field):
        while len(betas_f) > 1 and betas_f[-1].is_zero:
            betas_f = betas_f[:-1]
        self.betas_f = betas_f
        self.field = field
        self._betas = None

    @staticmethod
    def of(ne: NormalizedExpression) -> "DominantFunction":
        return DominantFunction(list(ne.betas_f), ne.field)

    @property
    def betas(self):
        if self._betas is None:
            self._betas = [b.to_alg() for b in self.betas_f]
        return self._betas

    @property
    def k(self):
        return len(self.betas_f) - 1

    @property
    def is_zero(self):
        return all(b.is_zero for b in self.betas_f)

    def g_coeffs(self):
        """Coefficients of g(z) = z^k f(z), a polynomial of degree 2k over
        Q(lam, conj lam)."""
        k = self.k
        F = self.field
        coeffs = [F.from_rational(0)] * (2 * k + 1)
        for m, b in enumerate(self.betas_f):
            if b.is_zero:
                continue
            coeffs[k + m] = coeffs[k + m].add(b)
            coeffs[k - m] = coeffs[k - m].add(b.conj())
        return coeffs

    def eval_alg(self, z: AlgebraicNumber) -> AlgebraicNumber:
        acc = _ZERO
        for m, b in enumerate(self.betas):
            if alg_is_zero(b):
                continue
            t = alg_mul(b, alg_pow(z, m)) if m else b
            acc = alg_add(acc, alg_add(t, alg_conj(t)))
        return acc

    def eval_ball(self, zball: ComplexBall, eps) -> ComplexBall:
        acc = ComplexBall(0, 0, 0)
        zp = ComplexBall(1, 0, 0)
        for m, b in enumerate(self.betas_f):
            if m:
                zp = zp.mul(zball)
            if b.is_zero:
                continue
            t = _frac_ball(b, eps).mul(zp)
            acc = acc.add(t).add(t.conj())
        return acc


def _frac_ball(frac: FieldFrac, eps) -> ComplexBall:
    """Outward enclosure of a field element's complex value."""
    F = frac.field
    num_terms = _poly_terms(frac.num)
    den_terms = None if frac.den == 1 else _poly_terms(frac.den)
    e = mpq(eps)
    for _ in range(200):
        lam = F.lam_alg.refine(e)
        lamc = F.lamc_alg.refine(e)
        val = _eval_terms(num_terms, lam, lamc)
        if den_terms is not None:
            dv = _eval_terms(den_terms, lam, lamc).inv()
            if dv is None:
                e /= 64
                continue
            val = val.mul(dv)
        if val.radius <= eps:
            return val
        e /= 64
    raise DomainError("failed to enclose field element")


def _poly_terms(expr):
    if expr == 0:
        return []
    poly = sympy.Poly(expr, _FX, _FY)
    out = []
    for (i, j), c in zip(poly.monoms(), poly.coeffs()):
        c = sympy.Rational(c)
        out.append(((i, j), mpq(int(c.p), int(c.q))))
    return out


def _eval_terms(terms, lam: ComplexBall, lamc: ComplexBall) -> ComplexBall:
    acc = ComplexBall(0, 0, 0)
    powers = {}

    def pw(base, tag, e):
        if e == 0:
            return ComplexBall(1, 0, 0)
        key = (tag, e)
        if key not in powers:
            powers[key] = pw(base, tag, e - 1).mul(base)
        return powers[key]

    for (i, j), c in terms:
        acc = acc.add(pw(lam, "x", i).mul(pw(lamc, "y", j)).scale_q(c))
    return acc


# -- polynomials over the field, for gcd filtering --------------------------


def _kp_trim(p):
    while p and p[-1].is_zero:
        p.pop()
    return p


def _kp_rem(a, b):
    """Remainder of a by b over the field; b nonzero."""
    a = list(a)
    db = len(b) - 1
    inv_lead = b[-1].inv()
    while len(a) - 1 >= db and a:
        if a[-1].is_zero:
            a.pop()
            continue
        f = a[-1].mul(inv_lead)
        shift = len(a) - 1 - db
        for i in range(db + 1):
            a[shift + i] = a[shift + i].sub(f.mul(b[i]))
        a.pop()
    return _kp_trim(a)


def _kp_gcd(a, b):
    a = _kp_trim(list(a))
    b = _kp_trim(list(b))
    while b:
        a, b = b, _kp_rem(a, b)
    if a:
        inv_lead = a[-1].inv()
        a = [c.mul(inv_lead) for c in a]
    return a


def _kp_derivative(a):
    return _kp_trim([a[i].scale(i) for i in range(1, len(a))]) if len(a) > 1 else []


def _kp_eval_ball(p, zball: ComplexBall, eps) -> ComplexBall:
    acc = ComplexBall(0, 0, 0)
    for c in reversed(p):
        acc = acc.mul(zball)
        if not c.is_zero:
            acc = acc.add(_frac_ball(c, eps))
    return acc


def _roots_satisfying(kpoly, q: IntPolynomial, all_roots):
    """The roots of irreducible q at which kpoly vanishes.

    Exactly deg gcd(kpoly, q) of q's roots are zeros of kpoly; ball
    refinement excludes the others, and counting certifies the rest.
    """
    h = _kp_gcd(kpoly, [kpoly[0].field.from_rational(c) for c in q.coeffs])
    want = len(h) - 1
    if want <= 0:
        return []
    if want == q.degree():
        return list(all_roots)
    alive = list(all_roots)
    eps = mpq(1, 2**40)
    for _ in range(60):
        kept = []
        for r in alive:
            v = _kp_eval_ball(h, r.refine(eps), eps)
            if v.contains_zero():
                kept.append(r)
        alive = kept
        if len(alive) == want:
            return alive
        if len(alive) < want:
            raise DomainError("root counting lost certified zeros")
        eps = eps * eps
    raise DomainError("could not separate zeros of the field gcd")


def _self_reciprocal(q: IntPolynomial) -> bool:
    return list(q.coeffs) == list(reversed(q.coeffs))


def _half_angle_poly(q: IntPolynomial) -> IntPolynomial:
    """Q with q(z) = z^(d/2) Q(z + 1/z) for palindromic q of even degree."""
    d = q.degree()
    half = d // 2
    # V_j(w) = z^j + z^-j on the circle: V_0 = 2, V_1 = w, V_{j+1} = w V_j - V_{j-1}
    vs = [[2], [0, 1]]
    for _ in range(2, half + 1):
        prev, cur = vs[-2], vs[-1]
        nxt = [0] + cur
        nxt = [a - (prev[i] if i < len(prev) else 0) for i, a in enumerate(nxt)]
        vs.append(nxt)
    out = [0] * (half + 1)
    out[0] = q.coeffs[half]
    for j in range(1, half + 1):
        for i, c in enumerate(vs[j]):
            out[i] += q.coeffs[half + j] * c
    return IntPolynomial(out).primitive()


def _on_circle_roots(q: IntPolynomial, roots):
    """The given roots of irreducible q that lie exactly on the unit circle."""
    if q.degree() == 1:
        r = mpq(-q.coeffs[0], q.coeffs[1])
        if abs(r) == 1:
            return list(roots)
        return []
    if q.degree() % 2 or not _self_reciprocal(q):
        return []
    Q = _half_angle_poly(q)
    count = 2 * Q.count_real_roots(mpq(-2), mpq(2))
    if count == 0:
        return []
    if count == len(roots):
        return list(roots)
    alive = list(roots)
    eps = mpq(1, 2**40)
    for _ in range(60):
        kept = []
        for r in alive:
            b = r.refine(eps)
            if b.abs_lower() <= 1 <= b.abs_upper():
                kept.append(r)
        alive = kept
        if len(alive) == count:
            return alive
        if len(alive) < count:
            raise DomainError("circle root counting lost certified roots")
        eps = eps * eps
    raise DomainError("could not separate circle roots")


def dominant_zeros(f: DominantFunction):
    """All zeros of f on the unit circle, as exact algebraic numbers."""
    if f.is_zero:
        raise InvalidInputError("dominant function is identically zero")
    k = f.k
    if k == 0:
        return []
    coeffs = f.g_coeffs()
    annihilator = _integer_annihilator(coeffs, f.field)
    zeros = []
    seen = []
    for q in annihilator.squarefree_part().factor_irreducible():
        if any(q.coeffs == s.coeffs for s in seen):
            continue
        seen.append(q)
        roots = poly_complex_roots(q)
        circle = _on_circle_roots(q, roots)
        if not circle:
            continue
        good = _roots_satisfying(coeffs, q, roots)
        ids = {id(r) for r in good}
        zeros.extend(r for r in circle if id(r) in ids)
    assert len(zeros) <= 4 * k, "dominant function zero count exceeds 4k"
    return zeros


def _integer_annihilator(coeffs, F: ConjField) -> IntPolynomial:
    """Integer polynomial divisible by the minimal polynomial of every root
    of sum coeffs[j] z^j, obtained by eliminating lam and conj(lam)."""
    dens = [c.den for c in coeffs if not c.is_zero]
    D = sympy.Integer(1)
    for d in dens:
        D = sympy.lcm(D, d)
    expr = sympy.Integer(0)
    for j, c in enumerate(coeffs):
        if c.is_zero:
            continue
        expr += sympy.expand(sympy.cancel(c.num * D / c.den)) * _Z**j
    expr = sympy.expand(expr)
    if expr.has(_FY):
        expr = sympy.resultant(expr, F.sxy, _FY)
    if expr.has(_FX):
        # drop any x-only content so the final resultant stays nonzero
        pz = sympy.Poly(expr, _Z)
        content = sympy.gcd_list([c for c in pz.all_coeffs() if c != 0])
        if sympy.degree(content, _FX) > 0:
            expr = sympy.expand(sympy.cancel(expr / content))
        expr = sympy.resultant(expr, F.px, _FX)
    poly = sympy.Poly(sympy.together(expr), _Z)
    lcm_den = sympy.Integer(1)
    for c in poly.all_coeffs():
        lcm_den = sympy.lcm(lcm_den, sympy.Rational(c).q)
    ints = [int(sympy.Rational(c) * lcm_den) for c in poly.all_coeffs()]
    out = IntPolynomial(list(reversed(ints))).primitive()
    if out.is_zero or out.degree() == 0:
        raise DomainError("circle-zero elimination degenerated")
    return out


# ---------------------------------------------------------------------------
# atomic interval sets and dominance thresholds


class OrbitCache:
    """Exact rational orbit points M^n s with sequential caching."""

    def __init__(self, M: RationalMatrix3, s):
        self.M = M
        self.vals = [RationalMatrix3.pad_vector(s)]

    def __call__(self, n: int):
        while len(self.vals) <= n:
            self.vals.append(self.M.mat_vec(self.vals[-1]))
        return self.vals[n]


class CirclePredictor:
    """Decides gamma^n in J via certified angle intervals.

    Falls back to exact arc membership when the interval test is ambiguous
    (which can only happen very close to an arc endpoint).
    """

    def __init__(self, J: TorusSet, gamma: AlgebraicNumber, bits=192):
        self.J = J
        self.gamma = gamma
        self.trivial = None
        if J.full:
            self.trivial = True  # a puncture is never predicted to be hit
            return
        if J.is_empty:
            self.trivial = False
            return
        self.bits = bits
        self._setup(bits)

    def _setup(self, bits):
        self.theta = _angle_enclosure(TorusPoint.from_zero(self.gamma), bits)
        pi_lo, pi_hi = _pi_bounds(bits)
        self.twopi = (2 * pi_lo, 2 * pi_hi)
        spans = []
        for arc in self.J.arcs:
            work = bits
            while True:
                s_lo, s_hi = _angle_enclosure(arc.start, work)
                e_lo, e_hi = _angle_enclosure(arc.end, work)
                if e_lo > s_hi:
                    spans.append((s_lo, s_hi, e_lo, e_hi))
                    break
                if e_hi < s_lo:
                    t_lo, t_hi = _pi_bounds(work)
                    spans.append((s_lo, s_hi, e_lo + 2 * t_lo, e_hi + 2 * t_hi))
                    break
                work *= 2
                if work > 1 << 16:
                    raise DomainError("arc endpoint angles did not separate")
        self.spans = spans

    def predict(self, n: int) -> bool:
        if self.trivial is not None:
            return self.trivial
        t_lo, t_hi = self.theta
        lo, hi = n * t_lo, n * t_hi
        tp_lo, tp_hi = self.twopi
        mid = (lo + hi) / 2
        kf = mid / ((tp_lo + tp_hi) / 2)
        k = int(kf.numerator // kf.denominator)
        lo, hi = lo - k * tp_hi, hi - k * tp_lo
        inside = False
        undecided = False
        for s_lo, s_hi, e_lo, e_hi in self.spans:
            for shift in (-1, 0, 1):
                if shift >= 0:
                    a, b = lo + shift * tp_lo, hi + shift * tp_hi
                else:
                    a, b = lo - tp_hi, hi - tp_lo
                if b < s_lo or a > e_hi:
                    continue
                if a > s_hi and b < e_lo:
                    inside = True
                else:
                    undecided = True
        if inside:
            return True
        if not undecided:
            return False
        return self.J.contains_value(alg_pow(self.gamma, n))


def _arc_sample(a: TorusPoint, b: TorusPoint) -> TorusPoint:
    """Algebraic point strictly inside the open arc from a to b, obtained by
    the half-angle construction w^2 = a*b."""
    u = alg_mul(a.value, b.value)
    candidates = poly_complex_roots(u.min_poly.compose_square().primitive())
    arc = Arc(a, b)
    for w in candidates:
        if not alg_equal(alg_mul(w, w), u):
            continue
        p = TorusPoint.from_zero(w)
        if arc.contains(p):
            return p
        p = TorusPoint.from_zero(alg_neg(w))
        if arc.contains(p):
            return p
    raise DomainError("half-angle sample construction failed")


def _sign_at(f: DominantFunction, p: TorusPoint) -> int:
    """Sign of f at a circle point that is not a zero of f."""
    eps = mpq(1, 2**32)
    for _ in range(40):
        ball = f.eval_ball(p.value.refine(eps), eps)
        if not ball.contains_zero():
            return 1 if ball.re > 0 else -1
        eps = eps * eps
    raise DomainError("sign of dominant function did not resolve")


def interval_set(ne: NormalizedExpression):
    """J: the union of open arcs between consecutive dominant zeros on which
    the dominant function is positive, plus the zeros themselves."""
    f = DominantFunction.of(ne)
    if f.k == 0:
        sign = alg_sign(alg_add(f.betas[0], alg_conj(f.betas[0])))
        return (TorusSet.full_set() if sign > 0 else TorusSet.empty_set()), f, []
    zeros = dominant_zeros(f)
    if not zeros:
        one = TorusPoint.from_zero(AlgebraicNumber.from_rational(1))
        sign = _sign_at(f, one)
        return (TorusSet.full_set() if sign > 0 else TorusSet.empty_set()), f, zeros
    pts = _sort_circular([TorusPoint.from_zero(z) for z in zeros])
    if len(pts) == 1:
        p = pts[0]
        sample = TorusPoint.from_zero(alg_neg(p.value))
        if _sign_at(f, sample) > 0:
            return TorusSet(True, [], puncture=p), f, zeros
        return TorusSet.empty_set(), f, zeros
    arcs = []
    m = len(pts)
    for i in range(m):
        a, b = pts[i], pts[(i + 1) % m]
        sample = _arc_sample(a, b)
        if _sign_at(f, sample) > 0:
            arcs.append(Arc(a, b))
    return TorusSet(False, arcs), f, zeros


def atomic_intervals(pred: AtomicPredicate, ne: NormalizedExpression, *,
                     mode="empirical", horizon=10000, baker_c=3,
                     orbit_eval=None):
    """Interval set J and dominance threshold N for an atomic predicate.

    Beyond N, M^n s satisfies the predicate iff gamma^n lies in J.  In
    empirical mode N is the observed stabilization point against the exact
    orbit (requires orbit_eval); in rigorous mode it is derived from the
    configured Baker-style constants and the residual decay rate.
    """
    if ne.rou_order is not None:
        raise WrongRegimeError("gamma is a root of unity")
    J, f, zeros = interval_set(ne)
    if mode == "rigorous":
        n0 = rigorous_threshold(ne, f, zeros, baker_c)
        return J, max(n0, ne.n_valid)
    if mode != "empirical":
        raise InvalidInputError(f"unknown threshold mode {mode!r}")
    if orbit_eval is None:
        raise InvalidInputError("empirical mode needs exact orbit access")
    n0 = _empirical_threshold(pred, J, ne.gamma, orbit_eval, horizon)
    return J, max(n0, ne.n_valid)


def _empirical_threshold(pred, J, gamma, orbit_eval, horizon):
    predictor = CirclePredictor(J, gamma)
    last_mismatch = -1
    for n in range(horizon + 1):
        truth = pred.holds_q(orbit_eval(n))
        if predictor.predict(n) != truth:
            last_mismatch = n
    if last_mismatch >= horizon:
        raise InconclusiveError(
            f"prediction did not stabilize within horizon {horizon}"
        )
    return last_mismatch + 1


# -- rigorous threshold ------------------------------------------------------


def _q_iv(q):
    q = mpq(q)
    return _dyadic_iv(q, q, 96)


def rigorous_threshold(ne: NormalizedExpression, f: DominantFunction, zeros,
                       baker_c: int) -> int:
    """Dominance threshold from explicit constants.

    Uses |f(gamma^n)| >= m0 * prod_z |gamma^n - z| with the Baker-style gap
    1/n^((size(gamma)+size(z))^C) per zero, against the residual envelope
    |r(n)| <= X * mu_max^n.  The returned N makes the lower bound exceed the
    envelope for all n > N.
    """
    if not ne.residual:
        return 0
    mu_max = mpq(0)
    X = mpq(0)
    for chi, mu in ne.residual:
        eps = mpq(1, 2**24)
        while True:
            ub = mu.refine(eps).abs_upper()
            if ub < 1:
                break
            eps /= 256
            if eps < mpq(1, 2**4096):
                raise DomainError("residual ratio failed to certify below 1")
        mu_max = max(mu_max, ub)
        X += 2 * chi.refine(mpq(1, 2**24)).abs_upper()
    if X == 0:
        return 0

    coeffs = f.g_coeffs()
    E = 0
    for z in zeros:
        _assert_simple_zero(coeffs, z)
        E += (ne.gamma.rep_size() + z.rep_size()) ** baker_c
    m0 = _min_abs_off_zeros(coeffs, zeros)

    n0 = _solve_decay(m0, E, X, mu_max)
    # a zero that is itself a small power of gamma would be hit exactly there
    for z in zeros:
        if z.min_poly.coeffs == ne.gamma.min_poly.coeffs:
            for j in range(1, 65):
                if alg_equal(alg_pow(ne.gamma, j), z):
                    n0 = max(n0, j)
                    break
    return n0


def _assert_simple_zero(coeffs, z: AlgebraicNumber):
    deriv = _kp_derivative(list(coeffs))
    if not deriv:
        raise DomainError("constant dominant polynomial cannot have zeros")
    eps = mpq(1, 2**40)
    for _ in range(12):
        v = _kp_eval_ball(deriv, z.refine(eps), eps)
        if not v.contains_zero():
            return
        eps = eps * eps
    raise DomainError("repeated dominant zero is not supported in rigorous mode")


def _min_abs_off_zeros(coeffs, zeros):
    """Certified rational lower bound of |g(z) / prod (z - z_i)| on |z| = 1."""
    eps = mpq(1, 2**64)
    for _ in range(8):
        balls = [_frac_ball(c, eps) if not c.is_zero else ComplexBall(0, 0, 0)
                 for c in coeffs]
        for z in zeros:
            zb = z.refine(eps)
            # synthetic division; the exact quotient lies inside these balls
            out = []
            acc = ComplexBall(0, 0, 0)
            for c in reversed(balls):
                acc = acc.mul(zb).add(c) if out else c
                out.append(acc)
            balls = list(reversed(out[:-1])) if len(out) > 1 else out
        m0 = _circle_min(balls)
        if m0 is not None and m0 > 0:
            return m0
        eps = eps * eps
    raise DomainError("could not certify a positive deflated minimum")


def _circle_min(coeff_balls):
    pi_hi = _pi_bounds(64)[1]
    segments = []
    pieces = 64
    for i in range(pieces):
        segments.append((2 * pi_hi * i / pieces, 2 * pi_hi * (i + 1) / pieces))
    best = None
    depth = 0
    while segments:
        if depth > 14:
            return None
        next_round = []
        for a, b in segments:
            zb = _circle_patch(a, b)
            acc = ComplexBall(0, 0, 0)
            for c in reversed(coeff_balls):
                acc = acc.mul(zb).add(c)
            low = acc.abs_lower()
            if low > 0:
                best = low if best is None else min(best, low)
            else:
                mid = (a + b) / 2
                next_round.extend([(a, mid), (mid, b)])
        segments = next_round
        depth += 1
    return best


def _circle_patch(a, b) -> ComplexBall:
    """Ball covering the circle arc with angles in [a, b] (rationals)."""
    mid = (a + b) / 2
    with mpmath.workprec(96):
        c = mpmath.cos(mpmath.mpf(int(mid.numerator)) / int(mid.denominator))
        s = mpmath.sin(mpmath.mpf(int(mid.numerator)) / int(mid.denominator))
        from .algebraic import _mpf_to_mpq

        cre, cim = _mpf_to_mpq(c), _mpf_to_mpq(s)
    # chord bound |e^(i t) - e^(i mid)| <= |t - mid| plus evaluation slack
    return ComplexBall(cre, cim, (b - a) / 2 + mpq(1, 2**80))


def _solve_decay(m0, E, X, mu):
    """Smallest n >= 2 with m0 * n^-E >= X * mu^n, stable beyond it."""
    with mpmath.workprec(128):
        iv = mpmath.iv
        A = iv.log(_q_iv(X)) - iv.log(_q_iv(m0))
        L = -iv.log(_q_iv(mu))
        if L.a <= 0:
            raise DomainError("residual ratio bound not below 1")
        n = 2
        floor_iv = E / L

        def ceil_hi(x):
            hi = _iv_to_q(x.b)
            return int(-((-hi).numerator // hi.denominator))

        n = max(n, ceil_hi(floor_iv) + 1)
        for _ in range(200):
            target = (A + E * iv.log(n)) / L
            cand = max(2, ceil_hi(target) + 1, n)
            if cand <= n:
                check = n * L - A - E * iv.log(n)
                if check.a >= 0:
                    return n
                n = n * 2
            else:
                n = cand
        raise DomainError("threshold solve did not converge")


def _iv_to_q(x):
    from .algebraic import _mpf_to_mpq

    return _mpf_to_mpq(mpmath.mpf(x))
