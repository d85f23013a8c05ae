"""Complete decision procedure for the eventually periodic regimes.

When all eigenvalues are real, or the normalized complex eigenvalue
gamma = lam/|lam| is a root of unity, atom truth along the orbit is
eventually periodic with period dividing 2 (real case) respectively 2d
(gamma of order d).  This module computes an explicit (N, P, X) spec per
atom, assembles the atom truths into a lasso word with an exact oracle,
and evaluates LTL formulas on the lasso by backward fixpoint.

Thresholds N are derived from instance-specific quantities: the actual
moduli gaps between the exponential bases and the actual coefficient
sizes, combined through the standard dominance inequality.  Every spec
is cross-checked against the oracle when the lasso is built, so an N
that was somehow too small fails loudly instead of corrupting verdicts.
"""

from __future__ import annotations

import math

from gmpy2 import mpq

from .errors import (
    InconclusiveError,
    InvalidInputError,
    SpecViolationError,
    WrongRegimeError,
)
from .algebraic import (
    AlgebraicNumber,
    alg_add,
    alg_equal,
    alg_is_zero,
    alg_mul,
    alg_pow,
    alg_sign,
    alg_sub,
)
from .spectral import ComplexForm, RealForm
from .orbit_symbolics import aggregate, all_zero, _np_add, _np_eval, _np_trim
from .ltl import (
    And,
    Atom,
    BoundedRelease,
    BoundedUntil,
    FalseF,
    Finally,
    Formula,
    Globally,
    Implies,
    Next,
    Not,
    Or,
    Release,
    TrueF,
    Until,
)

_ZERO = AlgebraicNumber.from_rational(0)
_ONE = AlgebraicNumber.from_rational(1)

# hard ceiling on the dominance-crossover scan; the scan terminates long
# before this mathematically, the cap only guards against library bugs
_SCAN_LIMIT = 10**7


class EventuallyPeriodicSpec:
    """Atom truth for n > N is (n mod P) in X."""

    __slots__ = ("N", "P", "X")

    def __init__(self, N, P, X):
        if P <= 0:
            raise InvalidInputError("period must be positive")
        X = frozenset(X)
        if not all(0 <= r < P for r in X):
            raise InvalidInputError("residues must lie in range(P)")
        self.N = int(N)
        self.P = int(P)
        self.X = X

    def holds(self, n: int) -> bool:
        """Predicted truth at n; meaningful only for n > N."""
        return (n % self.P) in self.X

    def __repr__(self):
        return f"EventuallyPeriodicSpec(N={self.N}, P={self.P}, X={sorted(self.X)})"


class LassoWord:
    """Ultimately periodic atom-truth word.

    prefix[n] gives the truth assignment (atom name -> bool) for positions
    n = 0..N; for n > N the assignment is loop[(n - N - 1) mod P].
    """

    __slots__ = ("prefix", "P", "loop")

    def __init__(self, prefix, P, loop):
        if len(loop) != P or P <= 0:
            raise InvalidInputError("loop length must equal the period")
        if not prefix:
            raise InvalidInputError("prefix must cover at least position 0")
        self.prefix = list(prefix)
        self.P = int(P)
        self.loop = list(loop)

    @property
    def N(self):
        return len(self.prefix) - 1

    def canonical(self, n: int) -> int:
        """Fold n onto the representative positions 0..N+P."""
        if n <= self.N:
            return n
        return self.N + 1 + (n - self.N - 1) % self.P

    def at(self, n: int):
        if n <= self.N:
            return self.prefix[n]
        return self.loop[(n - self.N - 1) % self.P]


# ---------------------------------------------------------------------------
# real eigenvalues: period-2 specs via dominance of the largest base


def _refined_ball(a: AlgebraicNumber, nonzero=False):
    eps = mpq(1, 2**32)
    ball = a.refine(eps)
    while nonzero and not ball.abs_lower() > 0:
        eps /= 2**16
        ball = a.refine(eps)
    return ball


def _abs_upper(a: AlgebraicNumber):
    return _refined_ball(a).abs_upper()


def _np_sub_in(poly, b: int):
    """Coefficients of alpha(2j + b) as a polynomial in j."""
    # Horner: fold in one coefficient, multiply by (2j + b)
    out = []
    for c in reversed(poly):
        # out = out * (2j + b) + c
        shifted = [_ZERO] + [alg_mul(x, AlgebraicNumber.from_rational(2)) for x in out]
        scaled = [alg_mul(x, AlgebraicNumber.from_rational(b)) for x in out]
        out = _np_add(shifted, scaled)
        out = _np_add(out, [c])
    return _np_trim(out)


def _cmp_pos(a: AlgebraicNumber, b: AlgebraicNumber) -> int:
    return alg_sign(alg_sub(a, b))


def _dominance_threshold(groups):
    """Smallest certified j-threshold for the largest-base group of a sum
    sum_i A_i(j) tau_i^j with distinct positive bases tau_i.

    Returns (threshold, sign of the dominant group for large j).
    """
    groups = sorted(groups, key=_TauKey)
    tau1, a1 = groups[0]
    rest = groups[1:]
    s = alg_sign(a1[-1])
    # beyond the Cauchy bound of A1 and its derivative, |A1| is monotone
    lead_low = _refined_ball(a1[-1], nonzero=True).abs_lower()
    if len(a1) > 1:
        top = max(_abs_upper(c) for c in a1[:-1])
        j_star = 1 + int(math.ceil(top / lead_low))
    else:
        j_star = 0
    if not rest:
        return max(j_star, 1), s
    # certified ratio r < 1 between the runner-up and dominant bases
    eps = mpq(1, 2**32)
    while True:
        low1 = tau1.refine(eps).abs_lower()
        ups = [t.refine(eps).abs_upper() for t, _ in rest]
        if low1 > 0 and max(ups) < low1:
            r = max(ups) / low1
            break
        eps /= 2**16
    height = sum(_abs_upper(c) for _, poly in rest for c in poly)
    deg = max(len(poly) - 1 for _, poly in rest)
    j = max(j_star, 1)
    while j < _SCAN_LIMIT:
        lhs = height * (1 + j) ** deg * r**j
        rhs = alg_mul(AlgebraicNumber.from_rational(s), _np_eval(a1, j))
        decreasing = r * mpq(j + 2, j + 1) ** deg <= 1
        if decreasing and alg_sign(alg_sub(rhs, AlgebraicNumber.from_rational(lhs))) > 0:
            return j, s
        j += max(1, j // 8)
    raise InconclusiveError("dominance crossover scan did not terminate")


def real_case_spec(pred, orbit: RealForm) -> EventuallyPeriodicSpec:
    """Eventually-periodic spec for an atom over a real-eigenvalue orbit.

    Splits by parity so that bases of equal modulus and opposite sign merge
    into a single positive base; within each parity the largest surviving
    base dominates beyond a certified crossover.
    """
    if not isinstance(orbit, RealForm):
        raise WrongRegimeError("real-case analysis needs a real closed form")
    es = aggregate(pred, orbit)
    if all_zero(es):
        X = {0, 1} if pred.relation == ">=" else set()
        return EventuallyPeriodicSpec(es.n_valid, 2, X)
    sigmas = []
    for key, poly in es.terms.items():
        sigma = _ONE
        for e, rho in zip(key, es.eigs):
            if e:
                sigma = alg_mul(sigma, alg_pow(rho, e))
        sigmas.append((sigma, poly))
    X = set()
    N = es.n_valid
    for b in (0, 1):
        merged = []  # (tau = sigma^2, coefficient polynomial in j)
        for sigma, poly in sigmas:
            tau = alg_mul(sigma, sigma)
            coeff = _np_sub_in(poly, b)
            if b:
                coeff = [alg_mul(c, sigma) for c in coeff]
            for entry in merged:
                if alg_equal(entry[0], tau):
                    entry[1] = _np_trim(_np_add(entry[1], coeff))
                    break
            else:
                merged.append([tau, coeff])
        merged = [(t, p) for t, p in merged if p]
        if not merged:
            if pred.relation == ">=":
                X.add(b)
            continue
        jt, s = _dominance_threshold([(t, p) for t, p in merged])
        if s > 0:
            X.add(b)
        N = max(N, 2 * jt + b)
    return EventuallyPeriodicSpec(N, 2, X)


class _TauKey:
    """Sort key for positive algebraic bases, largest first."""

    __slots__ = ("tau",)

    def __init__(self, group):
        self.tau = group[0]

    def __lt__(self, other):
        return _cmp_pos(self.tau, other.tau) > 0


# ---------------------------------------------------------------------------
# gamma a root of unity: split into d real-base subsequences


def rou_case_spec(pred, orbit: ComplexForm, d) -> EventuallyPeriodicSpec:
    """Spec with period 2d for an atom when gamma has finite order d.

    Along the subsequence n = m + i d the two oscillating terms collapse:
    lam^d = |lam|^d is real and positive, so each subsequence is an orbit
    with two real bases |lam|^d and rho^d and the real-case analysis
    applies verbatim.
    """
    if not isinstance(orbit, ComplexForm) or d is None:
        raise WrongRegimeError("gamma of finite order required")
    d = int(d)
    if d <= 0:
        raise InvalidInputError("order must be positive")
    F = orbit.field
    lam_d = F.lam().pow(d)
    rho1 = lam_d.to_alg()  # real and positive: lam^d = (gamma |lam|)^d = |lam|^d
    rho2 = alg_pow(orbit.rho, d)
    rho_zero = alg_is_zero(orbit.rho)
    X = set()
    N_sub = 0
    for m in range(d):
        lam_m = F.lam().pow(m)
        a_row = []
        c_row = []
        for t in range(3):
            af = orbit.a_f[t].mul(lam_m)
            a_row.append(af.add(af.conj()).to_alg())
            c_row.append(
                alg_mul(orbit.c[t], alg_pow(orbit.rho, m)) if not rho_zero else _ZERO
            )
        terms = [(rho1, tuple([a] for a in a_row))]
        if rho_zero:
            # rho^0 = 1 contributes only at n = 0; the oracle covers that
            # position because the stitched threshold is at least d
            n_valid = 1 if m == 0 and any(not alg_is_zero(c) for c in orbit.c) else 0
        else:
            n_valid = 0
            if alg_equal(rho2, rho1):
                terms = [
                    (rho1, tuple([alg_add(a, c)] for a, c in zip(a_row, c_row)))
                ]
            else:
                terms.append((rho2, tuple([c] for c in c_row)))
        sub = RealForm(terms, n_valid)
        spec_m = real_case_spec(pred, sub)
        N_sub = max(N_sub, spec_m.N)
        for j in (0, 1):
            if j in spec_m.X:
                X.add((m + d * j) % (2 * d))
    return EventuallyPeriodicSpec(d * N_sub + d, 2 * d, X)


# ---------------------------------------------------------------------------
# lasso construction with oracle cross-checking


def build_lasso(specs, oracle) -> LassoWord:
    """Assemble the per-atom truths into a single lasso word.

    specs maps atom name to its EventuallyPeriodicSpec; oracle(name, n)
    returns the exact truth of the atom at position n.  Loop truths are
    cross-checked against every spec over two full periods; a mismatch
    means some threshold was too small and raises immediately.
    """
    if not specs:
        raise InvalidInputError("at least one atom is required")
    N = max(sp.N for sp in specs.values())
    P = 1
    for sp in specs.values():
        P = P * sp.P // math.gcd(P, sp.P)
    prefix = [{name: oracle(name, n) for name in specs} for n in range(N + 1)]
    loop = []
    for n in range(N + 1, N + 1 + P):
        row = {}
        for name, sp in specs.items():
            truth = oracle(name, n)
            if truth != sp.holds(n):
                raise SpecViolationError(
                    f"atom {name!r} at n={n}: oracle says {truth}, "
                    f"spec {sp!r} predicts {sp.holds(n)}"
                )
            row[name] = truth
        loop.append(row)
    # a second period re-checked directly against the specs
    for n in range(N + 1 + P, N + 1 + 2 * P):
        for name, sp in specs.items():
            if oracle(name, n) != sp.holds(n):
                raise SpecViolationError(f"atom {name!r} not periodic at n={n}")
    return LassoWord(prefix, P, loop)


# ---------------------------------------------------------------------------
# LTL evaluation on a lasso by backward fixpoint


def lasso_mc(w: LassoWord, f: Formula, at: int = 0) -> bool:
    """Exact LTL truth at a position of the infinite word induced by w.

    Subformula values are computed over the representative positions
    0..N+P; on the loop, Until and Release are least respectively greatest
    fixpoints, reached by two backward sweeps around the cycle.
    """
    if at < 0:
        raise InvalidInputError("position must be nonnegative")
    N, P = w.N, w.P
    size = N + 1 + P
    memo = {}

    def values(g):
        got = memo.get(id(g))
        if got is None:
            got = memo[id(g)] = _compute(g)
        return got

    def _compute(g):
        if isinstance(g, TrueF):
            return [True] * size
        if isinstance(g, FalseF):
            return [False] * size
        if isinstance(g, Atom):
            return [bool(w.at(n)[g.name]) for n in range(size)]
        if isinstance(g, Not):
            return [not v for v in values(g.sub)]
        if isinstance(g, And):
            return [a and b for a, b in zip(values(g.left), values(g.right))]
        if isinstance(g, Or):
            return [a or b for a, b in zip(values(g.left), values(g.right))]
        if isinstance(g, Implies):
            return [(not a) or b for a, b in zip(values(g.left), values(g.right))]
        if isinstance(g, Next):
            sub = values(g.sub)
            return [sub[w.canonical(n + 1)] for n in range(size)]
        if isinstance(g, Finally):
            return _fixpoint([True] * size, values(g.sub), False)
        if isinstance(g, Globally):
            return _fixpoint([False] * size, values(g.sub), True)
        if isinstance(g, Until):
            return _fixpoint(values(g.left), values(g.right), False)
        if isinstance(g, Release):
            return _fixpoint(values(g.left), values(g.right), True)
        if isinstance(g, (BoundedUntil, BoundedRelease)):
            v1, v2 = values(g.left), values(g.right)
            release = isinstance(g, BoundedRelease)
            out = []
            for n in range(size):
                out.append(_bounded(v1, v2, w, n, g.bound, release))
            return out
        raise InvalidInputError(f"unknown formula node {g!r}")

    def _fixpoint(v1, v2, release):
        # release: nu Z. v2 and (v1 or X Z); else mu Z. v2 or (v1 and X Z)
        out = [release] * size

        def step(n, nxt):
            if release:
                return v2[n] and (v1[n] or nxt)
            return v2[n] or (v1[n] and nxt)

        # two sweeps around the loop reach the fixpoint: any witness or
        # violation repeats within one period
        for _ in range(2):
            for j in reversed(range(P)):
                n = N + 1 + j
                out[n] = step(n, out[w.canonical(n + 1)])
        for n in reversed(range(N + 1)):
            out[n] = step(n, out[n + 1])
        return out

    def _bounded(v1, v2, w, n, bound, release):
        for i in range(bound + 1):
            pos = w.canonical(n + i)
            if release:
                if not v2[pos]:
                    return False
                if v1[pos]:
                    return True
            else:
                if v2[pos]:
                    return True
                if not v1[pos]:
                    return False
        return release

    return values(f)[w.canonical(at)]
