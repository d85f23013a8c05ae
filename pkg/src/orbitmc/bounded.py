"""Irrational-rotation engine and the top-level check dispatcher.

For orbits whose normalized eigenvalue gamma is an irrational rotation,
unbounded Until/Release are replaced by bounded versions using return-time
bounds, and the resulting formula is checked by direct recursion with an
exact membership oracle (Listing-style bounded model checking).

Three bound modes are supported, with explicit rigor tracking:

- rigorous: the retraction-depth / interval-length recursion evaluated
  bottom-up with configured constants.  These bounds are doubly exponential
  and usually far too large to drive a loop; they are computed as certified
  magnitudes and reported, not iterated over.
- interval-derived: per-subformula circle sets combined with the rotation
  return bound; small and usable whenever the set construction is feasible.
- empirical: the configured stabilization horizon, flagged non-rigorous.

Eventually periodic regimes (all-real eigenvalues, gamma a root of unity)
are dispatched to the exact lasso engine instead.
"""

from __future__ import annotations

from gmpy2 import mpq

from .errors import (
    BoundOverflowError,
    InvalidInputError,
    WrongRegimeError,
)
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
    FALSE,
    TRUE,
    atom_names,
    parse_formula,
    temporal_depth,
    to_negation_free,
)
from .spectral import ComplexPair, RationalMatrix3, ThreeReal, classify, closed_form
from .torus import (
    Arc,
    TorusSet,
    intersect,
    release_set,
    cover_steps,
    rotate_inv_gamma,
    union,
    until_set,
)
from .orbit_symbolics import aggregate, all_zero, atomic_intervals, normalize
from .semilinear import build_lasso, lasso_mc, real_case_spec, rou_case_spec


# ---------------------------------------------------------------------------
# exact orbit membership oracle


class OracleCache:
    """Exact M^n s and per-atom truths, memoized, powered by squaring.

    Queries are pure functions of n; clearing the cache only costs time.
    """

    def __init__(self, M: RationalMatrix3, s, preds):
        self.M = M
        self.s = tuple(mpq(x) for x in s)
        self.preds = dict(preds)
        self._ladder = [M]
        self._points = {}
        self._truth = {}

    def clear_cache(self):
        self._points = {}
        self._truth = {}

    def _power_vec(self, n: int):
        # M^n s via the bits of n and the squaring ladder
        while (1 << len(self._ladder)) <= n:
            top = self._ladder[-1]
            self._ladder.append(top.mat_mul(top))
        v = self.s
        k = 0
        while n:
            if n & 1:
                v = self._ladder[k].mat_vec(v)
            n >>= 1
            k += 1
        return tuple(v)

    def point(self, n: int):
        if n < 0:
            raise InvalidInputError("position must be nonnegative")
        got = self._points.get(n)
        if got is None:
            got = self._points[n] = self._power_vec(n)
        return got

    def truth(self, name: str, n: int) -> bool:
        key = (name, n)
        got = self._truth.get(key)
        if got is None:
            got = self._truth[key] = self.preds[name].holds_q(self.point(n))
        return got


def membership_oracle(M: RationalMatrix3, s, n: int, pred) -> bool:
    """Exact truth of pred at M^n s."""
    cache = OracleCache(M, s, {pred.name: pred})
    return cache.truth(pred.name, n)


# ---------------------------------------------------------------------------
# magnitudes for rigorous bounds


class BigMagnitude:
    """A nonnegative integer, exact or as a certified upper bound 2^e.

    All operations round up, so a BigMagnitude is always a sound upper
    bound for the quantity it tracks.  Exponents are magnitudes themselves,
    which keeps doubly and triply exponential values representable.
    """

    __slots__ = ("n", "e")

    _EXACT_BITS = 4096

    def __init__(self, n=None, e=None):
        if (n is None) == (e is None):
            raise InvalidInputError("exactly one representation required")
        self.n = n
        self.e = e

    @staticmethod
    def of(v) -> "BigMagnitude":
        if isinstance(v, BigMagnitude):
            return v
        if v < 0:
            raise InvalidInputError("magnitudes are nonnegative")
        return BigMagnitude(n=int(v))

    @property
    def is_exact(self):
        return self.n is not None

    def log2u(self) -> "BigMagnitude":
        """Upper bound on log2(self); log2(0) is floored to 0."""
        if self.is_exact:
            return BigMagnitude.of(self.n.bit_length())
        return self.e

    def mul(self, other) -> "BigMagnitude":
        other = BigMagnitude.of(other)
        if self.is_exact and other.is_exact:
            return BigMagnitude.of(self.n * other.n)
        return BigMagnitude(e=self.log2u().add(other.log2u()))

    def add(self, other) -> "BigMagnitude":
        other = BigMagnitude.of(other)
        if self.is_exact and other.is_exact:
            return BigMagnitude.of(self.n + other.n)
        # a + b <= 2 max(a, b)
        bigger = self if other.le(self) else other
        return BigMagnitude(e=bigger.log2u().add(BigMagnitude.of(1)))

    def pow(self, other) -> "BigMagnitude":
        other = BigMagnitude.of(other)
        if self.is_exact and other.is_exact:
            if self.n <= 1:
                return BigMagnitude.of(self.n if other.n else 1)
            if self.n.bit_length() * other.n <= self._EXACT_BITS:
                return BigMagnitude.of(self.n**other.n)
        return BigMagnitude(e=self.log2u().mul(other))

    def le(self, other) -> bool:
        """Conservative order on the tracked upper bounds."""
        other = BigMagnitude.of(other)
        if self.is_exact and other.is_exact:
            return self.n <= other.n
        if self.is_exact:
            return BigMagnitude.of(self.n.bit_length()).le(other.e)
        if other.is_exact:
            return self.e.le(BigMagnitude.of(other.n.bit_length()))
        return self.e.le(other.e)

    def to_int(self, cap: int) -> int:
        if self.is_exact and self.n <= cap:
            return self.n
        raise BoundOverflowError(f"bound {self} exceeds the loop cap {cap}")

    def __repr__(self):
        if self.is_exact:
            return str(self.n)
        return f"2^({self.e!r})"


class BoundCertificate:
    """Return-time bound for one temporal subformula plus its ingredients."""

    __slots__ = ("B", "mode", "R", "d_inv", "b", "T", "depth")

    def __init__(self, B, mode, R=None, d_inv=None, b=None, T=None, depth=None):
        self.B = B
        self.mode = mode
        self.R = R
        self.d_inv = d_inv
        self.b = b
        self.T = T
        self.depth = depth

    def as_json(self):
        out = {"B": repr(self.B) if isinstance(self.B, BigMagnitude) else self.B,
               "mode": self.mode}
        if self.depth is not None:
            out["depth"] = self.depth
        return out

    def __repr__(self):
        return f"BoundCertificate(B={self.B!r}, mode={self.mode})"


# ---------------------------------------------------------------------------
# per-atom analysis for the rotation regime


class RotationContext:
    """Everything the bound computations need about one instance."""

    __slots__ = ("gamma", "atom_J", "N", "N_mode", "size_bits",
                 "baker_c", "baker_d", "horizon")

    def __init__(self, gamma, atom_J, N, N_mode, size_bits, baker_c, baker_d,
                 horizon):
        self.gamma = gamma
        self.atom_J = atom_J
        self.N = N
        self.N_mode = N_mode
        self.size_bits = size_bits
        self.baker_c = baker_c
        self.baker_d = baker_d
        self.horizon = horizon


def _q_bits(q) -> int:
    q = mpq(q)
    return int(q.numerator).bit_length() + int(q.denominator).bit_length()


def _instance_bits(M, s, preds) -> int:
    total = sum(_q_bits(x) for row in M.rows for x in row)
    total += sum(_q_bits(x) for x in s)
    total += sum(p.poly.encoding_bits() for p in preds.values())
    return max(total, 2)


def rotation_context(M, s, preds, cls, *, mode="empirical", horizon=10000,
                     baker_c=3, baker_d=3, oracle=None):
    """Atom circle sets and the shared dominance threshold.

    mode picks how thresholds are obtained: "empirical" stabilizes against
    the exact oracle up to the horizon, "rigorous" derives explicit
    thresholds.  Atoms whose polynomial vanishes identically get constant
    sets and are expected to have been substituted away by the caller.
    """
    if not isinstance(cls, ComplexPair) or cls.rou_order is not None:
        raise WrongRegimeError("irrational-rotation analysis needs irrational gamma")
    orbit = closed_form(M, s, cls)
    atom_J = {}
    N = 0
    for name, pred in preds.items():
        es = aggregate(pred, orbit)
        if all_zero(es):
            atom_J[name] = (
                TorusSet.full_set() if pred.relation == ">=" else TorusSet.empty_set()
            )
            continue
        ne = normalize(es, cls)
        if mode == "rigorous":
            J, n0 = atomic_intervals(pred, ne, mode="rigorous", baker_c=baker_c)
        else:
            orbit_eval = (lambda n, _o=oracle: _o.point(n)) if oracle else None
            if orbit_eval is None:
                cache = OracleCache(M, s, preds)
                orbit_eval = cache.point
            J, n0 = atomic_intervals(
                pred, ne, mode="empirical", horizon=horizon, orbit_eval=orbit_eval
            )
        atom_J[name] = J
        N = max(N, n0)
    return RotationContext(
        cls.gamma, atom_J, N, mode, _instance_bits(M, s, preds),
        baker_c, baker_d, horizon,
    )


# ---------------------------------------------------------------------------
# circle sets per subformula


def _complement_arcs(J: TorusSet) -> TorusSet:
    """Interior of the complement; isolated boundary points are dropped,
    which can only shorten stays inside the complement."""
    if J.is_empty:
        return TorusSet.full_set()
    if J.full:
        return TorusSet.empty_set()
    arcs = J.arcs
    out = []
    m = len(arcs)
    for i in range(m):
        a = arcs[i].end
        b = arcs[(i + 1) % m].start
        try:
            out.append(Arc(a, b))
        except InvalidInputError:
            continue  # abutting arcs leave a single-point gap
    return TorusSet(False, out)


def formula_sets(f: Formula, ctx: RotationContext):
    """J_phi for every subformula of a negation-free formula."""
    memo = {}

    def go(g):
        if g in memo:
            return memo[g]
        if isinstance(g, TrueF):
            J = TorusSet.full_set()
        elif isinstance(g, FalseF):
            J = TorusSet.empty_set()
        elif isinstance(g, Atom):
            J = ctx.atom_J[g.name]
        elif isinstance(g, And):
            J = intersect(go(g.left), go(g.right))
        elif isinstance(g, Or):
            J = union(go(g.left), go(g.right))
        elif isinstance(g, Next):
            J = rotate_inv_gamma(go(g.sub), ctx.gamma, 1)
        elif isinstance(g, (Until, BoundedUntil)):
            J = until_set(go(g.left), go(g.right), ctx.gamma, ctx.baker_d)
        elif isinstance(g, (Release, BoundedRelease)):
            J = release_set(go(g.left), go(g.right), ctx.gamma, ctx.baker_d)
        else:
            raise InvalidInputError(
                f"formula must be negation-free, found {type(g).__name__}"
            )
        memo[g] = J
        return J

    go(f)
    return memo


def _rb(J: TorusSet, ctx: RotationContext) -> int:
    """Steps until the rotation enters J, from anywhere on the circle."""
    if J.is_empty:
        return 0  # never entered; the caller's threshold covers the prefix
    if J.full and J.puncture is None:
        return 1
    if J.full:
        # the rotation hits the puncture at most once, never twice in a row
        return 2
    return cover_steps(J, ctx.gamma)


# ---------------------------------------------------------------------------
# bound computation


def compute_bounds(f: Formula, ctx: RotationContext, mode="interval"):
    """Bound certificate per temporal subformula of a negation-free formula.

    interval mode derives each bound from the relevant circle sets plus the
    shared dominance threshold; empirical mode uses the horizon; rigorous
    mode evaluates the retraction-depth recursion with the configured
    exponents, yielding certified magnitudes.
    """
    if mode == "interval":
        return _interval_bounds(f, ctx)
    if mode == "empirical":
        certs = {}

        def walk(g):
            if isinstance(g, (Until, Release, BoundedUntil, BoundedRelease)):
                certs[g] = BoundCertificate(
                    ctx.horizon, "empirical", depth=temporal_depth(g)
                )
            for child in _children(g):
                walk(child)

        walk(f)
        return certs
    if mode == "rigorous":
        return _rigorous_bounds(f, ctx)
    raise InvalidInputError(f"unknown bound mode {mode!r}")


def _children(g):
    if isinstance(g, (Not, Next, Finally, Globally)):
        return (g.sub,)
    if isinstance(g, (And, Or, Implies, Until, Release, BoundedUntil, BoundedRelease)):
        return (g.left, g.right)
    return ()


def _interval_bounds(f, ctx):
    sets = formula_sets(f, ctx)
    certs = {}

    def walk(g):
        if isinstance(g, (Until, BoundedUntil)):
            b = _rb(sets[g.right], ctx)
            certs[g] = BoundCertificate(
                ctx.N + b, "interval-derived", b=b, T=ctx.N + b,
                depth=temporal_depth(g),
            )
        elif isinstance(g, (Release, BoundedRelease)):
            b1 = _rb(intersect(sets[g.left], sets[g.right]), ctx)
            b2 = _rb(_complement_arcs(sets[g.right]), ctx)
            b = max(b1, b2)
            certs[g] = BoundCertificate(
                ctx.N + b, "interval-derived", b=b, T=ctx.N + b,
                depth=temporal_depth(g),
            )
        for child in _children(g):
            walk(child)

    walk(f)
    return certs


def _rigorous_bounds(f, ctx):
    """Retraction-depth recursion with explicit constants.

    Interval lengths obey d >= 1/(R+2)^q with q = bits^C, and each
    Until/Release layer retracts endpoints for at most
    b = ceil(2 pi (2 pi / d)^(size(gamma)^D)) steps.  2 pi is rounded up
    to 7 so everything stays in integer arithmetic.
    """
    q = BigMagnitude.of(ctx.size_bits**ctx.baker_c)
    sgd = BigMagnitude.of(max(2, ctx.gamma.rep_size()) ** ctx.baker_d)
    seven = BigMagnitude.of(7)
    N = BigMagnitude.of(ctx.N)
    certs = {}
    memo = {}

    def d_inv(R):
        return R.add(2).pow(q)

    def bval(R):
        # ceil(2 pi (2 pi / d)^(size^D)) <= 7 (7 / d)^(size^D)
        return seven.mul(seven.mul(d_inv(R)).pow(sgd))

    def retraction(g) -> BigMagnitude:
        got = memo.get(g)
        if got is not None:
            return got
        if isinstance(g, (Atom, TrueF, FalseF)):
            out = BigMagnitude.of(0)
        elif isinstance(g, (And, Or)):
            r1, r2 = retraction(g.left), retraction(g.right)
            out = r1 if r2.le(r1) else r2
        elif isinstance(g, Next):
            out = retraction(g.sub).add(1)
        elif isinstance(g, (Until, BoundedUntil)):
            r1, r2 = retraction(g.left), retraction(g.right)
            out = (r1 if r2.le(r1) else r2).add(bval(r2))
        elif isinstance(g, (Release, BoundedRelease)):
            r1, r2 = retraction(g.left), retraction(g.right)
            rmax = r1 if r2.le(r1) else r2
            out = rmax.add(bval(rmax))
        else:
            raise InvalidInputError(
                f"formula must be negation-free, found {type(g).__name__}"
            )
        memo[g] = out
        return out

    def walk(g):
        if isinstance(g, (Until, BoundedUntil)):
            r2 = retraction(g.right)
            b = bval(r2)
            certs[g] = BoundCertificate(
                N.add(b), "rigorous", R=r2, d_inv=d_inv(r2), b=b, T=N.add(b),
                depth=temporal_depth(g),
            )
        elif isinstance(g, (Release, BoundedRelease)):
            r1, r2 = retraction(g.left), retraction(g.right)
            rmax = r1 if r2.le(r1) else r2
            # the complement of J_phi2 has the same endpoints, so the same
            # retraction depth bounds T(not phi2)
            b = bval(rmax) if r2.le(rmax) else bval(r2)
            certs[g] = BoundCertificate(
                N.add(b), "rigorous", R=rmax, d_inv=d_inv(rmax), b=b,
                T=N.add(b), depth=temporal_depth(g),
            )
        for child in _children(g):
            walk(child)

    walk(f)
    return certs


_LOOP_CAP = 10**6


def boundify(f: Formula, certs) -> Formula:
    """Replace every Until/Release with its bounded version."""

    def go(g):
        if isinstance(g, (Atom, TrueF, FalseF)):
            return g
        if isinstance(g, Not):
            return Not(go(g.sub))
        if isinstance(g, Next):
            return Next(go(g.sub))
        if isinstance(g, And):
            return And(go(g.left), go(g.right))
        if isinstance(g, Or):
            return Or(go(g.left), go(g.right))
        if isinstance(g, (Until, Release)):
            cert = certs.get(g)
            if cert is None:
                raise InvalidInputError("missing bound certificate")
            B = cert.B
            if isinstance(B, BigMagnitude):
                B = B.to_int(_LOOP_CAP)
            if B > _LOOP_CAP:
                raise BoundOverflowError(f"bound {B} exceeds the loop cap")
            cls = BoundedUntil if isinstance(g, Until) else BoundedRelease
            return cls(go(g.left), go(g.right), int(B))
        raise InvalidInputError(
            f"formula must be negation-free, found {type(g).__name__}"
        )

    return go(f)


# ---------------------------------------------------------------------------
# bounded model checking (direct recursion)


def model_check_bounded(f: Formula, n: int, oracle) -> bool:
    """Truth of a bounded-operator formula at position n.

    oracle(name, pos) must return the exact atom truth.  Evaluation is
    memoized per (subformula, position).
    """
    memo = {}

    def go(g, pos):
        key = (id(g), pos)
        got = memo.get(key)
        if got is None:
            got = memo[key] = _eval(g, pos)
        return got

    def _eval(g, pos):
        if isinstance(g, TrueF):
            return True
        if isinstance(g, FalseF):
            return False
        if isinstance(g, Atom):
            return oracle(g.name, pos)
        if isinstance(g, Not):
            return not go(g.sub, pos)
        if isinstance(g, And):
            return go(g.left, pos) and go(g.right, pos)
        if isinstance(g, Or):
            return go(g.left, pos) or go(g.right, pos)
        if isinstance(g, Next):
            return go(g.sub, pos + 1)
        if isinstance(g, BoundedUntil):
            for i in range(g.bound + 1):
                if go(g.right, pos + i):
                    return True
                if not go(g.left, pos + i):
                    return False
            return False
        if isinstance(g, BoundedRelease):
            for i in range(g.bound + 1):
                if not go(g.right, pos + i):
                    return False
                if go(g.left, pos + i):
                    return True
            return True
        raise InvalidInputError(
            f"only bounded temporal operators are allowed, found {type(g).__name__}"
        )

    return go(f, n)


# ---------------------------------------------------------------------------
# top-level dispatch


class Verdict:
    __slots__ = ("verdict", "regime", "rigor", "bounds", "diagnostics")

    def __init__(self, verdict, regime, rigor, bounds, diagnostics):
        self.verdict = verdict
        self.regime = regime
        self.rigor = rigor
        self.bounds = bounds
        self.diagnostics = diagnostics

    def __repr__(self):
        return (
            f"Verdict({self.verdict}, regime={self.regime!r}, rigor={self.rigor!r})"
        )


def _substitute_atoms(f: Formula, mapping) -> Formula:
    def go(g):
        if isinstance(g, Atom):
            return mapping.get(g.name, g)
        if isinstance(g, (TrueF, FalseF)):
            return g
        if isinstance(g, Not):
            return Not(go(g.sub))
        if isinstance(g, Next):
            return Next(go(g.sub))
        if isinstance(g, Finally):
            return Finally(go(g.sub))
        if isinstance(g, Globally):
            return Globally(go(g.sub))
        if isinstance(g, (And, Or, Implies, Until, Release)):
            return type(g)(go(g.left), go(g.right))
        if isinstance(g, (BoundedUntil, BoundedRelease)):
            return type(g)(go(g.left), go(g.right), g.bound)
        raise InvalidInputError(f"unknown formula node {g!r}")

    return go(f)


def _const_value(f: Formula) -> bool:
    """Truth of an atom-free formula; constants make time irrelevant."""
    if isinstance(f, TrueF):
        return True
    if isinstance(f, FalseF):
        return False
    if isinstance(f, Not):
        return not _const_value(f.sub)
    if isinstance(f, (Next, Finally, Globally)):
        return _const_value(f.sub)
    if isinstance(f, And):
        return _const_value(f.left) and _const_value(f.right)
    if isinstance(f, Or):
        return _const_value(f.left) or _const_value(f.right)
    if isinstance(f, (Until, BoundedUntil, Release, BoundedRelease)):
        # a constant right operand decides the matter at the first step
        return _const_value(f.right)
    if isinstance(f, Implies):
        return (not _const_value(f.left)) or _const_value(f.right)
    raise InvalidInputError(f"formula contains atoms: {f!r}")


def check(M: RationalMatrix3, s, formula: Formula, preds, *, mode="empirical",
          horizon=10000, baker_c=3, baker_d=3) -> Verdict:
    """Decide whether the orbit of s under M satisfies the formula.

    Dispatches on the eigenvalue structure: all-real and root-of-unity
    instances go through the exact lasso engine; irrational rotations are
    boundified and checked recursively at position 0.
    """
    if isinstance(formula, str):
        formula = parse_formula(formula)
    cls = classify(M)
    cache = OracleCache(M, s, preds)
    if isinstance(cls, ThreeReal) or cls.rou_order is not None:
        orbit = closed_form(M, s, cls)
        used = sorted(atom_names(formula)) or sorted(preds)
        if isinstance(cls, ThreeReal):
            regime = "three-real"
            specs = {a: real_case_spec(preds[a], orbit) for a in used}
        else:
            regime = "root-of-unity"
            specs = {
                a: rou_case_spec(preds[a], orbit, cls.rou_order) for a in used
            }
        word = build_lasso(specs, cache.truth)
        verdict = lasso_mc(word, formula, 0)
        diag = {
            "N": word.N,
            "P": word.P,
            "specs": {a: {"N": sp.N, "P": sp.P, "X": sorted(sp.X)}
                      for a, sp in specs.items()},
        }
        return Verdict(verdict, regime, "rigorous", {}, diag)

    nnf, table = to_negation_free(formula, preds)
    # constant atoms short-circuit before any bound computation
    orbit = closed_form(M, s, cls)
    const = {}
    for name in atom_names(nnf):
        pred = table[name]
        if all_zero(aggregate(pred, orbit)):
            const[name] = TRUE if pred.relation == ">=" else FALSE
    if const:
        nnf = _substitute_atoms(nnf, const)
    live = {name: table[name] for name in atom_names(nnf)}
    full_cache = OracleCache(M, s, table)
    if not live:
        # position-independent truth values fold through every operator
        verdict = _const_value(nnf)
        return Verdict(verdict, "irrational-rotation", "rigorous", {},
                       {"constant": True})
    ctx = rotation_context(
        M, s, live, cls, mode=mode if mode in ("empirical", "rigorous") else "empirical",
        horizon=horizon, baker_c=baker_c, baker_d=baker_d, oracle=full_cache,
    )
    bound_mode = {"empirical": "interval", "interval": "interval",
                  "rigorous": "rigorous"}.get(mode)
    if bound_mode is None:
        raise InvalidInputError(f"unknown mode {mode!r}")
    certs = compute_bounds(nnf, ctx, mode=bound_mode)
    bounded = boundify(nnf, certs)
    verdict = model_check_bounded(bounded, 0, full_cache.truth)
    rigor = "rigorous" if mode == "rigorous" else "empirical"
    diag = {
        "N": ctx.N,
        "threshold_mode": ctx.N_mode,
        "atoms": sorted(ctx.atom_J),
    }
    return Verdict(verdict, "irrational-rotation", rigor, certs, diag)
