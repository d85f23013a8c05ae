"""Finite unions of open arcs on the unit circle with algebraic endpoints.

Endpoints are algebraic points of modulus 1 tagged with the retraction depth
n at which they arose as gamma^-n times a base zero.  All ordering decisions
are exact: points are compared by half-plane class and real part, with
algebraic equality as the tie breaker, so no angle is ever trusted
numerically.  Angles appear only in length *bounds*, which are outward
rational enclosures obtained from interval arctangents.
"""

from __future__ import annotations

import mpmath
from gmpy2 import mpq

from .errors import BoundOverflowError, DomainError, InvalidInputError
from .algebraic import (
    AlgebraicNumber,
    alg_conj,
    alg_equal,
    alg_im,
    alg_mul,
    alg_pow,
    alg_re,
    alg_sign,
    alg_sub,
)


class TorusPoint:
    """Point gamma^-depth * base_zero on the unit circle."""

    __slots__ = ("base_zero", "depth", "value", "_half", "_re", "_cmp")

    def __init__(self, base_zero: AlgebraicNumber, depth: int, value: AlgebraicNumber):
        self.base_zero = base_zero
        self.depth = depth
        self.value = value
        self._half = None
        self._re = None
        self._cmp = {}

    @staticmethod
    def from_zero(z: AlgebraicNumber) -> "TorusPoint":
        return TorusPoint(z, 0, z)

    def __repr__(self):
        b = self.value.ball()
        return f"TorusPoint(~{float(b.re):.4g}{float(b.im):+.4g}i, depth={self.depth})"

    def re_part(self):
        if self._re is None:
            self._re = alg_re(self.value)
        return self._re

    def half_class(self) -> int:
        """0: point 1; 1: upper half; 2: point -1; 3: lower half."""
        if self._half is None:
            s = alg_sign(alg_im(self.value))
            if s > 0:
                self._half = 1
            elif s < 0:
                self._half = 3
            else:
                self._half = 0 if alg_sign(self.re_part()) > 0 else 2
        return self._half


def _abs_cmp(a: TorusPoint, b: TorusPoint) -> int:
    """Order by angle in [0, 2pi) measured from the point 1."""
    if a is b:
        return 0
    cached = a._cmp.get(id(b))
    if cached is not None:
        # the entry pins its point, so the id cannot have been recycled
        return cached[1]
    ha, hb = a.half_class(), b.half_class()
    if ha != hb:
        r = -1 if ha < hb else 1
    elif ha in (0, 2):
        r = 0
    else:
        c = alg_sign(alg_sub(a.re_part(), b.re_part()))
        if c == 0:
            r = 0
        elif ha == 1:
            # upper half: increasing angle means decreasing real part
            r = -1 if c > 0 else 1
        else:
            r = -1 if c < 0 else 1
    a._cmp[id(b)] = (b, r)
    b._cmp[id(a)] = (a, -r)
    return r


def points_equal(a: TorusPoint, b: TorusPoint) -> bool:
    return _abs_cmp(a, b) == 0


def circular_compare(a: TorusPoint, b: TorusPoint, ref: TorusPoint) -> int:
    """Order counterclockwise starting at ref; 0 only for equal points."""
    if _abs_cmp(a, b) == 0:
        return 0
    ca = _abs_cmp(a, ref)
    cb = _abs_cmp(b, ref)
    if ca == 0:
        return -1
    if cb == 0:
        return 1
    if (ca > 0) == (cb > 0):
        return _abs_cmp(a, b)
    return -1 if ca > 0 else 1


class Arc:
    """Open arc traversed counterclockwise from start to end."""

    __slots__ = ("start", "end")

    def __init__(self, start: TorusPoint, end: TorusPoint):
        if points_equal(start, end):
            raise InvalidInputError("arc endpoints must be distinct")
        self.start = start
        self.end = end

    def __repr__(self):
        return f"Arc({self.start!r} -> {self.end!r})"

    def contains(self, p: TorusPoint) -> bool:
        if points_equal(p, self.start):
            return False
        return circular_compare(p, self.end, self.start) < 0


class TorusSet:
    """Full circle, a finite union of disjoint open arcs, or the full circle
    minus a single point.

    The single-puncture state exists because boolean combinations of open
    arcs can produce the circle minus one point, which has no arc
    representation (arcs must have distinct endpoints).  Two or more removed
    points are always representable as arcs and are canonicalized as such.
    """

    __slots__ = ("full", "arcs", "puncture")

    def __init__(self, full: bool, arcs, puncture=None):
        self.full = full
        self.arcs = [] if full else sorted(arcs, key=_SortKey)
        self.puncture = puncture
        if full and arcs:
            raise InvalidInputError("full set carries no arcs")
        if puncture is not None and not full:
            raise InvalidInputError("puncture only applies to the full state")

    @staticmethod
    def full_set() -> "TorusSet":
        return TorusSet(True, [])

    @staticmethod
    def empty_set() -> "TorusSet":
        return TorusSet(False, [])

    @property
    def is_empty(self) -> bool:
        return not self.full and not self.arcs

    @property
    def is_all(self) -> bool:
        return self.full and self.puncture is None

    def __repr__(self):
        if self.full:
            if self.puncture is not None:
                return f"TorusSet(Full minus {self.puncture!r})"
            return "TorusSet(Full)"
        return f"TorusSet({self.arcs!r})"

    def contains_point(self, p: TorusPoint) -> bool:
        if self.full:
            return self.puncture is None or not points_equal(p, self.puncture)
        return any(arc.contains(p) for arc in self.arcs)

    def contains_value(self, z: AlgebraicNumber) -> bool:
        return self.contains_point(TorusPoint.from_zero(z))

    def max_depth(self) -> int:
        d = 0
        for arc in self.arcs:
            d = max(d, arc.start.depth, arc.end.depth)
        if self.puncture is not None:
            d = max(d, self.puncture.depth)
        return d

    def describe(self, bits=32):
        out = []
        if self.full:
            return [{"full": True, "punctured": self.puncture is not None}]
        for arc in self.arcs:
            lo_s, hi_s = _angle_enclosure(arc.start, bits)
            lo_e, hi_e = _angle_enclosure(arc.end, bits)
            out.append(
                {
                    "start_angle": [float(lo_s), float(hi_s)],
                    "end_angle": [float(lo_e), float(hi_e)],
                    "start_depth": arc.start.depth,
                    "end_depth": arc.end.depth,
                }
            )
        return out


class _SortKey:
    """Comparison adapter placing arcs in absolute circular start order."""

    __slots__ = ("arc",)

    def __init__(self, arc):
        self.arc = arc

    def __lt__(self, other):
        c = _abs_cmp(self.arc.start, other.arc.start)
        return c < 0


# ---------------------------------------------------------------------------
# boolean operations via an endpoint sweep


def _dedupe_points(points):
    """Distinct points, each represented at its smallest known depth."""
    out = []
    for p in points:
        for i, q in enumerate(out):
            if points_equal(p, q):
                if p.depth < q.depth:
                    out[i] = p
                break
        else:
            out.append(p)
    return out


def _sort_circular(points):
    # insertion sort with the exact comparator; endpoint counts are small
    out = []
    for p in points:
        i = 0
        while i < len(out) and _abs_cmp(out[i], p) < 0:
            i += 1
        out.insert(i, p)
    return out


def _elementary_arc_in(p, q, S: TorusSet) -> bool:
    """Is the open arc between consecutive cut points p, q inside S?"""
    if S.full:
        return True
    for arc in S.arcs:
        s, e = arc.start, arc.end
        p_ok = points_equal(p, s) or (
            not points_equal(p, e) and circular_compare(p, e, s) < 0
        )
        if not p_ok:
            continue
        if points_equal(q, e) or (
            not points_equal(q, s) and circular_compare(q, e, s) < 0
        ):
            return True
    return False


def _endpoints(S: TorusSet):
    pts = [a.start for a in S.arcs] + [a.end for a in S.arcs]
    if S.puncture is not None:
        pts.append(S.puncture)
    return pts


def _boolean(A: TorusSet, B: TorusSet, op) -> TorusSet:
    points = _dedupe_points(_endpoints(A) + _endpoints(B))
    if not points:
        return TorusSet.full_set() if op(A.full, B.full) else TorusSet.empty_set()
    points = _sort_circular(points)
    m = len(points)
    arc_in = []
    pt_in = []
    for i in range(m):
        p, q = points[i], points[(i + 1) % m]
        arc_in.append(op(_elementary_arc_in(p, q, A), _elementary_arc_in(p, q, B)))
        pt_in.append(op(A.contains_point(p), B.contains_point(p)))
    if all(arc_in) and all(pt_in):
        return TorusSet.full_set()
    if all(arc_in):
        excluded = [points[i] for i in range(m) if not pt_in[i]]
        if len(excluded) == 1:
            return TorusSet(True, [], puncture=excluded[0])
    # boolean combinations of open sets are open: an included point always
    # has both neighboring elementary arcs included, so runs of included
    # pieces start and end with arcs; an excluded point between two included
    # arcs separates two runs (abutting open arcs stay separate)
    arcs = []
    for i in range(m):
        if not arc_in[i] or (arc_in[(i - 1) % m] and pt_in[i]):
            continue
        j = i
        while j - i < m and arc_in[(j + 1) % m] and pt_in[(j + 1) % m]:
            j += 1
        arcs.append(Arc(points[i], points[(j + 1) % m]))
    return TorusSet(False, arcs)


def union(A: TorusSet, B: TorusSet) -> TorusSet:
    if A.is_all or B.is_all:
        return TorusSet.full_set()
    if A.is_empty:
        return B
    if B.is_empty:
        return A
    return _boolean(A, B, lambda x, y: x or y)


def intersect(A: TorusSet, B: TorusSet) -> TorusSet:
    if A.is_all:
        return B
    if B.is_all:
        return A
    if A.is_empty or B.is_empty:
        return TorusSet.empty_set()
    return _boolean(A, B, lambda x, y: x and y)


def set_equal(A: TorusSet, B: TorusSet) -> bool:
    if A.full or B.full:
        if not (A.full and B.full):
            return False
        if (A.puncture is None) != (B.puncture is None):
            return False
        return A.puncture is None or points_equal(A.puncture, B.puncture)
    if len(A.arcs) != len(B.arcs):
        return False
    for x, y in zip(A.arcs, B.arcs):
        if not (points_equal(x.start, y.start) and points_equal(x.end, y.end)):
            return False
    return True


# ---------------------------------------------------------------------------
# rotation


def rotate_inv_gamma(A: TorusSet, gamma: AlgebraicNumber, steps: int) -> TorusSet:
    """gamma^-steps * A; rotation preserves the arc structure."""
    if steps < 0:
        raise InvalidInputError("steps must be nonnegative")
    if steps == 0 or A.is_all or A.is_empty:
        return A
    g = alg_pow(alg_conj(gamma), steps)  # |gamma| = 1, so conj is the inverse
    cache = {}

    def move(p: TorusPoint) -> TorusPoint:
        got = cache.get(id(p))
        if got is None:
            got = TorusPoint(p.base_zero, p.depth + steps, alg_mul(p.value, g))
            cache[id(p)] = got
        return got

    if A.full:
        return TorusSet(True, [], puncture=move(A.puncture))
    return TorusSet(False, [Arc(move(a.start), move(a.end)) for a in A.arcs])


# ---------------------------------------------------------------------------
# lengths and the return bound


def _pi_bounds(bits: int):
    with mpmath.workprec(bits + 8):
        piv = mpmath.iv.pi
        return _iv_to_mpq(piv.a), _iv_to_mpq(piv.b)


def _iv_to_mpq(x):
    from .algebraic import _mpf_to_mpq

    return _mpf_to_mpq(mpmath.mpf(x))


def _dyadic_iv(lo, hi, bits):
    """Exact mpmath interval containing [lo, hi] for rational bounds."""
    scale = 1 << bits
    lo_n = (lo * scale).numerator // (lo * scale).denominator  # floor
    hi_s = hi * scale
    hi_n = -((-hi_s).numerator // hi_s.denominator)  # ceil
    return mpmath.iv.mpf(
        [mpmath.mpf(int(lo_n)) / scale, mpmath.mpf(int(hi_n)) / scale]
    )


def _angle_enclosure(p: TorusPoint, bits: int):
    """Rational (lo, hi) with the angle of p in [lo, hi], branch (-pi, pi]."""
    v = p.value
    if v.is_rational:
        r = v.as_rational()
        if r == 1:
            return mpq(0), mpq(0)
        if r == -1:
            return _pi_bounds(bits)
        raise DomainError("rational point off the unit circle")
    for _ in range(24):
        ball = v.refine(mpq(1, 1 << bits))
        re_lo, re_hi = ball.re - ball.radius, ball.re + ball.radius
        im_lo, im_hi = ball.im - ball.radius, ball.im + ball.radius
        half = p.half_class()
        if half in (1, 3) and im_lo <= 0 <= im_hi:
            bits *= 2  # refine until the ball decides the imaginary sign
            continue
        with mpmath.workprec(bits + 24):
            a = mpmath.iv.atan2(
                _dyadic_iv(im_lo, im_hi, bits + 8), _dyadic_iv(re_lo, re_hi, bits + 8)
            )
            lo, hi = _iv_to_mpq(a.a), _iv_to_mpq(a.b)
        if hi - lo <= 3:
            return lo, hi
        bits *= 2  # enclosure straddled the branch cut near -1
    raise DomainError("angle enclosure did not converge")


def _arc_length_bounds(arc: Arc, bits: int):
    """Outward rational bounds on the arc length, or None if unresolved."""
    s_lo, s_hi = _angle_enclosure(arc.start, bits)
    e_lo, e_hi = _angle_enclosure(arc.end, bits)
    if not (e_lo > s_hi or e_hi < s_lo):
        return None
    pi_lo, pi_hi = _pi_bounds(bits)
    wrap = e_hi < s_lo
    lo = e_lo - s_hi + (2 * pi_lo if wrap else 0)
    hi = e_hi - s_lo + (2 * pi_hi if wrap else 0)
    if lo <= 0:
        return None
    return lo, hi


def _resolved_length(arc: Arc, rel=mpq(1, 8)):
    bits = 32
    while True:
        got = _arc_length_bounds(arc, bits)
        if got is not None:
            lo, hi = got
            if hi - lo <= lo * rel:
                return lo, hi
        bits *= 2
        if bits > 1 << 16:
            raise DomainError("arc length refinement did not converge")


def min_component_length(A: TorusSet):
    """Rational lower bound on the length of the smallest arc."""
    if A.is_all or A.is_empty:
        raise DomainError("length of empty or full set is undefined")
    if A.full:
        return 2 * _pi_bounds(64)[0]  # single component: circle minus a point
    return min(_resolved_length(a)[0] for a in A.arcs)


def max_component_length(A: TorusSet):
    """Rational lower bound on the length of a maximal arc."""
    if A.is_all or A.is_empty:
        raise DomainError("length of empty or full set is undefined")
    if A.full:
        return 2 * _pi_bounds(64)[0]
    return max(_resolved_length(a)[0] for a in A.arcs)


RETURN_BOUND_BIT_LIMIT = 1 << 23


def return_bound(A: TorusSet, gamma: AlgebraicNumber, D: int) -> int:
    """Integer b = ceil(2pi * (2pi/l)^(|gamma|^D)), l a maximal arc length.

    Every circle point re-enters A within b rotation steps by gamma.
    """
    if A.is_empty:
        raise DomainError("return bound of the empty set is undefined")
    pi_lo, pi_hi = _pi_bounds(64)
    if A.full:
        l_lo = 2 * pi_lo
    else:
        l_lo = max_component_length(A)
    exponent = gamma.rep_size() ** D
    ratio = 2 * pi_hi / l_lo
    if ratio < 1:
        ratio = mpq(1)
    ratio_bits = int(ratio.numerator).bit_length() - int(ratio.denominator).bit_length() + 1
    if exponent * max(1, ratio_bits) > RETURN_BOUND_BIT_LIMIT:
        raise BoundOverflowError(
            f"return bound 2pi*(2pi/l)^{exponent} exceeds the representable limit"
        )
    val = 2 * pi_hi * ratio**exponent
    num, den = int(val.numerator), int(val.denominator)
    return -(-num // den)


# ---------------------------------------------------------------------------
# temporal set constructions

UNTIL_ITERATION_CAP = 4096


def cover_steps(A: TorusSet, gamma: AlgebraicNumber, cap=UNTIL_ITERATION_CAP) -> int:
    """Smallest b such that the rotated copies gamma^-delta A, delta <= b,
    cover the circle; then every point enters A within b rotation steps.

    This is the certified counterpart of the closed-form return_bound: it
    is never larger, and for well-conditioned sets it is small enough to
    drive a bounded scan.
    """
    if A.is_empty:
        raise DomainError("the empty set is never entered")
    if A.is_all:
        return 0
    cover = A
    rotated = A
    for delta in range(1, cap + 1):
        rotated = rotate_inv_gamma(rotated, gamma, 1)
        cover = union(cover, rotated)
        if cover.is_all:
            return delta
    raise BoundOverflowError(f"rotated copies did not cover the circle in {cap} steps")


def until_set(
    J1: TorusSet, J2: TorusSet, gamma: AlgebraicNumber, D: int, cap=UNTIL_ITERATION_CAP
) -> TorusSet:
    """Union over delta of gamma^-delta J2 intersected with the running
    intersection of gamma^-m J1 for m < delta.

    Stops early as soon as the running intersection is empty or the union is
    the full circle; both stops leave the result unchanged.  Otherwise the
    construction runs until the rotated copies of J2 have covered the whole
    circle, say after b steps: every point re-enters J2 within b steps, so
    later terms add nothing new.  No covering within cap steps raises.
    """
    if J2.is_empty:
        return TorusSet.empty_set()
    result = J2
    running = TorusSet.full_set()
    cover = J2
    rot2 = J2
    b = None
    delta = 1
    while True:
        if result.is_all:
            return result
        # extend the running intersection with gamma^-(delta-1) J1
        running = intersect(running, rotate_inv_gamma(J1, gamma, delta - 1))
        if running.is_empty:
            return result
        rot2 = rotate_inv_gamma(rot2, gamma, 1)
        term = intersect(rot2, running)
        result = union(result, term)
        if b is None:
            cover = union(cover, rot2)
            if cover.is_all:
                b = delta
        if b is not None and delta >= b:
            return result
        if delta >= cap:
            raise BoundOverflowError(
                f"until-set construction did not stabilize within {cap} steps"
            )
        delta += 1


def release_set(
    J1: TorusSet, J2: TorusSet, gamma: AlgebraicNumber, D: int, cap=UNTIL_ITERATION_CAP
) -> TorusSet:
    """J for phi1 R phi2, reduced to J2 U (J1 and J2) with an empty-case rule."""
    J12 = intersect(J1, J2)
    if J12.is_empty:
        # punctures count as full here: beyond the dominance threshold the
        # orbit never hits arc endpoints, so the puncture is invisible
        return TorusSet.full_set() if J2.full else TorusSet.empty_set()
    return until_set(J2, J12, gamma, D, cap)
