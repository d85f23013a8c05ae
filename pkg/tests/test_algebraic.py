import math

from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

import pytest

from orbitmc.errors import DomainError
from orbitmc.intpoly import IntPolynomial, mignotte_separation
from orbitmc import algebraic as alg
from orbitmc.algebraic import (
    AlgebraicNumber,
    ComplexBall,
    alg_abs,
    alg_add,
    alg_conj,
    alg_equal,
    alg_im,
    alg_inv,
    alg_mul,
    alg_neg,
    alg_pow,
    alg_re,
    alg_sign,
    alg_sub,
    baker_gap,
    is_root_of_unity,
    poly_complex_roots,
    poly_real_roots,
)


def _root_near(roots, value):
    best = min(roots, key=lambda r: abs(complex(float(r.ball().re), float(r.ball().im)) - value))
    return best


def sqrt_of(n):
    return _root_near(poly_real_roots(IntPolynomial([-n, 0, 1])), math.sqrt(n))


def test_rational_roundtrip():
    a = AlgebraicNumber.from_rational(mpq(-7, 3))
    assert a.is_rational and a.is_real()
    assert a.as_rational() == mpq(-7, 3)
    assert alg_sign(a) == -1


def test_real_isolation_sqrt2():
    roots = poly_real_roots(IntPolynomial([-2, 0, 1]))
    assert len(roots) == 2
    neg, pos = roots
    assert float(neg.ball().re) < 0 < float(pos.ball().re)
    ball = pos.refine(mpq(1, 10**12))
    assert abs(float(ball.re) - math.sqrt(2)) < 1e-11


def test_isolation_radius_invariant():
    p = IntPolynomial([-2, 0, 1])
    cap = mignotte_separation(p) / 4
    for r in poly_real_roots(p):
        assert r.radius < cap


def test_complex_isolation_quadratic():
    # discriminant oracle for 5x^2 - 6x + 5: roots (6 +- sqrt(-64)) / 10
    roots = poly_complex_roots(IntPolynomial([5, -6, 5]))
    assert len(roots) == 2
    vals = sorted(
        [complex(float(r.ball().re), float(r.ball().im)) for r in roots], key=lambda z: z.imag
    )
    assert abs(vals[0] - complex(0.6, -0.8)) < 1e-6
    assert abs(vals[1] - complex(0.6, 0.8)) < 1e-6
    assert not roots[0].is_real()


def test_complex_isolation_mixed_degree():
    # x^3 - 1: one real root, one conjugate pair
    roots = poly_complex_roots(IntPolynomial([-1, 0, 0, 1]))
    assert len(roots) == 3
    assert sum(1 for r in roots if r.is_real()) == 1


def test_refine_ball_contains_root():
    pos = sqrt_of(2)
    ball = pos.refine(mpq(1, 10**6))
    assert ball.radius <= mpq(1, 10**6)
    assert ball.eval_int_poly(pos.min_poly).contains_zero()


def test_add_known_value():
    s = alg_add(sqrt_of(2), sqrt_of(3))
    assert s.min_poly == IntPolynomial([1, 0, -10, 0, 1])
    assert abs(float(s.refine(mpq(1, 10**9)).re) - (math.sqrt(2) + math.sqrt(3))) < 1e-8


def test_mul_known_value():
    p = alg_mul(sqrt_of(2), sqrt_of(3))
    assert p.min_poly == IntPolynomial([-6, 0, 1])


def test_sub_gives_zero():
    a = sqrt_of(2)
    z = alg_sub(a, a)
    assert z.is_rational and z.as_rational() == 0


def test_rational_shortcuts():
    a = sqrt_of(2)
    half = AlgebraicNumber.from_rational(mpq(1, 2))
    b = alg_mul(a, half)  # sqrt2/2 = 1/sqrt2
    assert alg_equal(b, alg_inv(a))
    c = alg_add(a, AlgebraicNumber.from_rational(3))
    assert c.min_poly == IntPolynomial([7, -6, 1])  # (x-3)^2 = 2


def test_inv_and_sign():
    a = sqrt_of(2)
    inv = alg_inv(a)
    assert alg_equal(alg_mul(a, inv), AlgebraicNumber.from_rational(1))
    assert alg_sign(inv) == 1
    assert alg_sign(alg_neg(inv)) == -1
    with pytest.raises(DomainError):
        alg_inv(AlgebraicNumber.from_rational(0))


def test_conj_re_im_abs():
    g = _root_near(poly_complex_roots(IntPolynomial([5, -6, 5])), complex(0.6, 0.8))
    assert alg_re(g).as_rational() == mpq(3, 5)
    assert alg_im(g).as_rational() == mpq(4, 5)
    assert alg_abs(g).as_rational() == 1
    prod = alg_mul(g, alg_conj(g))
    assert prod.as_rational() == 1


def test_re_im_irrational():
    z = _root_near(poly_complex_roots(IntPolynomial([1, -1, 1])), complex(0.5, 0.8660254))
    assert alg_re(z).as_rational() == mpq(1, 2)
    im = alg_im(z)
    assert im.min_poly == IntPolynomial([-3, 0, 2]).primitive() or im.min_poly == IntPolynomial([-3, 0, 4])
    assert alg_sign(im) == 1


def test_abs_real_negative():
    a = alg_neg(sqrt_of(2))
    assert alg_equal(alg_abs(a), sqrt_of(2))


def test_equal_distinguishes_conjugates():
    roots = poly_complex_roots(IntPolynomial([5, -6, 5]))
    assert not alg_equal(roots[0], roots[1])
    assert alg_equal(roots[0], roots[0])
    assert alg_equal(roots[1], alg_conj(roots[0]))


def test_pow():
    a = sqrt_of(2)
    assert alg_pow(a, 2).as_rational() == 2
    assert alg_pow(a, 0).as_rational() == 1
    assert alg_pow(a, -2).as_rational() == mpq(1, 2)
    assert alg_equal(alg_pow(a, 3), alg_mul(a, AlgebraicNumber.from_rational(2)))


def test_root_of_unity_orders():
    # cyclotomic minimal polynomials, order <= 12
    cases = {
        1: IntPolynomial([-1, 1]),
        2: IntPolynomial([1, 1]),
        3: IntPolynomial([1, 1, 1]),
        4: IntPolynomial([1, 0, 1]),
        6: IntPolynomial([1, -1, 1]),
        5: IntPolynomial([1, 1, 1, 1, 1]),
        8: IntPolynomial([1, 0, 0, 0, 1]),
        12: IntPolynomial([1, 0, -1, 0, 1]),
    }
    for order, p in cases.items():
        roots = poly_complex_roots(p)
        found = {is_root_of_unity(r) for r in roots}
        # every root of a cyclotomic polynomial is primitive: same order for all
        assert found == {order}


def test_root_of_unity_rejects_unit_modulus_nonroot():
    g = _root_near(poly_complex_roots(IntPolynomial([5, -6, 5])), complex(0.6, 0.8))
    assert is_root_of_unity(g) is None


def test_root_of_unity_requires_unit_modulus():
    with pytest.raises(DomainError):
        is_root_of_unity(sqrt_of(2))


def test_baker_gap_shape():
    a = sqrt_of(2)
    b = sqrt_of(3)
    g = baker_gap(a, b, 10, 1)
    assert 0 < g < 1
    assert g == mpq(1, 10 ** (a.rep_size() + b.rep_size()))
    assert baker_gap(a, b, 100, 1) < g


@given(st.fractions(min_value=-20, max_value=20), st.fractions(min_value=-20, max_value=20))
@settings(max_examples=40)
def test_rational_arith_agrees(x, y):
    a = AlgebraicNumber.from_rational(mpq(x.numerator, x.denominator))
    b = AlgebraicNumber.from_rational(mpq(y.numerator, y.denominator))
    assert alg_add(a, b).as_rational() == a.as_rational() + b.as_rational()
    assert alg_mul(a, b).as_rational() == a.as_rational() * b.as_rational()


@given(st.integers(2, 30).filter(lambda n: math.isqrt(n) ** 2 != n), st.fractions(min_value=-5, max_value=5).filter(lambda f: f != 0))
@settings(max_examples=25, deadline=None)
def test_scaled_surd_refines_consistently(n, f):
    r = mpq(f.numerator, f.denominator)
    a = sqrt_of(n)
    b = alg_mul(a, AlgebraicNumber.from_rational(r))
    ball = b.refine(mpq(1, 10**9))
    assert abs(float(ball.re) - math.sqrt(n) * float(r)) < 1e-7
    assert ball.eval_int_poly(b.min_poly).contains_zero()


def test_ball_arithmetic_soundness():
    a = ComplexBall(mpq(1), mpq(2), mpq(1, 100))
    b = ComplexBall(mpq(-3), mpq(1, 2), mpq(1, 50))
    s = a.add(b)
    assert s.re == -2 and s.im == mpq(5, 2) and s.radius == mpq(3, 100)
    m = a.mul(b)
    # center is the product of centers
    assert m.re == 1 * -3 - 2 * mpq(1, 2)
    assert m.im == 1 * mpq(1, 2) + 2 * -3
    inv = b.inv()
    assert inv is not None
    # true reciprocal of the center lies inside
    n2 = b.re * b.re + b.im * b.im
    assert abs(inv.re - b.re / n2) <= inv.radius
