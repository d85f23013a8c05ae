import random

from gmpy2 import mpq

import pytest

from orbitmc.errors import InvalidInputError, SpecViolationError, WrongRegimeError
from orbitmc.ltl import parse_formula
from orbitmc.predicates import AtomicPredicate
from orbitmc.spectral import RationalMatrix3, classify, closed_form
from orbitmc.orbit_symbolics import OrbitCache
from orbitmc.semilinear import (
    EventuallyPeriodicSpec,
    LassoWord,
    build_lasso,
    lasso_mc,
    real_case_spec,
    rou_case_spec,
)

import oracles


def _diag(a, b, c):
    return RationalMatrix3([[a, 0, 0], [0, b, 0], [0, 0, c]])


def _pred(text):
    return AtomicPredicate.parse("P", text)


def _spec_for(M, s, text):
    cls = classify(M)
    orb = closed_form(M, s, cls)
    pred = _pred(text)
    if getattr(cls, "rou_order", None) is not None:
        return rou_case_spec(pred, orb, cls.rou_order), pred
    return real_case_spec(pred, orb), pred


def _check_honest(M, s, spec, pred, extra):
    oc = OrbitCache(M, s)
    for n in range(spec.N + 1, spec.N + 1 + extra):
        assert spec.holds(n) == pred.holds_q(oc(n)), n


def test_real_growth_example():
    M = _diag(2, mpq(1, 2), mpq(1, 3))
    spec, pred = _spec_for(M, (1, 1, 1), "x1 - 10 > 0")
    assert spec.X == {0, 1} and spec.N >= 3
    _check_honest(M, (1, 1, 1), spec, pred, 40)


def test_real_alternating_example():
    M = _diag(-2, mpq(1, 2), mpq(1, 3))
    spec, pred = _spec_for(M, (1, 1, 1), "x1 > 0")
    assert spec.P == 2 and spec.X == {0}
    _check_honest(M, (1, 1, 1), spec, pred, 40)


def test_real_constant_predicates():
    M = _diag(2, mpq(1, 2), mpq(1, 3))
    spec, _ = _spec_for(M, (1, 1, 1), "x1 - x1 + 1 > 0")
    assert spec.X == {0, 1}
    spec, _ = _spec_for(M, (1, 1, 1), "x1 - x1 >= 0")
    assert spec.X == {0, 1} and spec.N == 0
    spec, _ = _spec_for(M, (1, 1, 1), "x1 - x1 > 0")
    assert spec.X == frozenset()


def test_real_equal_modulus_bases_merge():
    # bases 2 and -2 share a modulus; parity splitting keeps dominance exact
    M = _diag(2, -2, mpq(1, 2))
    spec, pred = _spec_for(M, (1, 1, 1), "x1 + x2 > 0")
    # x1 + x2 = 2^n + (-2)^n: positive at even n, zero at odd n
    assert spec.X == {0}
    _check_honest(M, (1, 1, 1), spec, pred, 40)
    spec2, pred2 = _spec_for(M, (1, 1, 1), "x1 + x2 >= 0")
    assert spec2.X == {0, 1}
    _check_honest(M, (1, 1, 1), spec2, pred2, 40)


def test_real_jordan_block():
    M = RationalMatrix3([[-2, 1, 0], [0, -2, 0], [0, 0, 1]])
    spec, pred = _spec_for(M, (0, 1, 5), "x1 - x3 > 0")
    assert spec.P == 2
    _check_honest(M, (0, 1, 5), spec, pred, 40)


def test_real_spec_honesty_randomized():
    rng = random.Random(2024)
    diags = [2, -2, 1, -1, mpq(1, 2), mpq(-1, 2), mpq(1, 3), 3]
    texts = ["x1 > 0", "x1 + x2 - x3 >= 0", "x1*x2 > 0", "x1^2 - x2^2 - 1 > 0"]
    for _ in range(12):
        d = [rng.choice(diags) for _ in range(3)]
        up = [rng.randint(-1, 1) for _ in range(3)]
        M = RationalMatrix3([[d[0], up[0], up[1]], [0, d[1], up[2]], [0, 0, d[2]]])
        s = tuple(rng.randint(-2, 2) for _ in range(3))
        spec, pred = _spec_for(M, s, rng.choice(texts))
        _check_honest(M, s, spec, pred, 10 * spec.P)


def test_rou_quarter_turn_example():
    M = RationalMatrix3([[0, -2, 0], [2, 0, 0], [0, 0, mpq(1, 2)]])
    cls = classify(M)
    assert cls.rou_order == 4
    spec, pred = _spec_for(M, (1, 0, 1), "x1 >= 0")
    assert spec.P == 8
    # 2^n cos(n pi/2) dominates except at n = 2 mod 4, where the small
    # positive term decides
    assert spec.X == {0, 1, 3, 4, 5, 7}
    _check_honest(M, (1, 0, 1), spec, pred, 200)


def test_rou_order_six_and_three():
    M6 = RationalMatrix3([[0, -4, 0], [1, 2, 0], [0, 0, mpq(1, 3)]])
    assert classify(M6).rou_order == 6
    spec, pred = _spec_for(M6, (1, 1, 1), "x1 - x2 > 0")
    assert spec.P == 12
    _check_honest(M6, (1, 1, 1), spec, pred, 10 * spec.P)
    M3 = RationalMatrix3([[0, -4, 0], [1, -2, 0], [0, 0, 1]])
    assert classify(M3).rou_order == 3
    spec3, pred3 = _spec_for(M3, (1, 0, 2), "x1 + x3 > 0")
    assert spec3.P == 6
    _check_honest(M3, (1, 0, 2), spec3, pred3, 10 * spec3.P)


def test_rou_singular_rho():
    M = RationalMatrix3([[0, -2, 0], [2, 0, 0], [0, 0, 0]])
    cls = classify(M)
    assert cls.rou_order == 4
    spec, pred = _spec_for(M, (1, 1, 1), "x1 + x3 >= 0")
    _check_honest(M, (1, 1, 1), spec, pred, 10 * spec.P)


def test_regime_guards():
    M = _diag(2, mpq(1, 2), mpq(1, 3))
    cls = classify(M)
    orb = closed_form(M, (1, 1, 1), cls)
    with pytest.raises(WrongRegimeError):
        rou_case_spec(_pred("x1 > 0"), orb, None)
    rot = RationalMatrix3(
        [[mpq(3, 5), mpq(-4, 5), 0], [mpq(4, 5), mpq(3, 5), 0], [0, 0, mpq(1, 2)]]
    )
    cls2 = classify(rot)
    assert cls2.rou_order is None
    orb2 = closed_form(rot, (1, 0, 1), cls2)
    with pytest.raises(WrongRegimeError):
        rou_case_spec(_pred("x1 > 0"), orb2, cls2.rou_order)
    with pytest.raises(WrongRegimeError):
        real_case_spec(_pred("x1 > 0"), orb2)


def _oracle_for(M, s, preds):
    oc = OrbitCache(M, s)
    return lambda name, n: preds[name].holds_q(oc(n))


def test_build_lasso_periods_and_contents():
    M = _diag(-2, mpq(1, 2), mpq(1, 3))
    s = (1, 1, 1)
    preds = {
        "P": AtomicPredicate.parse("P", "x1 > 0"),
        "C": AtomicPredicate.parse("C", "x1 - x1 + 1 > 0"),
    }
    cls = classify(M)
    orb = closed_form(M, s, cls)
    specs = {k: real_case_spec(p, orb) for k, p in preds.items()}
    w = build_lasso(specs, _oracle_for(M, s, preds))
    assert w.P == 2
    assert all(row["C"] for row in w.prefix + w.loop)
    # parity atom: loop starts at n = N + 1
    parity = [(w.N + 1 + j) % 2 == 0 for j in range(2)]
    assert [row["P"] for row in w.loop] == parity


def test_build_lasso_lcm_of_periods():
    specs = {
        "A": EventuallyPeriodicSpec(0, 2, {0, 1}),
        "B": EventuallyPeriodicSpec(0, 8, set(range(8))),
    }
    w = build_lasso(specs, lambda name, n: True)
    assert w.P == 8 and w.N == 0


def test_build_lasso_rejects_dishonest_spec():
    M = _diag(-2, mpq(1, 2), mpq(1, 3))
    preds = {"P": AtomicPredicate.parse("P", "x1 > 0")}
    bad = {"P": EventuallyPeriodicSpec(0, 2, {0, 1})}
    with pytest.raises(SpecViolationError):
        build_lasso(bad, _oracle_for(M, (1, 1, 1), preds))


def test_lasso_mc_trivial_cases():
    w = LassoWord([{"P": False}], 1, [{"P": True}])
    assert lasso_mc(w, parse_formula("F P"))
    assert not lasso_mc(w, parse_formula("P"))
    w2 = LassoWord([{"P": True}], 1, [{"P": False}])
    assert not lasso_mc(w2, parse_formula("G P"))
    assert lasso_mc(w2, parse_formula("P"))
    w3 = LassoWord([{"P": False}], 2, [{"P": True}, {"P": False}])
    assert lasso_mc(w3, parse_formula("G F P"))
    assert not lasso_mc(w3, parse_formula("F G P"))


def test_lasso_mc_matches_naive_oracle():
    rng = random.Random(99)
    for trial in range(30):
        np = rng.randint(1, 4)
        P = rng.randint(1, 4)
        prefix = [{"A": rng.random() < 0.5, "B": rng.random() < 0.5} for _ in range(np)]
        loop = [{"A": rng.random() < 0.5, "B": rng.random() < 0.5} for _ in range(P)]
        w = LassoWord(prefix, P, loop)
        ow = oracles.LassoWord(prefix, loop)
        for _ in range(12):
            f = oracles.random_formula(rng, ["A", "B"], rng.randint(1, 4))
            for at in range(np + P):
                assert lasso_mc(w, f, at) == oracles.eval_lasso(f, ow, at), (trial, f, at)


def test_lasso_mc_loop_representation_invariance():
    rng = random.Random(7)
    prefix = [{"A": True}, {"A": False}]
    loop = [{"A": True}, {"A": False}, {"A": False}]
    w = LassoWord(prefix, 3, loop)
    # same infinite word: one loop element moved into the prefix, loop rotated
    w_rot = LassoWord(prefix + [loop[0]], 3, loop[1:] + loop[:1])
    w_unrolled = LassoWord(prefix + loop * 2, 3, loop)
    for _ in range(40):
        f = oracles.random_formula(rng, ["A"], rng.randint(1, 4))
        for at in range(4):
            v = lasso_mc(w, f, at)
            assert v == lasso_mc(w_rot, f, at)
            assert v == lasso_mc(w_unrolled, f, at)


def test_spec_validation():
    with pytest.raises(InvalidInputError):
        EventuallyPeriodicSpec(0, 0, set())
    with pytest.raises(InvalidInputError):
        EventuallyPeriodicSpec(0, 2, {3})
    with pytest.raises(InvalidInputError):
        LassoWord([], 1, [{}])
