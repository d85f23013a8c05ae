import random

from gmpy2 import mpq

import pytest

from orbitmc.errors import (
    BoundOverflowError,
    DomainError,
    InvalidInputError,
    WrongRegimeError,
)
from orbitmc.ltl import (
    And,
    Atom,
    BoundedRelease,
    BoundedUntil,
    Next,
    Not,
    Or,
    parse_formula,
    to_negation_free,
)
from orbitmc.predicates import AtomicPredicate
from orbitmc.spectral import RationalMatrix3, classify
from orbitmc.torus import TorusSet, cover_steps
from orbitmc.bounded import (
    BigMagnitude,
    OracleCache,
    boundify,
    check,
    compute_bounds,
    membership_oracle,
    model_check_bounded,
    rotation_context,
)

ROT_HALF = RationalMatrix3(
    [[mpq(3, 5), mpq(-4, 5), 0], [mpq(4, 5), mpq(3, 5), 0], [0, 0, mpq(1, 2)]]
)
IDENTITY = RationalMatrix3([[1, 0, 0], [0, 1, 0], [0, 0, 1]])


def _pred(name, text):
    return AtomicPredicate.parse(name, text)


# ---------------------------------------------------------------------------
# membership oracle


def test_membership_oracle_examples():
    p = _pred("P", "x1 > 0")
    for n in (0, 1, 7, 100):
        assert membership_oracle(IDENTITY, (1, 0, 0), n, p)
    M = RationalMatrix3([[-2, 0, 0], [0, 1, 0], [0, 0, 1]])
    assert not membership_oracle(M, (1, 1, 1), 3, p)
    q = _pred("Q", "x1 >= 0")
    # two exact applications of the rotation-scale matrix land at x1 = -7/25
    assert not membership_oracle(ROT_HALF, (1, 0, 1), 2, q)


def test_oracle_cache_matches_naive_powers():
    preds = {"P": _pred("P", "x1 - x2 > 0")}
    cache = OracleCache(ROT_HALF, (1, 0, 1), preds)
    v = (mpq(1), mpq(0), mpq(1))
    for n in range(0, 40):
        assert cache.point(n) == v, n
        v = ROT_HALF.mat_vec(v)
    # large positions via the squaring ladder only
    big = cache.point(2**20 + 3)
    assert all(isinstance(x, type(mpq(0))) for x in big)


def test_oracle_cache_clear_is_transparent():
    preds = {"P": _pred("P", "x1 > 0"), "Q": _pred("Q", "x2 >= 0")}
    cache = OracleCache(ROT_HALF, (1, 0, 1), preds)
    before = [(cache.truth("P", n), cache.truth("Q", n)) for n in range(50)]
    cache.clear_cache()
    after = [(cache.truth("P", n), cache.truth("Q", n)) for n in range(50)]
    assert before == after
    with pytest.raises(InvalidInputError):
        cache.point(-1)


# ---------------------------------------------------------------------------
# magnitudes


def test_big_magnitude_exact_arithmetic():
    a = BigMagnitude.of(12)
    b = BigMagnitude.of(5)
    assert a.add(b).to_int(100) == 17
    assert a.mul(b).to_int(100) == 60
    assert b.pow(2).to_int(100) == 25
    assert b.le(a) and not a.le(b)
    assert repr(a) == "12"


def test_big_magnitude_promotes_and_rounds_up():
    big = BigMagnitude.of(3).pow(BigMagnitude.of(10**6))
    assert not big.is_exact
    # 3^(10^6) needs about 1.58 * 10^6 bits; the tracked bound must cover it
    assert BigMagnitude.of(1_500_000).le(big.log2u())
    assert repr(big).startswith("2^(")
    with pytest.raises(BoundOverflowError):
        big.to_int(10**9)
    tower = big.pow(big)
    assert big.le(tower)
    assert not tower.le(BigMagnitude.of(2))


def test_big_magnitude_validation():
    with pytest.raises(InvalidInputError):
        BigMagnitude.of(-1)
    with pytest.raises(InvalidInputError):
        BigMagnitude(n=1, e=BigMagnitude.of(1))
    with pytest.raises(InvalidInputError):
        BigMagnitude()


# ---------------------------------------------------------------------------
# bounded evaluation


def test_model_check_bounded_base_cases():
    word = [{"A": False, "B": True}, {"A": True, "B": False},
            {"A": True, "B": False}, {"A": True, "B": True}]
    oracle = lambda name, n: word[min(n, len(word) - 1)][name]
    assert model_check_bounded(BoundedUntil(Atom("A"), Atom("B"), 0), 0, oracle)
    # window exhausts without the right operand ever holding
    f = BoundedUntil(Atom("A"), Not(Atom("B")), 5)
    assert not model_check_bounded(f, 3, oracle)
    # the right operand holds throughout the window, no release needed
    g = BoundedRelease(Atom("B"), Atom("A"), 2)
    assert model_check_bounded(g, 1, oracle)
    assert model_check_bounded(Next(Atom("A")), 0, oracle)


def _random_bounded(rng, atoms, depth):
    if depth == 0 or rng.random() < 0.3:
        return Atom(rng.choice(atoms))
    kind = rng.randrange(5)
    if kind == 0:
        return Not(_random_bounded(rng, atoms, depth - 1))
    if kind == 1:
        return Next(_random_bounded(rng, atoms, depth - 1))
    left = _random_bounded(rng, atoms, depth - 1)
    right = _random_bounded(rng, atoms, depth - 1)
    if kind == 2:
        return And(left, right)
    if kind == 3:
        return Or(left, right)
    bound = rng.randint(0, 6)
    if rng.random() < 0.5:
        return BoundedUntil(left, right, bound)
    return BoundedRelease(left, right, bound)


def _naive_eval(f, n, oracle):
    if isinstance(f, Atom):
        return oracle(f.name, n)
    if isinstance(f, Not):
        return not _naive_eval(f.sub, n, oracle)
    if isinstance(f, Next):
        return _naive_eval(f.sub, n + 1, oracle)
    if isinstance(f, And):
        return _naive_eval(f.left, n, oracle) and _naive_eval(f.right, n, oracle)
    if isinstance(f, Or):
        return _naive_eval(f.left, n, oracle) or _naive_eval(f.right, n, oracle)
    if isinstance(f, BoundedUntil):
        for i in range(f.bound + 1):
            if _naive_eval(f.right, n + i, oracle):
                return True
            if not _naive_eval(f.left, n + i, oracle):
                return False
        return False
    if isinstance(f, BoundedRelease):
        for i in range(f.bound + 1):
            if not _naive_eval(f.right, n + i, oracle):
                return False
            if _naive_eval(f.left, n + i, oracle):
                return True
        return True
    raise AssertionError(f)


def test_model_check_bounded_matches_naive_reference():
    rng = random.Random(4242)
    atoms = ["A", "B", "C"]
    for trial in range(500):
        period = rng.randint(1, 6)
        word = [{a: rng.random() < 0.5 for a in atoms} for _ in range(period)]
        oracle = lambda name, n: word[n % period][name]
        f = _random_bounded(rng, atoms, rng.randint(1, 4))
        at = rng.randrange(3)
        assert model_check_bounded(f, at, oracle) == _naive_eval(f, at, oracle), (
            trial,
            f,
        )


# ---------------------------------------------------------------------------
# rotation-regime bounds


def _rot_ctx(mode="empirical", horizon=2000, s=(1, 0, 1), preds=None):
    if preds is None:
        preds = {"P": _pred("P", "x1 > 0"), "Q": _pred("Q", "x2 > 0")}
    cls = classify(ROT_HALF)
    return (
        rotation_context(ROT_HALF, s, preds, cls, mode=mode, horizon=horizon),
        preds,
    )


def test_cover_steps_basic():
    full = TorusSet.full_set()
    cls = classify(ROT_HALF)
    assert cover_steps(full, cls.gamma) == 0
    with pytest.raises(DomainError):
        cover_steps(TorusSet.empty_set(), cls.gamma)
    ctx, _ = _rot_ctx()
    half = ctx.atom_J["P"]
    b = cover_steps(half, cls.gamma)
    assert 1 <= b <= 16
    # covering is monotone under taking a superset
    ctx2, _ = _rot_ctx(preds={"W": _pred("W", "x1 > 0"), "V": _pred("V", "x2 > 0")})
    from orbitmc.torus import union

    assert cover_steps(union(half, ctx2.atom_J["V"]), cls.gamma) <= b


def test_interval_bounds_are_small_here():
    ctx, preds = _rot_ctx()
    nnf, table = to_negation_free(parse_formula("P U Q"), preds)
    certs = compute_bounds(nnf, ctx, mode="interval")
    (cert,) = certs.values()
    assert cert.mode == "interval-derived"
    assert cert.b <= 16 and cert.B == ctx.N + cert.b


def test_interval_bound_full_target_is_one_step():
    ctx, preds = _rot_ctx(
        preds={"P": _pred("P", "x1 > 0"), "T": _pred("T", "x1^2 + x2^2 >= 0")}
    )
    assert ctx.atom_J["T"].is_all
    nnf, table = to_negation_free(parse_formula("P U T"), preds)
    certs = compute_bounds(nnf, ctx, mode="interval")
    (cert,) = certs.values()
    assert cert.b <= 1


def test_rigorous_bounds_finite_monotone_reproducible():
    ctx, preds = _rot_ctx(mode="rigorous")
    reprs = {}
    by_depth = {}
    for text in ["F Q", "G (F Q)", "F (G (F Q))"]:
        nnf, table = to_negation_free(parse_formula(text), preds)
        certs = compute_bounds(nnf, ctx, mode="rigorous")
        for cert in certs.values():
            assert cert.mode == "rigorous"
            assert cert.d_inv is not None and cert.b is not None
            by_depth.setdefault(cert.depth, cert.B)
            prev = reprs.setdefault((text, cert.depth), repr(cert.B))
            assert prev == repr(cert.B)
    assert set(by_depth) == {1, 2, 3}
    assert by_depth[1].le(by_depth[2]) and by_depth[2].le(by_depth[3])
    assert not by_depth[2].le(by_depth[1])
    # second run reproduces the magnitudes bit for bit
    ctx2, _ = _rot_ctx(mode="rigorous")
    nnf, table = to_negation_free(parse_formula("G (F Q)"), preds)
    for cert in compute_bounds(nnf, ctx2, mode="rigorous").values():
        assert repr(cert.B) == reprs[("G (F Q)", cert.depth)]


def test_rigorous_bounds_overflow_the_loop_cap():
    with pytest.raises(BoundOverflowError):
        check(
            ROT_HALF,
            (1, 0, 1),
            "F Q",
            {"Q": _pred("Q", "x2 > 0")},
            mode="rigorous",
            horizon=500,
        )


def test_boundify_structure_and_missing_cert():
    f = parse_formula("P U Q")
    certs = {}

    def fill(g):
        from orbitmc.ltl import Until

        if isinstance(g, Until):
            from orbitmc.bounded import BoundCertificate

            certs[g] = BoundCertificate(7, "interval-derived")

    fill(f)
    g = boundify(f, certs)
    assert isinstance(g, BoundedUntil) and g.bound == 7
    with pytest.raises(InvalidInputError):
        boundify(parse_formula("Q U P"), certs)


def test_bound_monotonicity_on_rotation_instance():
    ctx, preds = _rot_ctx()
    cache = OracleCache(ROT_HALF, (1, 0, 1), preds)
    for text in ["P U Q", "Q U P", "P R Q", "Q R P", "(P U Q) U P"]:
        nnf, table = to_negation_free(parse_formula(text), preds)
        full_cache = OracleCache(ROT_HALF, (1, 0, 1), table)
        certs = compute_bounds(nnf, ctx, mode="interval")
        base = model_check_bounded(boundify(nnf, certs), 0, full_cache.truth)
        for cert in certs.values():
            cert.B += 50
        bumped = model_check_bounded(boundify(nnf, certs), 0, full_cache.truth)
        assert base == bumped, text


# ---------------------------------------------------------------------------
# top-level dispatch


def test_check_identity_globally_positive():
    v = check(IDENTITY, (1, 1, 1), "G P", {"P": _pred("P", "x1 > 0")})
    assert v.verdict is True
    assert v.rigor == "rigorous" and v.regime == "three-real"


def test_check_alternating_infinitely_often():
    M = RationalMatrix3([[-2, 0, 0], [0, mpq(1, 2), 0], [0, 0, mpq(1, 3)]])
    v = check(M, (1, 1, 1), "G (F P)", {"P": _pred("P", "x1 > 0")})
    assert v.verdict is True and v.regime == "three-real"
    v2 = check(M, (1, 1, 1), "F (G P)", {"P": _pred("P", "x1 > 0")})
    assert v2.verdict is False


def test_check_rotation_reaches_boundary_point():
    # pure rotation from (1, 0): x1 >= 1 only at the start, yet F sees it
    preds = {"E": _pred("E", "x1 - 1 >= 0")}
    v = check(ROT_HALF, (1, 0, 0), "F E", preds, mode="empirical", horizon=10**4)
    assert v.verdict is True
    assert v.regime == "irrational-rotation" and v.rigor == "empirical"


def test_check_rotation_until_release():
    preds = {"P": _pred("P", "x1 > 0"), "Q": _pred("Q", "x2 > 0")}
    v = check(ROT_HALF, (1, 0, 1), "P U Q", preds, horizon=2000)
    assert v.verdict is True and v.regime == "irrational-rotation"
    v2 = check(ROT_HALF, (1, 0, 1), "P R Q", preds, horizon=2000)
    assert v2.verdict is False
    v3 = check(ROT_HALF, (1, 0, 1), "G (F (P & Q))", preds, horizon=2000)
    assert v3.verdict is True


def test_check_rotation_agrees_with_long_scan():
    preds = {"P": _pred("P", "x1 > 0"), "Q": _pred("Q", "x2 - x3 > 0")}
    cache = OracleCache(ROT_HALF, (1, 0, 1), preds)
    horizon = 3000
    word = [
        {k: cache.truth(k, n) for k in preds} for n in range(horizon + 200)
    ]

    def scan_until(left, right, at):
        for j in range(at, horizon):
            if word[j][right]:
                return True
            if not word[j][left]:
                return False
        return None

    expected = scan_until("P", "Q", 0)
    assert expected is not None
    v = check(ROT_HALF, (1, 0, 1), "P U Q", preds, horizon=horizon)
    assert v.verdict == expected


def test_check_constant_predicates_short_circuit():
    preds = {"Z": _pred("Z", "x1 - x1 >= 0"), "N": _pred("N", "x1 - x1 > 0")}
    v = check(ROT_HALF, (1, 0, 1), "G Z", preds)
    assert v.verdict is True and v.diagnostics.get("constant")
    v2 = check(ROT_HALF, (1, 0, 1), "F N", preds)
    assert v2.verdict is False


def test_rotation_context_regime_guard():
    M = RationalMatrix3([[0, -2, 0], [2, 0, 0], [0, 0, mpq(1, 2)]])
    cls = classify(M)
    assert cls.rou_order == 4
    with pytest.raises(WrongRegimeError):
        rotation_context(M, (1, 0, 1), {"P": _pred("P", "x1 > 0")}, cls)
    # the dispatcher routes the instance through the lasso engine instead
    v = check(M, (1, 0, 1), "G (F P)", {"P": _pred("P", "x1 >= 0")})
    assert v.regime == "root-of-unity" and v.verdict is True


def test_cross_engine_agreement_on_lasso_instances():
    rng = random.Random(11)
    M = RationalMatrix3([[-2, 0, 0], [0, mpq(1, 2), 0], [0, 0, 1]])
    preds = {"P": _pred("P", "x1 > 0"), "Q": _pred("Q", "x2 + x3 - 1 > 0")}
    cache = OracleCache(M, (1, 1, 1), preds)
    word = [{k: cache.truth(k, n) for k in preds} for n in range(400)]
    oracle = lambda name, n: word[n][name]
    for text in ["P U Q", "Q U P", "G (F P)", "X (X P)", "P R Q", "F (P & Q)"]:
        v = check(M, (1, 1, 1), text, preds)
        assert v.regime == "three-real"
        nnf, table = to_negation_free(parse_formula(text), preds)
        fc = OracleCache(M, (1, 1, 1), table)
        # horizon-determined here: the lasso repeats with period 2 almost
        # immediately, so a generous fixed bound settles every operator
        certs = {}
        from orbitmc.ltl import BoundedRelease as BR
        from orbitmc.ltl import BoundedUntil as BU
        from orbitmc.ltl import Release, Until
        from orbitmc.bounded import BoundCertificate

        stack = [nnf]
        while stack:
            g = stack.pop()
            if isinstance(g, (Until, Release, BU, BR)):
                certs[g] = BoundCertificate(300, "empirical")
            if hasattr(g, "sub"):
                stack.append(g.sub)
            if hasattr(g, "left"):
                stack.extend([g.left, g.right])
        naive = model_check_bounded(boundify(nnf, certs), 0, fc.truth)
        assert v.verdict == naive, text


def test_verdict_bounds_serialize():
    preds = {"P": _pred("P", "x1 > 0"), "Q": _pred("Q", "x2 > 0")}
    v = check(ROT_HALF, (1, 0, 1), "P U Q", preds, horizon=2000)
    payload = {repr(k): c.as_json() for k, c in v.bounds.items()}
    for entry in payload.values():
        assert set(entry) >= {"B", "mode"}
