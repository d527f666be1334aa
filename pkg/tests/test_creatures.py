import random
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from decisive import creatures as cr
from decisive.creatures import SplitCreature, TabularCreatureSystem, half_offset
from decisive.errors import InvalidCreature, KindMismatch, NormTooSmall, PreconditionViolated, SchemaError
from decisive.fixtures import cid, graded_system, halving_system
from decisive.norms import NormValue
from decisive.rank import RankParams, full_cube, prenorm
from decisive.schedules import ConstSchedule
from decisive.verify import Big, Decisive, Exhaustive, Halving, HereditarilyBig, Sample, verify

from oracles import all_value_maps, brute_prenorm, make_brute_ns

DEF = RankParams(B=2, n=0, r=1)
C2 = RankParams(B=2, n=0, r=1, flarge=ConstSchedule(2))
# r = 2 makes nor = 2 log2(x), so norms above 1 appear on small cubes
R2 = RankParams(B=2, n=0, r=2, flarge=ConstSchedule(2))

CUBE4 = full_cube(4)
ONES = frozenset(b for b in CUBE4 if b & 1)


def test_norm_examples():
    assert float(cr.norm(SplitCreature(4, CUBE4, 0, DEF))) == 1.0
    full = SplitCreature(4, CUBE4, 0, C2)
    assert full.prenorm == 3
    assert full.norm.same(NormValue.exact_log(3, 1))
    top = SplitCreature(4, CUBE4, full.prenorm - 1, C2)
    assert top.norm.is_zero()


def test_norm_exact_comparisons():
    a, b = NormValue.exact_log(5, 1), NormValue.exact_log(10, 1)
    assert a.ge(b, -1) and not a.gt(b, -1)
    assert NormValue.exact_log(3, 1).gt_const(1)
    assert not NormValue.exact_log(2, 1).gt_const(1)
    assert NormValue.exact_log(9, Fraction(1, 2)).gt_const(Fraction(3, 2))


def test_invalid_k_rejected():
    with pytest.raises(InvalidCreature, match="prenorm"):
        SplitCreature(4, CUBE4, 3, C2)
    with pytest.raises(InvalidCreature):
        SplitCreature(4, {0}, 0, C2)


def test_in_sigma_examples():
    c = SplitCreature(4, CUBE4, 1, C2)
    assert cr.in_sigma(c, c)
    assert cr.in_sigma(c.with_values(ONES), c)
    assert not cr.in_sigma(c.with_values(ONES, 0), c)
    with pytest.raises(KindMismatch):
        cr.in_sigma(c, halving_system()[cid([0, 1, 2], 0)])


def test_halve_examples():
    c = SplitCreature(4, CUBE4, 0, C2)
    h = cr.halve(c)
    assert h.k == 1 and h.norm.same(NormValue.exact_log(2, 1))
    assert h.norm.ge(c.norm, -1)
    # the prenorm-10 cases, through the same offset rule
    assert half_offset(10, 0) == 5
    assert half_offset(10, 2) == 6
    assert NormValue.exact_log(5, 1).ge(NormValue.exact_log(10, 1), -1)
    with pytest.raises(NormTooSmall):
        cr.halve(SplitCreature(4, CUBE4, 0, DEF))


def test_unhalve_examples():
    c = SplitCreature(4, CUBE4, 0, C2)
    h = cr.halve(c)
    assert cr.unhalve(h, c) == c
    with pytest.raises(PreconditionViolated):
        cr.unhalve(c.with_values(ONES, 1), c)
    # prenorm 10 with (d, 5) of prenorm 6 un-halves to (d, 0): 2 * 6 >= 10
    assert NormValue.exact_log(6, 1).ge(NormValue.exact_log(10, 1), -1)


def test_big_extract_examples():
    c = SplitCreature(4, CUBE4, 0, C2)
    assert cr.big_extract(c, lambda b: 0) == c
    d = cr.big_extract(c, lambda b: b & 1)
    assert d.c == ONES and d.k == 0 and float(d.norm) == 1.0
    assert 2 * d.x >= c.x
    with pytest.raises(PreconditionViolated):
        cr.big_extract(c, lambda b: b)


def test_decisive_witness_examples():
    assert cr.decisive_witness(SplitCreature(4, CUBE4, 0, C2)) is None
    s = halving_system()
    tab = graded_system([0, 1, 2], {2: Fraction(5, 2), 3: Fraction(3)}, Fraction(1, 2), 3, witness_K=2)
    K, small, big = cr.decisive_witness(tab[cid([0, 1, 2], 0)])
    assert K == 2 and len(small.val) <= 2
    assert cr.decisive_witness(s[cid([0, 1, 2], 0)]) is None
    with pytest.raises(NormTooSmall):
        cr.decisive_witness(SplitCreature(4, CUBE4, 0, DEF))


def test_split_decisive_witness_when_blocks_suffice():
    c = SplitCreature(2, full_cube(2), 0, R2)
    assert c.norm_gt(1)
    K, dm, dp = c.decisive_witness()
    assert K == 2
    assert len(dm.val) <= K
    assert dm.in_sigma_of(c) and dp.in_sigma_of(c)
    assert dm.drop_ok(c, 1) and dp.drop_ok(c, 1)
    rep = verify(dp, HereditarilyBig(1 << K, 1))
    assert rep.ok


def all_creatures(J, params, max_size=None):
    vals = sorted(full_cube(J))
    for size in range(1, (max_size or len(vals)) + 1):
        for c in combinations(vals, size):
            P = prenorm(c, J, params)
            for k in range(P):
                yield SplitCreature(J, frozenset(c), k, params)


def test_sigma_is_value_and_norm_monotone_exhaustive():
    for c in all_creatures(3, R2):
        for d in c.sigma():
            assert d.in_sigma_of(c)
            assert d.val <= c.val and d.norm <= c.norm


def test_halve_unhalve_round_trip():
    # exhaustive on 2^3, plus the full 4-cube where the halved creature keeps positive norm
    checked = 0
    for c in list(all_creatures(3, R2)) + [SplitCreature(4, CUBE4, 0, R2)]:
        if not c.norm_gt(1):
            continue
        h = c.halve()
        assert h.in_sigma_of(c) and h.drop_ok(c, 1)
        for d in h.sigma():
            if not d.norm_gt(0):
                continue
            e = c.unhalve(d)
            assert e.in_sigma_of(c) and e.drop_ok(c, 1) and e.val <= d.val
            checked += 1
    assert checked >= 1


def test_big_extract_postcondition_all_colorings():
    c = SplitCreature(4, CUBE4, 0, C2)
    rng = random.Random(0)
    for _ in range(300):
        cols = {b: rng.randrange(2) for b in CUBE4}
        d = c.big_extract(cols)
        assert len({cols[b] for b in d.val}) == 1
        assert d.in_sigma_of(c) and d.drop_ok(c, 1)


def brute_big(c: SplitCreature, B: int) -> bool:
    """Every B-coloring has a monochromatic (d, k') with the allowed drop, over all d and k'."""
    brute_ns = make_brute_ns(c.params.B, c.params.n, c.params.flarge)
    vals = sorted(c.c)
    good = []
    for size in range(1, len(vals) + 1):
        for d in combinations(vals, size):
            P = brute_prenorm(d, c.J, brute_ns)
            # nor(d,k') >= nor(c) - r  iff  2 (P - k') >= x_c, best with k' = k
            if any(2 * (P - k2) >= c.x for k2 in range(c.k, P)):
                good.append(frozenset(d))
    for F in all_value_maps(vals, B):
        classes = {}
        for v, col in F.items():
            classes.setdefault(col, set()).add(v)
        if not any(g <= cls for g in good for cls in classes.values()):
            return False
    return True


@pytest.mark.parametrize("seed", range(6))
def test_verify_big_matches_independent_oracle(seed):
    rng = random.Random(seed)
    J = 3
    tested = 0
    while tested < 4:
        size = rng.randint(2, 8)
        c = frozenset(rng.sample(sorted(full_cube(J)), size))
        P = prenorm(c, J, R2)
        if P < 1:
            continue
        cre = SplitCreature(J, c, rng.randrange(P), R2)
        if not cre.norm_gt(1):
            continue
        for B in (2, 3) if size <= 6 else (2,):
            rep = verify(cre, Big(B))
            assert (rep.status == "pass") == brute_big(cre, B), (sorted(c), cre.k, B)
        tested += 1


def test_verify_examples():
    c = SplitCreature(4, CUBE4, 0, C2)
    assert verify(c, Big(1)).status == "pass"
    assert verify(SplitCreature(4, CUBE4, 0, DEF), Big(2)).status == "vacuous"
    small = SplitCreature(2, full_cube(2), 0, R2)
    assert verify(small, Big(4)).status == "fail"
    rep = verify(small, Big(2), mode=Exhaustive())
    assert rep.status in ("pass", "fail") and rep.detail["colorings_covered"] == 16


def test_verify_sampling_is_seeded():
    c = SplitCreature(4, CUBE4, 0, C2)
    a = verify(c, Big(2), mode=Sample(50, 3)).to_json()
    b = verify(c, Big(2), mode=Sample(50, 3)).to_json()
    assert a == b and a["count"] == 50


def test_verify_search_space_exceeded_reports_count():
    from decisive.errors import SearchSpaceExceeded

    c = SplitCreature(4, CUBE4, 0, C2)
    with pytest.raises(SearchSpaceExceeded) as exc:
        verify(c, Big(2), mode=Exhaustive(cap=10))
    assert exc.value.count == 32768


def test_decisive_property_reports():
    assert verify(SplitCreature(4, CUBE4, 0, C2), Decisive(1)).status == "fail"
    assert verify(SplitCreature(4, CUBE4, 0, DEF), Decisive(1)).status == "vacuous"


# ------------------------------------------------------------------ tabular systems


def test_tabular_validation():
    with pytest.raises((InvalidCreature, SchemaError)):
        TabularCreatureSystem(1, {"a": {"val": [0, 1], "norm": 1, "succ": ["b"]}, "b": {"val": [0, 1, 2], "norm": 1}})
    with pytest.raises((InvalidCreature, SchemaError)):
        TabularCreatureSystem(1, {"a": {"val": [0], "norm": 1}})
    with pytest.raises((InvalidCreature, SchemaError)):
        TabularCreatureSystem(1, {"a": {"val": [0, 1], "norm": 1, "succ": ["b"]}, "b": {"val": [0], "norm": 2}})


def test_tabular_sigma_is_transitive():
    s = halving_system()
    for c in s.creatures():
        for d in c.sigma():
            for e in d.sigma():
                assert e.in_sigma_of(c)


def test_tabular_halving_passes():
    s = halving_system()
    for c in s.creatures():
        assert verify(c, Halving()).ok


def test_decisiveness_bounds_bigness_on_fixtures():
    rng = random.Random(1)
    for K in (2, 3):
        s = graded_system([0, 1, 2, 3], {2: Fraction(5, 2), 3: Fraction(11, 4), 4: Fraction(3)}, Fraction(1, 4), 3,
                          witness_K=K, rng=rng)
        for c in s.creatures():
            if not c.norm.gt_const(1 + c.r):
                continue
            for B in range(2, 6):
                if verify(c, HereditarilyBig(B, None)).status == "pass":
                    assert B < K


@settings(max_examples=60, deadline=None)
@given(st.frozensets(st.integers(0, 7), min_size=2), st.integers(0, 3))
def test_unhalve_inverse_property(c, seed):
    P = prenorm(c, 3, R2)
    if P < 1:
        return
    cre = SplitCreature(3, c, 0, R2)
    if not cre.norm_gt(1):
        return
    h = cre.halve()
    if h.norm_gt(0):
        assert cre.unhalve(h) == cre
