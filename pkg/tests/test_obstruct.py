import json

import pytest
from hypothesis import given, settings, strategies as st

from foldrel.dold import dold_image
from foldrel.gf2poly import partitions
from foldrel.obstruct import (
    CharNumbers,
    Codim1Class,
    Hypothesis,
    MapClass,
    OneGenRing,
    Verdict,
    classify_codim1,
    codim1_pattern,
    conforms,
    conjecture_sweep,
    cp_verdict,
    min_relation_threshold,
    numbers_check,
    quotient_dim,
    rank2_reduction,
    rank2_rows,
    relation_check,
    rp_verdict,
    sweep_grid,
)
from foldrel.parity2 import binom_parity_int


def test_map_class_delta():
    assert MapClass.FOLD.delta == 0
    assert all(m.delta == 1 for m in MapClass if m is not MapClass.FOLD)


def test_verdict_needs_witness():
    with pytest.raises(ValueError):
        Verdict(MapClass.FOLD, "M", "N", "obstructed", "r")
    with pytest.raises(ValueError):
        Verdict(MapClass.FOLD, "M", "N", "obstructed", "r", (Hypothesis("h", False),), {"w": 1})


def test_quotient_examples():
    assert quotient_dim(6, 1).quotient_dim == 0
    r8 = quotient_dim(8, 1)
    assert r8.quotient_dim == 1 and r8.complement == ((4, 0),)
    r9 = quotient_dim(9, 1)
    assert r9.quotient_dim == 2 and set(r9.complement) == {(4, 1), (2, 5)}
    with pytest.raises(ValueError):
        quotient_dim(1, 1)


def test_quotient_compare_r0():
    r = quotient_dim(4, 1, compare_r0=True)
    assert r.quotient_dim == 1 and r.quotient_dim_without_r0 == 2


def test_classify_examples():
    assert classify_codim1(6).cls is Codim1Class.NULL_COBORDANT
    assert classify_codim1(11).cls is Codim1Class.B1
    assert classify_codim1(9).cls is Codim1Class.C2
    assert classify_codim1(16).cls is Codim1Class.A1
    assert codim1_pattern(2) is Codim1Class.NULL_COBORDANT


def test_classify_agrees_with_dimension():
    expect = {Codim1Class.NULL_COBORDANT: 0, Codim1Class.A1: 1, Codim1Class.B1: 1, Codim1Class.C2: 2}
    for n in range(2, 130):
        rep = classify_codim1(n)
        assert rep.quotient.quotient_dim == expect[rep.cls]


def test_rp_rings():
    r = OneGenRing.rp(13)
    assert r.w(5) == 0 and r.w(6) == 1 and r.orientable
    assert not OneGenRing.rp(12).orientable
    for N in range(2, 9):
        ring = OneGenRing.rp(2**N - 1)
        assert not any(ring.coeff)
    for D in range(2, 9):
        ring = OneGenRing.rp(2**D - 2)
        assert all(ring.coeff)


def test_cp_ring():
    r = OneGenRing.cp(2)
    assert r.dim == 4 and r.coeff == (0, 1, 0, 1)
    assert not any(OneGenRing.cp(3).coeff)


def test_relation_check_rp13():
    v = relation_check(OneGenRing.rp(13), 1, 0, MapClass.MORIN)
    assert v.obstructed
    assert v.witness["degree"] == sum(int(w[2:]) for w in v.witness["nonzero"])


def test_relation_check_never_on_vanishing_classes():
    for N in range(3, 9):
        ring = OneGenRing.rp(2**N - 1)
        for k in range(0, 6):
            for mc in MapClass:
                assert not relation_check(ring, k, 0, mc).obstructed


def test_relation_check_zero_ring():
    ring = OneGenRing(10, (0,) * 10, True)
    assert relation_check(ring, 1, 0, MapClass.FOLD).status == "not-obstructed"


def test_hypothesis_guards():
    even = relation_check(OneGenRing.rp(13), 2, 0, MapClass.MORIN)
    assert even.status == "inconclusive"
    nonori = relation_check(OneGenRing.rp(12), 1, 0, MapClass.MORIN)
    assert nonori.status == "inconclusive"
    cusp = relation_check(OneGenRing.rp(12), 1, 0, MapClass.CUSP)
    assert cusp.status != "inconclusive"
    tame = relation_check(OneGenRing.rp(12), 1, 2, MapClass.TAME_CORANK1)
    assert tame.status == "inconclusive"


@st.composite
def rings(draw):
    dim = draw(st.integers(2, 40))
    coeff = tuple(draw(st.lists(st.integers(0, 1), min_size=dim, max_size=dim)))
    return OneGenRing(dim, coeff, True)


@settings(max_examples=150)
@given(rings(), st.integers(1, 20), st.integers(0, 10))
def test_threshold_monotone(ring, k, extra):
    lo = relation_check(ring, k, 0, MapClass.FOLD)
    hi = relation_check(ring, k, extra, MapClass.FOLD)
    assert not (hi.obstructed and not lo.obstructed)


@settings(max_examples=100)
@given(rings(), st.integers(1, 12))
def test_violation_witness_is_genuine(ring, thr):
    v = relation_check(ring, thr - 2, 0, MapClass.FOLD)
    if v.obstructed:
        I = [int(s[2:]) for s in v.witness["nonzero"]]
        J = [int(s[2:]) for s in v.witness["zero"]]
        assert len(I) == len(J) and sum(I) == sum(J) <= ring.dim
        assert min(I + J) >= thr
        assert ring.product(I) == 1 and ring.product(J) == 0


@settings(max_examples=60)
@given(rings(), st.integers(2, 8))
def test_violation_matches_brute_force(ring, thr):
    pairs = {}
    for D in range(thr, ring.dim + 1):
        for p in partitions(D, thr):
            pairs.setdefault((len(p), D), set()).add(ring.product(p))
    brute = any(len(vals) == 2 for vals in pairs.values())
    assert relation_check(ring, thr - 2, 0, MapClass.FOLD).obstructed == brute


def test_min_threshold_on_projective_spaces():
    for n in range(3, 257):
        D = n.bit_length() - 1
        m = n - (1 << D)
        if m < (1 << D) - 2:
            assert min_relation_threshold(OneGenRing.rp(n)) == m + 1


def test_rp_examples():
    assert rp_verdict(13, 12).obstructed(MapClass.MORIN)
    assert rp_verdict(11, 10).obstructed(MapClass.FOLD)
    for j in range(5):
        assert rp_verdict(31, 22 + 2 * j).obstructed(MapClass.TAME_CORANK1)
    for j in range(6):
        assert rp_verdict(31, 21 + 2 * j).obstructed(MapClass.FOLD)
    assert not rp_verdict(31, 20).obstructed(MapClass.TAME_CORANK1)


def test_rp_engine_covers_closed_form_family():
    # Whenever the closed-form family obstructs, the relation engine must too.
    for n in range(3, 200):
        for target in range(max(1, n - 30), n + 1):
            rep = rp_verdict(n, target)
            for v in rep.verdicts:
                if v.rule == "projective-family" and v.obstructed:
                    engine = [u for u in rep.verdicts if u.rule == "class-equalities" and u.map_class is v.map_class]
                    assert engine[0].obstructed, (n, target, v.map_class)


def test_rp_rejects():
    with pytest.raises(ValueError):
        rp_verdict(5, 6)


def test_cp_examples():
    for n, t in ((2, 4), (4, 7), (4, 8), (49, 93)):
        v = cp_verdict(n, t)
        assert v.obstructed and v.witness["pontryagin_index"] == n // 2
    for n in range(1, 60):
        for k in range(0, 60):
            if n < k + 2 and 2 * n - k >= 1:
                assert not cp_verdict(n, 2 * n - k).obstructed
    assert cp_verdict(2, 4, stably_parallelizable=False).status == "inconclusive"


def test_charnumbers_io(tmp_path):
    cn = CharNumbers.from_ring(OneGenRing.rp(6))
    path = tmp_path / "cn.json"
    path.write_text(json.dumps(cn.to_doc()))
    assert CharNumbers.load(path) == cn
    doc = cn.to_doc()
    doc["numbers"].pop()
    with pytest.raises(ValueError):
        CharNumbers.from_doc(doc)
    doc = cn.to_doc()
    doc["numbers"].append(doc["numbers"][0])
    with pytest.raises(ValueError):
        CharNumbers.from_doc(doc)


def _pattern(n, ones):
    return CharNumbers(n, {p: int(p in ones) for p in partitions(n)})


def test_numbers_examples():
    assert not numbers_check(CharNumbers.zero(12), 1, MapClass.FOLD, 1).verdict.obstructed
    a1 = lambda n: _pattern(n, {(n,), (2,) * (n // 2)})
    assert not numbers_check(a1(8), 1, MapClass.FOLD, 1).verdict.obstructed
    assert numbers_check(a1(12), 1, MapClass.FOLD, 1).verdict.obstructed
    # Image rows at (16, 3) force lambda_1 = lambda_4 and lambda_2 = lambda_3 = 0.
    ok = numbers_check(_pattern(16, {(16,), (4, 4, 4, 4)}), 3, MapClass.FOLD, 3)
    assert not ok.verdict.obstructed and ok.residual
    assert numbers_check(_pattern(16, {(4, 4, 4, 4)}), 3, MapClass.FOLD, 3).verdict.obstructed
    # The (20, 5) quotient is zero, so any surviving top number is obstructed.
    bad = numbers_check(_pattern(20, {(20,)}), 5, MapClass.FOLD, 5)
    assert bad.verdict.obstructed


def test_numbers_matches_annihilator():
    # Brute force: the collapsed functional survives iff it kills every image row.
    for n, k in ((16, 3), (12, 3), (9, 1), (8, 1), (32, 7)):
        img = dold_image(n, k)
        L = img.ncols
        for lam in range(1 << L):
            kills = all(bin(r & lam).count("1") % 2 == 0 for r in img.rows())
            ones = {p for p in partitions(n) if p[0] > k and lam >> (len(p) - 1) & 1}
            res = numbers_check(_pattern(n, ones), k, MapClass.FOLD, k)
            assert res.verdict.obstructed != kills, (n, k, lam)


def test_numbers_zero_functional_never_obstructed():
    for n in range(2, 13):
        for k in (1, 2, 3, 5):
            if k >= n:
                continue
            for mc in (MapClass.FOLD, MapClass.CUSP, MapClass.MORIN, MapClass.TAME_CORANK1):
                for v in (0, 1, k):
                    assert not numbers_check(CharNumbers.zero(n), k, mc, v).verdict.obstructed


def test_numbers_routes_agree():
    import random

    rng = random.Random(3)
    for _ in range(60):
        n = rng.randint(4, 11)
        k = rng.choice([1, 3, 5])
        if k >= n:
            continue
        mc = rng.choice([MapClass.FOLD, MapClass.CUSP])
        kk = k + mc.delta
        v = rng.choice([kk, kk + 2])
        lam = {L: rng.randint(0, 1) for L in range(1, n + 1)}
        vals = {}
        for p in partitions(n):
            vals[p] = 0 if p[0] <= v else lam[len(p)]
        cn = CharNumbers(n, vals)
        a = numbers_check(cn, k, mc, v)
        b = numbers_check(cn, k, mc, v, route="direct")
        assert a.verdict.status == b.verdict.status


def test_numbers_rp_manifolds_direct():
    # RP^n itself has no fold map into R^(n-1) when its numbers survive the relations.
    for n in (2, 4, 6):
        cn = CharNumbers.from_ring(OneGenRing.rp(n))
        assert numbers_check(cn, 1, MapClass.FOLD, 0).verdict.status in ("obstructed", "not-obstructed")


def test_numbers_guards():
    r = numbers_check(CharNumbers.zero(6), 2, MapClass.MORIN, 2)
    assert r.verdict.status == "inconclusive"
    r = numbers_check(CharNumbers.zero(6), 1, MapClass.CORANK1, 2)
    assert r.verdict.status == "inconclusive"


def test_rank2_examples():
    r = rank2_reduction(2)
    assert r.basis == ((2, 0), (0, 1)) and r.rank == 1 and r.quotient_dim == 1
    for n in range(2, 60):
        for m, row in enumerate(rank2_rows(n), start=1):
            assert row >> m & 1 and binom_parity_int(n - 3 * m - 1, 0)
    with pytest.raises(ValueError):
        rank2_reduction(1)


def test_rank2_dims():
    for n in range(2, 201):
        r = rank2_reduction(n)
        assert r.quotient_dim in (0, 1)
        assert r.representative == (n, 0)


def test_conformity_rule():
    assert conforms(16, 3, 1) and conforms(17, 3, 1)
    assert not conforms(8 + 1, 7, 1)
    assert not conforms(40, 3, 1)
    assert not conforms(40, 3, 2)
    assert conforms(40, 3, 0)


def test_small_sweep():
    recs = list(conjecture_sweep(40, [3, 7]))
    assert len(recs) == len(sweep_grid(40, [3, 7]))
    assert all(r.conforming for r in recs)
    assert {(r.report.n, r.report.k) for r in recs if r.report.quotient_dim} == {(8, 3), (16, 3), (32, 3), (16, 7), (32, 7)}
    with pytest.raises(ValueError):
        sweep_grid(10, [5])
