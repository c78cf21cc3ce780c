import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from pfdensity import construction as cn
from pfdensity.arith import homogeneous_sums, primes_upto
from pfdensity.pfsearch import is_product_free, max_product_free

import oracles


def test_x6_family():
    fam = cn.build_family(6, 2, 3)
    assert fam.ell_x.value == 60 and fam.n_x.value == 3600
    assert fam.allowed == (4, 6, 10, 12, 15, 20, 30)
    assert sum(Fraction(1, u) for u in fam.allowed) == Fraction(3, 4)
    assert Fraction(oracles.phi(3600), 3600) == Fraction(4, 15)
    assert fam.density == Fraction(1, 5)


def test_x2_family_matches_search():
    fam = cn.build_family(2, 1, 1)
    assert fam.n_x.value == 4 and fam.allowed == (2,)
    assert fam.density == Fraction(1, 4) == max_product_free(4).density


def test_interval_condition():
    with pytest.raises(cn.IntervalConditionError):
        cn.build_family(6, 2, 4)


def test_transcripts():
    t = cn.verify_product_free_structural(cn.build_family(6, 2, 3))
    assert len(t) == 49 and len(t.steps) == 49 and t.valid
    assert t.failures() == []
    assert len(t.to_json()["steps"]) == 49
    step = next(s for s in t.steps if (s.u, s.v) == (4, 4))
    assert step.product_class == 16 and step.no_capping and step.omega == 4 and step.excluded
    (only,) = cn.verify_product_free_structural(cn.build_family(2, 1, 1)).steps
    assert (only.product_class, only.omega, only.excluded) == (4, 2, True)
    assert len(t.digest()) == 64


def test_materialized_x6():
    fam = cn.build_family(6, 2, 3)
    S = cn.materialize(fam)
    assert S.n == 3600 and len(S) == 720
    assert is_product_free(S)
    with pytest.raises(ValueError):
        cn.materialize(cn.build_family(12, 2, 3))


def test_family_json():
    fam = cn.build_family(6, 2, 3)
    doc = fam.to_json(cn.verify_product_free_structural(fam).digest())
    assert doc["density"] == "1/5" and doc["allowed"] == [4, 6, 10, 12, 15, 20, 30]
    assert len(doc["transcript_digest"]) == 64


def test_lower_bound_examples():
    r = cn.lower_bound_formula(6, 2, 3)
    outside = sum((Fraction(1, d) for d in oracles.divisors(60) if not 2 <= oracles.big_omega(d) <= 3), Fraction(0))
    assert r.target_rhs == 1 - Fraction(3, 6) - Fraction(4, 15) * outside
    assert r.family_density == Fraction(1, 5) >= r.target_rhs and r.holds
    r2 = cn.lower_bound_formula(2, 1, 1)
    assert r2.target_rhs == 1 - Fraction(1, 2) - Fraction(1, 2) * 1
    assert r2.holds
    empty = cn.lower_bound_formula(4, 5, 5)
    assert empty.family_density == 0 and empty.holds


@settings(max_examples=30)
@given(st.integers(2, 30), st.integers(1, 8), st.integers(0, 7))
def test_families_are_product_free(x, lo, width):
    hi = lo + min(width, lo - 1)
    fam = cn.build_family(x, lo, hi)
    assert cn.verify_product_free_structural(fam).valid
    assert cn.lower_bound_formula(x, lo, hi).holds
    if fam.n_x.value <= 3600:
        S = cn.materialize(fam)
        assert S.density == fam.density and is_product_free(S)


def test_betterest_examples():
    r = cn.betterest_sum(10, 2)
    assert r.exact
    assert oracles.euler_product([2, 3, 5, 7]) == Fraction(35, 8)
    assert r.value == Fraction(35, 8) - oracles.homogeneous_direct([2, 3, 5, 7], 3)
    assert cn.betterest_sum(3, 1).value == 3
    big = cn.betterest_sum(100, 2)
    assert math.isfinite(big.ratio) and big.ratio > 0


def test_tail_examples():
    t = cn.tail_sum(3, 3)
    assert t.value == 3 - (1 + Fraction(5, 6) + Fraction(19, 36)) == Fraction(23, 36)
    for x in (3, 10, 30):
        assert cn.tail_sum(x, 0).value == oracles.euler_product(primes_upto(x).tolist())
    t10 = cn.tail_sum(10, 5)
    assert t10.exact and t10.value == Fraction(35, 8) - sum(
        (oracles.homogeneous_direct([2, 3, 5, 7], j) for j in range(5)), Fraction(0)
    )


def test_interval_enclosures_for_many_primes():
    r = cn.betterest_sum(1000, 2)
    assert not r.exact
    lo, hi = r.enclosure
    assert lo <= hi and hi - lo < Fraction(1, 10**40)
    t = cn.tail_sum(1000, 4)
    assert 0 < t.enclosure[0] <= t.enclosure[1]


def test_interval_path_agrees_with_exact():
    primes = primes_upto(97).tolist()
    exact = oracles.euler_product(primes) - homogeneous_sums(primes, 3).h[3]
    old = cn.EXACT_PRIME_LIMIT
    cn.EXACT_PRIME_LIMIT = 0
    try:
        lo, hi = cn.betterest_sum(97, 2).enclosure
    finally:
        cn.EXACT_PRIME_LIMIT = old
    assert lo <= exact <= hi


def test_homogeneous_bounds_primes_to_30():
    rows = cn.homogeneous_bounds(primes_upto(30).tolist())
    s = homogeneous_sums(primes_upto(30).tolist(), 0).s
    assert len(rows) == math.floor(Fraction(19, 10) * s) + 1
    assert all(r.holds for r in rows)


@settings(max_examples=30)
@given(st.sets(st.sampled_from([3, 5, 7, 11, 13, 17, 19, 23, 29, 31]), min_size=1, max_size=6))
def test_homogeneous_bounds_odd_prime_sets(P):
    """Without the prime 2 the range widens to j <= (3 - eps) s."""
    assert all(r.holds for r in cn.homogeneous_bounds(P, p0=3))


def test_transcript_catches_overlapping_interval():
    good = cn.build_family(6, 2, 3)
    allowed = tuple(u for u in good.ell_x.divisors() if 1 <= oracles.big_omega(u) <= 2)
    bogus = cn.IntervalFamily(6, good.ell_x, good.n_x, 1, 2, allowed, Fraction(0))
    t = cn.verify_product_free_structural(bogus)
    assert not t.valid
    assert any((s.u, s.v) == (2, 2) for s in t.failures(limit=10**4))
