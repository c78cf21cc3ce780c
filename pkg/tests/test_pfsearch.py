from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pfdensity import lpcore
from pfdensity.pfsearch import (
    NotProductFreeError,
    ResidueSet,
    gcd_profile,
    is_product_free,
    lift_set,
    max_product_free,
    max_product_free_naive,
    random_product_free,
    residue_set,
)

import oracles


def test_is_product_free_examples():
    assert is_product_free(residue_set(5, {2, 3}))
    for n in (2, 3, 10, 97):
        assert not is_product_free(residue_set(n, {1}))
    assert not is_product_free(residue_set(6, {3}))
    assert is_product_free(residue_set(7, set()))


@given(st.integers(1, 40).flatmap(lambda n: st.tuples(st.just(n), st.sets(st.integers(0, n - 1)))))
def test_is_product_free_matches_definition(case):
    n, S = case
    assert is_product_free(residue_set(n, S)) == oracles.product_free(n, S)


def test_residue_set_validation():
    with pytest.raises(ValueError):
        residue_set(5, {5})
    S = ResidueSet.from_bitmap([0, 1, 1, 0, 0])
    assert S.sorted() == [1, 2] and S.n == 5
    assert ResidueSet.from_mask(5, S.mask) == S


@pytest.mark.parametrize("n, D, witness", [(6, Fraction(1, 3), [2, 5]), (4, Fraction(1, 4), [2]), (5, Fraction(2, 5), [2, 3])])
def test_small_densities(n, D, witness):
    res = max_product_free(n)
    assert res.density == D and res.proof_of_optimality
    assert res.best_set.sorted() == witness
    assert is_product_free(res.best_set)


@pytest.mark.parametrize("n", range(1, 13))
def test_search_matches_combinations_oracle(n):
    D, witness = oracles.max_product_free_combinations(n)
    res = max_product_free(n)
    assert res.density == D
    assert res.best_set.sorted() == witness
    naive = max_product_free_naive(n)
    assert naive.density == D and naive.best_set.sorted() == witness


def test_search_caps_and_budget():
    with pytest.raises(ValueError):
        max_product_free(65)
    res = max_product_free(64, budget=500)
    assert not res.proof_of_optimality
    assert is_product_free(res.best_set)
    with pytest.raises(ValueError):
        max_product_free_naive(25)


def test_search_report_json():
    doc = max_product_free(6).to_json()
    assert doc["density"] == "1/3" and doc["witness"] == [2, 5] and doc["optimal"] is True
    assert doc["nodes"] >= 1


def test_gcd_profile_examples():
    prof = gcd_profile(residue_set(6, {2, 5}))
    assert prof.alpha == {1: Fraction(1, 2), 2: Fraction(1, 2), 3: 0, 6: 0}
    assert all(a == 0 for a in gcd_profile(residue_set(6, set())).alpha.values())
    assert gcd_profile(residue_set(4, {2})).alpha[2] == 1


@settings(max_examples=60)
@given(st.integers(2, 60), st.integers(0, 2**32 - 1))
def test_profile_is_primal_feasible(n, seed):
    S = random_product_free(n, np.random.default_rng(seed))
    assert is_product_free(S)
    prof = gcd_profile(S)
    assert prof.total_size() == len(S)
    assert lpcore.build_primal(n).is_feasible(prof.primal_point())


def test_lift_examples():
    lifted = lift_set(residue_set(6, {2, 5}), 2)
    assert lifted.sorted() == [2, 5, 8, 11] and lifted.density == Fraction(1, 3)
    assert lift_set(residue_set(9, set()), 4) == residue_set(36, set())
    L = lift_set(residue_set(5, {2, 3}), 3)
    assert len(L) == 6 and L.n == 15 and oracles.product_free(15, L.members)
    with pytest.raises(NotProductFreeError):
        lift_set(residue_set(6, {3}), 2)


@settings(max_examples=40)
@given(st.integers(2, 30), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_lift_preserves_density(n, m, seed):
    S = random_product_free(n, np.random.default_rng(seed))
    L = lift_set(S, m)
    assert L.density == S.density
    assert oracles.product_free(L.n, L.members)


@settings(max_examples=30)
@given(st.integers(2, 40), st.integers(0, 2**32 - 1))
def test_random_sets_never_beat_the_search(n, seed):
    S = random_product_free(n, np.random.default_rng(seed))
    assert S.density <= max_product_free(n).density
