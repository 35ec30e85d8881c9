from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exprgen import Gen, brute_census, exprs, indices, seeds
from numeros.census import (
    census_at,
    census_profile,
    exact_support_count,
    is_empty,
    solve_counting_difference,
)
from numeros.errors import UnsupportedExpression
from numeros.expoly import ExpPoly
from numeros.numerosity import Numerosities
from numeros.pointset import (
    EMPTY,
    ComponentPermutation,
    Empty,
    FiniteRelabel,
    Index,
    Regroup,
    fin_powerset,
    finite,
    intersect,
    points_within,
    product,
    progression,
    rename,
    shapes,
    support_of,
    union,
)

EVENS = progression(2, 0)
ODDS = progression(2, 1)
NAT = progression(1, 0)


def subsets(labels):
    labels = sorted(labels)
    return [Index.of(c) for k in range(len(labels) + 1) for c in itertools.combinations(labels, k)]


class TestCensusAt:
    def test_product_rule_example(self):
        i = Index.of([0, 1, 2, 3])
        assert census_at(product(EVENS, ODDS), i) == census_at(EVENS, i) * census_at(ODDS, i) == 4

    def test_empty(self):
        for i in (Index.of([]), Index.below(10), Index.of([3, 99])):
            assert census_at(EMPTY, i) == 0

    def test_powerset_of_three(self):
        assert census_at(fin_powerset(finite([1, 2, 3])), Index.of([1, 2, 3])) == 8

    def test_accepts_plain_label_sets(self):
        assert census_at(EVENS, {0, 1, 2}) == 2

    @given(exprs(depth=3), indices(max_size=5))
    @settings(max_examples=150, deadline=None)
    def test_matches_brute_force(self, a, i):
        assert census_at(a, i) == brute_census(a, i)


class TestExactSupport:
    def test_examples(self):
        a = finite([(1, 2)])
        assert exact_support_count(a, Index.of([1, 2])) == 1
        assert exact_support_count(a, Index.of([1, 2, 3])) == 0

    @given(exprs(depth=2, finite_only=True), st.sets(st.integers(0, 4)))
    @settings(max_examples=100, deadline=None)
    def test_random_finite_against_enumeration(self, a, labels):
        i = Index.of(labels)
        direct = sum(1 for p in points_within(a, Index.below(10)) if support_of(p) == i)
        assert exact_support_count(a, i) == direct

    @given(exprs(depth=3), indices(max_label=6, max_size=4))
    @settings(max_examples=60, deadline=None)
    def test_sums_to_census(self, a, i):
        assert sum(exact_support_count(a, j) for j in subsets(i)) == census_at(a, i)

    def test_binomial_weighted_variant_disagrees(self):
        # Weighting the alternating sum by C(|i|, |j|) does not invert the
        # subset-lattice sums; the plain alternating sum does.
        a = finite([0, 1])
        i = Index.of([0, 1])

        def weighted(proper_only: bool) -> int:
            return sum((-1) ** (len(i) - len(j)) * math.comb(len(i), len(j)) * census_at(a, j)
                       for j in subsets(i) if not (proper_only and j == i))

        assert exact_support_count(a, i) == 0
        assert weighted(proper_only=False) == -2
        assert weighted(proper_only=True) == -4
        assert census_at(a, i) == 2


class TestProfiles:
    def test_evens(self):
        p = census_profile(EVENS)
        for n in range(101):
            expected = n // 2 if n % 2 == 0 else (n + 1) // 2
            assert p(n) == expected == census_at(EVENS, Index.below(n))
        assert p.polynomial_in_n(0) == (0, Fraction(1, 2))
        assert p.polynomial_in_n(1) == (Fraction(1, 2), Fraction(1, 2))

    def test_evens_squared(self):
        p, q = census_profile(EVENS), census_profile(product(EVENS, EVENS))
        for n in range(101):
            assert q(n) == p(n) ** 2 == census_at(product(EVENS, EVENS), Index.below(n))

    def test_single_late_point(self):
        p = census_profile(finite([7]))
        assert p.valid_from == 8
        assert [census_at(finite([7]), Index.below(n)) for n in range(10)] == [0] * 8 + [1, 1]
        assert p(8) == p(50) == 1

    def test_forced_labels(self):
        p = census_profile(EVENS, forced={101})
        assert p.valid_from <= 102
        for n in range(p.valid_from, 140):
            assert p(n) == census_at(EVENS, Index.below(n).union([101]))

    def test_period_divides_moduli_lcm(self):
        a = union(progression(3, 1), product(progression(4, 2), NAT))
        assert 12 % census_profile(a).period == 0

    def test_witness_rejected(self):
        eng = Numerosities()
        w = eng.sub_witness(EVENS, NAT)
        with pytest.raises(UnsupportedExpression):
            census_profile(union(w, EVENS))

    def test_powerset_profile_is_exponential(self):
        p = census_profile(fin_powerset(EVENS))
        for n in range(60):
            assert p(n) == 2 ** census_at(EVENS, Index.below(n))

    @given(seeds)
    @settings(max_examples=100, deadline=None)
    def test_soundness_up_to_200(self, seed):
        a = Gen(seed).expr(3)
        p = census_profile(a)
        for n in range(p.valid_from, 201):
            assert p(n) == census_at(a, Index.below(n))
        # valid_from is least: the formula fails just below it
        if p.valid_from > 0:
            assert p.value(p.valid_from - 1) != census_at(a, Index.below(p.valid_from - 1))


class TestInvariants:
    @given(exprs(depth=3), indices(), indices())
    @settings(max_examples=100, deadline=None)
    def test_monotone(self, a, i, j):
        k = Index.of(set(i) | set(j))
        assert census_at(a, i) <= census_at(a, k)

    @given(exprs(), exprs(), indices())
    @settings(max_examples=100, deadline=None)
    def test_additive_on_disjoint(self, a, b, i):
        if isinstance(intersect(a, b), Empty) or is_empty(intersect(a, b)):
            assert census_at(union(a, b), i) == census_at(a, i) + census_at(b, i)

    @given(exprs(), exprs(), indices())
    @settings(max_examples=100, deadline=None)
    def test_multiplicative(self, a, b, i):
        assert census_at(product(a, b), i) == census_at(a, i) * census_at(b, i)

    @given(exprs(depth=3), indices())
    @settings(max_examples=100, deadline=None)
    def test_congruence_neutral(self, a, i):
        lengths = {len(s) for s in shapes(a)}
        if len(lengths) == 1:
            n = lengths.pop()
            perm = list(range(n))
            random.Random(n).shuffle(perm)
            assert census_at(rename(ComponentPermutation(tuple(perm)), a), i) == census_at(a, i)
            assert census_at(rename(Regroup((n,)), a), i) == census_at(a, i)
        # relabellings are neutral on their cone
        tau = FiniteRelabel.of({1: 4, 4: 6, 6: 1})
        j = i.union([1, 4, 6])
        assert census_at(rename(tau, a), j) == census_at(a, j)


class TestCountingDifference:
    def test_small_target(self):
        z = {frozenset({0}): 2, frozenset({1}): -1, frozenset({0, 1}): 0}
        a, b = solve_counting_difference(z, [0, 1])
        for i, v in z.items():
            assert census_at(a, Index.of(i)) - census_at(b, Index.of(i)) == v

    @given(st.dictionaries(st.frozensets(st.integers(0, 2), min_size=1), st.integers(-3, 3)))
    @settings(max_examples=60, deadline=None)
    def test_random_targets(self, z):
        a, b = solve_counting_difference(z, [0, 1, 2])
        for k in range(1, 4):
            for i in itertools.combinations(range(3), k):
                i = frozenset(i)
                got = sum(1 for p in a.points if set(p) <= i) if a is not EMPTY else 0
                got -= sum(1 for p in b.points if set(p) <= i) if b is not EMPTY else 0
                assert got == z.get(i, 0)


class TestExpPoly:
    @given(st.lists(st.integers(-50, 50), min_size=1, max_size=4),
           st.lists(st.integers(-50, 50), max_size=3), st.sampled_from([2, 3, 4]))
    @settings(max_examples=150, deadline=None)
    def test_eventual_sign_is_exact(self, poly, exp_poly, base):
        f = ExpPoly({1: poly, base: exp_poly})
        s, t0 = f.eventual_sign()
        for t in range(t0, t0 + 60):
            v = f(t)
            assert (v > 0) - (v < 0) == s
        if t0 > 0:
            v = f(t0 - 1)
            assert (v > 0) - (v < 0) != s

    def test_examples(self):
        assert ExpPoly.linear(1, -100).eventual_sign() == (1, 101)
        assert ExpPoly({2: [1], 1: [0, 0, 0, -1]}).eventual_sign() == (1, 10)
        assert ExpPoly().eventual_sign() == (0, 0)

    @given(st.lists(st.integers(-9, 9), max_size=4), st.integers(1, 4), st.integers(0, 4))
    def test_affine_substitution(self, coeffs, alpha, beta):
        f = ExpPoly({1: coeffs, 3: coeffs[:2]})
        g = f.affine(alpha, beta)
        for t in range(6):
            assert g(t) == f(alpha * t + beta)
