import itertools
import json
from collections import Counter

import pytest
from hypothesis import given, strategies as st
from scipy.stats import chisquare

from cachechase.errors import InvalidParameter
from cachechase.rng import SplitMix64
from cachechase.task import (
    Permutation,
    all_permutations,
    chain,
    cycle_of_one,
    cycles,
    good_chain,
    has_short_nonprincipal_cycle,
    random_permutation,
    windows,
)


@st.composite
def perms(draw, max_n=8):
    n = draw(st.integers(1, max_n))
    return Permutation(tuple(draw(st.permutations(range(1, n + 1)))))


def test_permutation_rejects_non_bijection():
    with pytest.raises(InvalidParameter):
        Permutation((1, 1, 2))
    with pytest.raises(InvalidParameter):
        Permutation((0, 1))
    with pytest.raises(InvalidParameter):
        Permutation(())


def test_permutation_json_round_trip():
    pi = Permutation((3, 1, 2))
    assert pi.to_json() == "[3, 1, 2]"
    assert Permutation.from_json(pi.to_json()) == pi


def test_random_permutation_small_cases():
    assert random_permutation(1, 99).map == (1,)
    assert random_permutation(3, 7) == random_permutation(3, 7)
    with pytest.raises(InvalidParameter):
        random_permutation(0, 1)


def test_random_permutation_uniform_over_s5():
    rng = SplitMix64(2024)
    draws = 100_000
    counts = Counter(random_permutation(5, rng).map for _ in range(draws))
    assert len(counts) == 120
    observed = [counts[p] for p in itertools.permutations(range(1, 6))]
    assert chisquare(observed).pvalue > 1e-4
    sigma = (draws * (1 / 120) * (119 / 120)) ** 0.5
    assert all(abs(c - draws / 120) < 5 * sigma for c in observed)


def test_chain_examples():
    assert chain(Permutation.identity(4), 3).values == (1, 1, 1, 1)
    assert chain(Permutation.shift(16), 8).answer == 9
    pi = Permutation.from_cycles(3, [(1, 3, 2)])
    c = chain(pi, 4)
    assert c.values == (1, 3, 2, 1, 3)
    assert c.answer == 3 and c.k == 4
    assert chain(pi, 0).values == (1,)
    assert json.loads(c.to_json()) == [1, 3, 2, 1, 3]
    with pytest.raises(InvalidParameter):
        chain(pi, -1)


def test_chain_semigroup_exhaustive_s4():
    for pi in all_permutations(4):
        for a in range(5):
            for b in range(5):
                za = chain(pi, a).answer
                assert chain(pi, a + b).answer == chain(pi, b, start=za).answer


def test_windows_examples():
    assert windows(8, 2).W == 4 and windows(8, 2).boundaries == (2, 4, 6, 8)
    assert windows(1, 1).boundaries == (1,)
    assert windows(7, 3).boundaries == (3, 6, 7)
    with pytest.raises(InvalidParameter):
        windows(0, 1)


@given(st.integers(1, 60), st.integers(1, 70))
def test_windows_cover_the_chain(k, s):
    plan = windows(k, s)
    assert plan.W == -(-k // s)
    assert sum(plan.lengths()) == k
    assert plan.boundaries[-1] == k
    assert all(a < b for a, b in zip(plan.boundaries, plan.boundaries[1:]))


def test_cycle_of_one_examples():
    assert cycle_of_one(Permutation.identity(4)) == 1
    assert cycle_of_one(Permutation.shift(16)) == 16
    assert cycle_of_one(Permutation.from_cycles(4, [(1, 2)])) == 2


def test_short_nonprincipal_cycle_examples():
    assert has_short_nonprincipal_cycle(Permutation.identity(4), 1)
    assert not has_short_nonprincipal_cycle(Permutation.shift(8), 7)
    pi = Permutation.from_cycles(6, [(1, 2, 3), (4, 5)])
    assert has_short_nonprincipal_cycle(pi, 1)
    assert sorted(map(len, cycles(pi))) == [1, 2, 3]


def test_good_chain_examples():
    assert not good_chain(Permutation.identity(4), 1)
    assert good_chain(Permutation.shift(16), 3)
    with pytest.raises(InvalidParameter):
        good_chain(Permutation.shift(3), 3)


def test_good_chain_census_s5():
    # independent check: z_1, z_2 distinct and neither is 1
    count = 0
    for pi in all_permutations(5):
        z = chain(pi, 2).values
        direct = len({z[1], z[2]}) == 2 and 1 not in (z[1], z[2])
        assert good_chain(pi, 2) == direct
        count += direct
    assert count == 72  # 120 * (1 - 2/5)


@pytest.mark.parametrize("n", range(1, 8))
def test_cycle_length_of_one_is_uniform(n):
    counts = Counter(cycle_of_one(pi) for pi in all_permutations(n))
    total = sum(counts.values())
    assert all(counts[ell] * n == total for ell in range(1, n + 1))


@given(perms())
def test_permutation_properties(pi):
    assert sorted(pi.map) == list(range(1, pi.n + 1))
    inv = pi.inverse()
    assert all(inv(pi(i)) == i for i in range(1, pi.n + 1))
    assert sum(map(len, cycles(pi))) == pi.n
    c = chain(pi, 2 * pi.n)
    assert c.values[cycle_of_one(pi)] == 1
