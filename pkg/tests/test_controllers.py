from fractions import Fraction

import pytest

from cachechase.controllers import (
    KINDS,
    LOCAL_NAMES,
    OBLIVIOUS_NAMES,
    STAGE_LEAD,
    ChainTrackingController,
    Controller,
    FixedController,
    OracleController,
    RandomController,
    StageGame,
    adaptive_chain_tracking_controller,
    fill,
    make_controller,
    oblivious_random_controller,
    oracle_controller,
    rotating_caches,
    run_stage_game,
)
from cachechase.errors import CacheOverflow, InvalidParameter, LocalityViolation
from cachechase.task import Permutation, all_permutations, random_permutation
from cachechase.verify import exact_joint_success, stage_factory


class ReadsEverything(Controller):
    def select(self, step, view):
        return fill([view.pi(3)], 4, 1)


def test_fill():
    assert fill([5], 6, 3) == {5, 1, 2}
    assert fill([], 3, 5) == {1, 2, 3}
    assert fill([2, 2], 4, 2) == {2, 1}


def test_stage_game_validation():
    with pytest.raises(InvalidParameter):
        StageGame(3, 1, 3)
    with pytest.raises(InvalidParameter):
        StageGame(4, 0, 1)
    with pytest.raises(InvalidParameter):
        StageGame(4, 1, 0)


def test_fixed_cache_hits():
    run = run_stage_game(Permutation.shift(4), FixedController([{2}]), StageGame(4, 1, 2))
    assert run.hits == (True, False) and not run.success


def test_full_cache_always_hits():
    game = StageGame(5, 5, 3)
    for pi in all_permutations(5):
        assert run_stage_game(pi, oblivious_random_controller(5, 5, 3, seed=1), game).success


def test_chain_tracking_fixed_point_and_hit():
    game = StageGame(5, 2, 3)
    pi = Permutation.from_cycles(5, [(2, 3, 4, 5)])
    assert pi(1) == 1
    assert run_stage_game(pi, adaptive_chain_tracking_controller(5, 2), game).success
    for pi in all_permutations(5):
        run = run_stage_game(pi, ChainTrackingController(5, 2), game)
        assert run.success == run.hits[0]


def test_locality_is_enforced_in_stage_game():
    with pytest.raises(LocalityViolation):
        run_stage_game(Permutation.shift(4), ReadsEverything(), StageGame(4, 1, 2))


def test_stage_game_overflow():
    with pytest.raises(CacheOverflow):
        run_stage_game(Permutation.shift(4), FixedController([{1, 2}]), StageGame(4, 1, 1))
    with pytest.raises(InvalidParameter):
        run_stage_game(Permutation.shift(4), FixedController([{0}]), StageGame(4, 1, 1))


def test_chain_tracking_reads_only_cached_positions():
    game = StageGame(6, 2, 3)
    for pi in all_permutations(6):
        ctrl = ChainTrackingController(6, 2)
        support = set()
        from cachechase.controllers import StageView
        for t in range(1, 4):
            view = StageView(t, frozenset(support), pi.table)
            C = ctrl.select(t, view)
            assert view.reads <= support
            support |= set(C)


def test_adaptive_exact_on_small_spaces():
    assert exact_joint_success(stage_factory("chain-tracking", 2), 5, 2, 2).joint == Fraction(2, 5)
    for n in (4, 5):
        for s in range(1, n + 1):
            for T in range(1, min(3, n - 1) + 1):
                assert exact_joint_success(stage_factory("chain-tracking", s), n, s, T).joint == Fraction(s, n)


def test_every_local_controller_at_most_s_over_n():
    for n in (4, 5):
        for s in range(1, n + 1):
            for T in (1, 2, 3):
                if n < T + 1:
                    continue
                for name in LOCAL_NAMES:
                    val = exact_joint_success(stage_factory(name, s), n, s, T).joint
                    assert val <= Fraction(s, n), (name, n, s, T)


def test_random_single_stage_exact():
    assert exact_joint_success(stage_factory("random", 2), 5, 2, 1).joint == Fraction(2, 5)


def test_random_controller_draws():
    ctrl = RandomController(16, 8, seed=3)
    sets = [frozenset(ctrl.select(t, None)) for t in range(1, 4)]
    assert all(len(S) == 8 and S <= set(range(1, 17)) for S in sets)
    shared = RandomController(16, 8, seed=3, shared=True)
    assert len({frozenset(shared.select(t, None)) for t in range(1, 4)}) == 1
    with pytest.raises(InvalidParameter):
        RandomController(4, 5, seed=0)


def test_oracle_metadata_and_lead():
    pi = Permutation.shift(8)
    ctrl = oracle_controller(pi)
    assert not ctrl.local and ctrl.kind == "oracle" and ctrl.kind in KINDS
    assert ctrl.select(1, None) == {1} and ctrl.select(3, None) == {3}
    assert OracleController(pi, 1, STAGE_LEAD).select(1, None) == {2}


def test_registry():
    pi = Permutation.shift(6)
    for name in LOCAL_NAMES:
        assert make_controller(name, pi, 2).local
    assert all(make_controller(name, pi, 2).oblivious for name in OBLIVIOUS_NAMES)
    assert not make_controller("leaky", pi, 2).local
    with pytest.raises(InvalidParameter):
        make_controller("nope", pi, 2)
    assert rotating_caches(6, 2, 4) == [{1, 2}, {3, 4}, {5, 6}, {1, 2}]


def test_random_single_stage_monte_carlo():
    game = StageGame(16, 8, 1)
    wins = 0
    for seed in range(4000):
        pi = random_permutation(16, seed)
        wins += run_stage_game(pi, RandomController(16, 8, seed + 10**6), game).success
    assert abs(wins / 4000 - 0.5) < 4 * (0.25 / 4000) ** 0.5
