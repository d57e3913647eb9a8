import json

import pytest
from hypothesis import given, strategies as st

from cachechase.constructions import (
    build_serial_program,
    pd_schedule,
    simulate_windowed_pd,
    stages_for,
)
from cachechase.controllers import OracleController
from cachechase.errors import InvalidParameter
from cachechase.qengine import ModelConfig, ceil_log2, forward
from cachechase.task import Permutation, all_permutations, chain, random_permutation


def test_serial_program_shape():
    cfg = ModelConfig(n=16, k=8, L=8)
    prog = build_serial_program(cfg)
    assert prog.depth == 8
    with pytest.raises(InvalidParameter):
        build_serial_program(cfg.replace(L=0))


def test_serial_program_outputs_hop_min_L_k_on_s5():
    for k in range(0, 5):
        for L in range(1, 6):
            cfg = ModelConfig(n=5, k=max(k, 1), L=L)
            prog = build_serial_program(cfg)
            for pi in all_permutations(5):
                ans = forward(prog, pi, OracleController(pi, 1), cfg).answer
                assert ans == chain(pi, min(L, cfg.k)).answer


def test_serial_exact_at_depth_k():
    cfg = ModelConfig(n=16, k=8, L=8)
    prog = build_serial_program(cfg)
    for seed in range(300):
        pi = random_permutation(16, seed)
        assert forward(prog, pi, OracleController(pi, 1), cfg).answer == chain(pi, 8).answer


def test_pd_schedule_examples():
    assert pd_schedule(16, 8, 2).depth == 4
    assert pd_schedule(16, 8, 8).depth == 3
    assert pd_schedule(16, 8, 1).depth == 8
    assert [pd_schedule(16, 8, s).depth for s in (1, 2, 4, 8, 16)] == [8, 4, 4, 3, 3]
    assert json.loads(pd_schedule(16, 8, 2).to_json()) == {
        "windows": 4, "stages_per_window": 1, "depth": 4}
    with pytest.raises(InvalidParameter):
        pd_schedule(16, 0, 2)


@given(st.integers(1, 64), st.integers(1, 80))
def test_pd_schedule_formula(k, s):
    depth = -(-k // s) * max(1, ceil_log2(min(s, k)))
    assert pd_schedule(64, k, s).depth == depth


@given(st.integers(0, 10), st.integers(0, 11))
def test_pd_schedule_monotone_on_power_of_two_grid(a, e):
    k = 2 ** a
    assert pd_schedule(4096, k, 2 ** (e + 1)).depth <= pd_schedule(4096, k, 2 ** e).depth


def test_pd_schedule_not_monotone_off_the_grid():
    # the depth formula can grow with s once windows stop dividing k evenly
    assert pd_schedule(16, 4, 2).depth == 2 and pd_schedule(16, 4, 3).depth == 4
    assert pd_schedule(16, 5, 2).depth == 3 and pd_schedule(16, 5, 4).depth == 4


@given(st.integers(2, 64))
def test_pd_schedule_endpoints(k):
    assert pd_schedule(64, k, 1).depth == k
    assert pd_schedule(64, k, k).depth == ceil_log2(k)
    assert pd_schedule(64, k, 2 * k).depth == ceil_log2(k)


def test_stages_for():
    assert [stages_for(x) for x in (1, 2, 3, 4, 5, 8, 9)] == [1, 1, 2, 2, 3, 3, 4]


def test_windowed_pd_examples():
    for seed in range(200):
        pi = random_permutation(16, seed)
        good = simulate_windowed_pd(pi, 8, 8, 3)
        assert good.success and good.answer == chain(pi, 8).answer
        assert not simulate_windowed_pd(pi, 8, 2, 3).success
        assert simulate_windowed_pd(pi, 8, 2, 4).success


def test_windowed_pd_matches_chain_on_s6():
    for pi in all_permutations(6):
        for s in (1, 2, 4):
            for k in (1, 3, 8):
                res = simulate_windowed_pd(pi, k, s, 64)
                assert res.success and res.answer == chain(pi, k).answer


def test_windowed_pd_partial_budget_stops_at_boundary():
    pi = Permutation.shift(16)
    res = simulate_windowed_pd(pi, 8, 2, 3)
    assert res.depth_used == 3 and res.answer == chain(pi, 6).answer
    with pytest.raises(InvalidParameter):
        simulate_windowed_pd(pi, 8, 2, -1)
