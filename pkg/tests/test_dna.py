import math
import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from laacoex.dna import (
    UNIFORM,
    SLConfig,
    is_pure_ne,
    lri_update,
    modal_action,
    profitable_deviations,
    run_dna,
    sample_action,
)
from laacoex.errors import DomainError, InvariantError
from laacoex.model import CoexistenceGame, Network, ProtocolConfig, TrafficProfile, utility
from laacoex.oracle import exhaustive_optimum
from laacoex.rng import py_random

from .conftest import LISTED_PATTERN, TABLE1_BETA


@st.composite
def simplex(draw):
    w = [draw(st.floats(0.0, 1.0)) for _ in range(3)]
    total = sum(w)
    if total == 0:
        return UNIFORM
    p = [x / total for x in w]
    p[2] = 1.0 - p[0] - p[1]
    if p[2] < 0:
        p[2] = 0.0
        p[1] = 1.0 - p[0]
    return tuple(p)


class TestSampling:
    def test_degenerate(self):
        rng = random.Random(0)
        assert all(sample_action((1.0, 0.0, 0.0), rng) == Network.WIFI for _ in range(1000))

    def test_uniform_frequencies(self):
        rng = random.Random(1)
        n = 300_000
        counts = Counter(sample_action(UNIFORM, rng) for _ in range(n))
        for k in Network:
            assert abs(counts[k] / n - 1 / 3) < 0.01

    def test_same_seed_same_sequence(self):
        r1, r2 = py_random(42, 0), py_random(42, 0)
        assert [sample_action((0.2, 0.5, 0.3), r1) for _ in range(200)] == [
            sample_action((0.2, 0.5, 0.3), r2) for _ in range(200)
        ]

    def test_invalid_simplex(self):
        with pytest.raises(InvariantError):
            sample_action((0.5, 0.6, 0.0), random.Random(0))
        with pytest.raises(InvariantError):
            sample_action((0.5, 0.5), random.Random(0))


class TestLri:
    def test_zero_reward_is_fixed_point(self):
        p = (0.2, 0.3, 0.5)
        assert lri_update(p, Network.LAA, 0.0, 0.5) == p

    def test_worked_step(self):
        p = lri_update(UNIFORM, Network.LAA, 1.0, 0.3)
        assert p == pytest.approx((0.233333333, 0.533333333, 0.233333333), abs=1e-8)

    def test_absorbing(self):
        for u in (0.1, 0.5, 1.0):
            assert lri_update((1.0, 0.0, 0.0), Network.WIFI, u, 0.8) == (1.0, 0.0, 0.0)

    def test_out_of_range(self):
        with pytest.raises(DomainError):
            lri_update(UNIFORM, 0, 1.2, 0.1)
        with pytest.raises(DomainError):
            lri_update(UNIFORM, 0, -0.01, 0.1)

    @settings(max_examples=300)
    @given(simplex(), st.integers(0, 2), st.floats(0.0, 1.0), st.floats(1e-6, 1.0))
    def test_preserves_simplex(self, p, chosen, u, kappa):
        q = lri_update(p, chosen, u, kappa)
        assert abs(sum(q) - 1.0) <= 1e-12
        assert min(q) >= 0.0
        # the chosen action never loses probability
        assert q[chosen] >= p[chosen] - 1e-15


def test_modal_tie_break():
    assert modal_action((0.4, 0.4, 0.2)) == 0
    assert modal_action((0.2, 0.4, 0.4)) == 1
    assert modal_action((0.1, 0.2, 0.7)) == 2


class TestRunDna:
    def test_above_beta_max_stays_put(self, table1, cfg):
        sl = SLConfig(n_max=200)
        out = run_dna(table1, 9.0, cfg, sl, seed=3)
        assert out.stop_reason == "inert"
        assert out.iterations == 200
        assert out.strategies == (UNIFORM,) * 6
        assert not out.converged
        assert out.reward == 0.0

    @pytest.mark.parametrize(
        "lambda1,lambda2,beta,best",
        [
            ((), 0.3, 0.1, Network.WIFI),
            ((), 0.3, 9.0, Network.LAA),
            ((0.1,), 0.3, 1.0, Network.LTE),
        ],
    )
    def test_single_user_finds_best_action(self, cfg, lambda1, lambda2, beta, best):
        profile = TrafficProfile(lambda1, (lambda2,))
        values = [utility(profile, (k,), beta, cfg) for k in range(3)]
        assert max(range(3), key=values.__getitem__) == best
        for seed in range(30):
            out = run_dna(profile, beta, cfg, SLConfig(), seed=seed)
            assert out.converged
            assert out.assignment == (best,)

    def test_deterministic(self, table1, cfg):
        a = run_dna(table1, TABLE1_BETA, cfg, SLConfig(), seed=99, trace=True)
        b = run_dna(table1, TABLE1_BETA, cfg, SLConfig(), seed=99, trace=True)
        assert a == b
        assert a.trace == b.trace

    def test_trace_matches_run(self, table1, cfg):
        out = run_dna(table1, TABLE1_BETA, cfg, SLConfig(), seed=5, trace=True)
        assert len(out.trace) == out.iterations
        assert out.trace[-1].strategies == out.strategies
        for step in out.trace:
            assert all(abs(math.fsum(p) - 1) <= 1e-12 for p in step.strategies)

    def test_pure_stop_means_near_pure(self, table1, cfg):
        sl = SLConfig()
        for seed in range(5):
            out = run_dna(table1, TABLE1_BETA, cfg, sl, seed=seed)
            if out.stop_reason == "pure":
                assert all(max(p) >= 1 - sl.epsilon for p in out.strategies)
                assert out.final_utility == utility(table1, out.assignment, TABLE1_BETA, cfg)

    def test_per_user_step_sizes(self, table1, cfg):
        sl = SLConfig(kappa=(0.1, 0.1, 0.2, 0.2, 0.3, 0.3))
        assert run_dna(table1, TABLE1_BETA, cfg, sl, seed=1).iterations > 0
        with pytest.raises(InvariantError):
            run_dna(table1, TABLE1_BETA, cfg, SLConfig(kappa=(0.1, 0.2)), seed=1)

    def test_custom_start(self, table1, cfg):
        start = [(1.0, 0.0, 0.0)] * 6
        out = run_dna(table1, TABLE1_BETA, cfg, SLConfig(n_max=10), seed=0, initial=start)
        # already pure: stops after one round whatever the payoff
        assert out.iterations == 1
        assert out.assignment == (0,) * 6


class TestPureNe:
    def test_optimum_is_equilibrium(self, table1, cfg):
        res = exhaustive_optimum(table1, cfg, fixed_beta=TABLE1_BETA)
        assert is_pure_ne(table1, res.best_assignment, TABLE1_BETA, cfg)

    def test_moving_su4_off_wifi_helps(self, table1, cfg):
        game = CoexistenceGame(table1, cfg)
        all_wifi = (0,) * 6
        moves = profitable_deviations(game, all_wifi, TABLE1_BETA)
        assert (3, Network.LTE) in [(j, k) for j, k, _ in moves]
        assert not is_pure_ne(table1, all_wifi, TABLE1_BETA, cfg)

    def test_listed_pattern_pattern_under_model(self, table1, cfg):
        # the pattern breaks the SU-incentive constraint here, so SU6 gains by leaving LAA
        game = CoexistenceGame(table1, cfg)
        assert game.utility(LISTED_PATTERN, TABLE1_BETA) == 0.0
        assert {j for j, _, _ in profitable_deviations(game, LISTED_PATTERN, TABLE1_BETA)} == {5}

    def test_zero_landscape_everything_is_equilibrium(self, table1, cfg):
        assert is_pure_ne(table1, (1, 1, 1, 1, 1, 1), 9.0, cfg)


def test_sl_config_validation():
    with pytest.raises(InvariantError):
        SLConfig(kappa=0.0)
    with pytest.raises(InvariantError):
        SLConfig(epsilon=0)
    with pytest.raises(InvariantError):
        SLConfig(n_max=0)
