import math

import numpy as np
import pytest

from covbai import concentration as conc, convex_bai as cx, core, environments as envs
from covbai.errors import InsufficientData
from covbai.stats import PairStats


def stats_from(x):
    stats = PairStats(x.shape[1])
    for row in x:
        stats.update(list(enumerate(row)))
    return stats


def random_state(seed, k=4, t=40):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(k, k))
    cov = a @ a.T / k + 0.1 * np.eye(k)
    chol = np.linalg.cholesky(cov)
    x = rng.normal(size=(t, k)) @ chol.T + rng.normal(scale=0.5, size=k)
    return stats_from(x)


class TestMaximizeGamma:
    def test_single_comparator_is_the_vertex(self):
        stats = random_state(0, k=2)
        sched = conc.make_schedule(0.1, 2)
        w, val = cx.maximize_gamma(stats, sched, 0)
        assert np.allclose(w, [0.0, 1.0])
        assert np.isclose(val, conc.gamma_hat(stats, sched, 0, np.array([0.0, 1.0])),
                          rtol=1e-9, atol=1e-12)

    def test_needs_two_rounds(self):
        stats = PairStats(3)
        stats.update([(0, 0.1), (1, 0.2), (2, 0.3)])
        with pytest.raises(InsufficientData):
            cx.maximize_gamma(stats, conc.make_schedule(0.1, 3), 0)

    def test_vertex_dominance_random_states(self):
        for seed in range(20):
            stats = random_state(seed, k=5, t=30)
            sched = conc.make_schedule(0.1, 5)
            i = seed % 5
            _, val = cx.maximize_gamma(stats, sched, i)
            for j in range(5):
                if j == i:
                    continue
                e = np.zeros(5)
                e[j] = 1.0
                assert val >= conc.gamma_hat(stats, sched, i, e) - 1e-12

    def test_interior_beats_vertices_under_tight_correlation(self):
        # X2 = X1 + Z + c, X3 = X1 - Z + c: the average of arms 2,3 tracks
        # arm 1 exactly while each single comparator carries the Z noise
        rng = np.random.default_rng(42)
        n = 4000
        x1 = rng.normal(size=n)
        z = rng.normal(size=n)
        x = np.stack([x1, x1 + z + 0.5, x1 - z + 0.5], axis=1)
        stats = stats_from(x)
        sched = conc.make_schedule(0.1, 3)
        w, val = cx.maximize_gamma(stats, sched, 0)
        vertex_vals = []
        for j in (1, 2):
            e = np.zeros(3)
            e[j] = 1.0
            vertex_vals.append(conc.gamma_hat(stats, sched, 0, e))
        assert val > max(vertex_vals) + 0.1
        assert w[0] == 0.0 and abs(w[1] - 0.5) < 0.1 and abs(w[2] - 0.5) < 0.1

    def test_value_is_a_certified_statistic(self):
        # the reported value never exceeds the statistic of the reported w
        for seed in range(10):
            stats = random_state(seed + 100, k=4, t=25)
            sched = conc.make_schedule(0.1, 4)
            w, val = cx.maximize_gamma(stats, sched, 1)
            direct = conc.gamma_hat(stats, sched, 1, w)
            assert np.isclose(val, direct, rtol=1e-8, atol=1e-10)


class TestConvexRun:
    def test_two_arms_matches_per_round_vertex_test(self):
        inst = envs.make_toy2(0.2)
        env = envs.make_env(inst)
        sched = conc.make_schedule(0.1, 2)
        res = cx.run(env, sched, cx.ConvexConfig(oversample_mult=0.0,
                                                 record_events=True),
                     envs.trial_rng(0, "c2", 0))
        # replay: per-round gamma_hat on the single vertex must fire at the
        # recorded round and not before
        rng = envs.trial_rng(0, "c2", 0)
        stats = PairStats(2)
        for _ in range(2):
            stats.update(list(enumerate(env.sample_block(rng, 1)[0])))
        fired_at = None
        for t in range(3, res.eliminations[0].round + 1):
            stats.update(list(enumerate(env.sample_block(rng, 1)[0])))
            val = conc.gamma_hat(stats, sched, 0, np.array([0.0, 1.0]), t)
            if val > 0.0 and fired_at is None:
                fired_at = t
        assert fired_at == res.eliminations[0].round
        assert res.chosen == 1

    def test_mult_override_two(self):
        inst = envs.make_toy3(0.3)
        env = envs.make_env(inst)
        sched = conc.make_schedule(0.1, 3)
        res = cx.run(env, sched, cx.ConvexConfig(oversample_mult=2.0,
                                                 record_events=True),
                     envs.trial_rng(1, "c3", 0))
        assert res.flag == core.FLAG_OK
        end = res.rounds
        for ev in res.eliminations:
            expected_last = min(math.floor(2.0 * ev.round), end)
            assert res.per_arm_queries[ev.arm] == expected_last

    def test_positive_gamma_never_returned(self):
        inst = envs.make_toy3(0.3)
        env = envs.make_env(inst)
        sched = conc.make_schedule(0.1, 3)
        res = cx.run(env, sched, cx.ConvexConfig(record_events=True),
                     envs.trial_rng(2, "c4", 0))
        assert res.chosen not in {e.arm for e in res.eliminations}
        assert res.correct

    def test_determinism(self):
        inst = envs.make_toy3(0.25)
        env = envs.make_env(inst)
        sched = conc.make_schedule(0.1, 3)
        a = cx.run(env, sched, cx.ConvexConfig(record_events=True),
                   envs.trial_rng(5, "cd", 1))
        b = cx.run(env, sched, cx.ConvexConfig(record_events=True),
                   envs.trial_rng(5, "cd", 1))
        assert a.total_queries == b.total_queries and a.rounds == b.rounds
        assert [(e.round, e.arm) for e in a.eliminations] == \
               [(e.round, e.arm) for e in b.eliminations]
