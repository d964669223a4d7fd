"""Comparison algorithms that ignore cross-arm information.

All three run inside the joint-query protocol with the same query accounting
(one query per queried arm per round) and the same confidence budget
delta_t = delta_eff / (2 K^2 t (t+1)), so their sample counts are directly
comparable with the covariance-adaptive algorithms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._engine import _SampleBuffer
from .concentration import ConfidenceSchedule, delta_t, gaussian_variance_bounds
from .core import FLAG_OK, FLAG_ROUND_CAP, RunResult, best_arm
from .errors import BadConfig, MissingVariance

_BLOCK = 1024


@dataclass
class BaselineConfig:
    known_sigma2: np.ndarray | None = None  # required for the known-variance pair
    max_rounds: int = 10_000_000

    def sigma2(self, n_arms: int) -> np.ndarray:
        if self.known_sigma2 is None:
            raise MissingVariance("this baseline needs per-arm variances")
        s = np.asarray(self.known_sigma2, dtype=float)
        if s.shape != (n_arms,) or np.any(s <= 0):
            raise MissingVariance("need one positive variance per arm")
        return s


def config_from_instance(instance, max_rounds: int = 10_000_000) -> BaselineConfig:
    """Baselines are granted the true marginal variances of the instance."""
    if instance.kind == "gaussian":
        sigma2 = np.diag(instance.covariance).copy()
    else:
        mu = np.asarray(instance.means, dtype=float)
        sigma2 = mu * (1.0 - mu)
    return BaselineConfig(known_sigma2=sigma2, max_rounds=max_rounds)


def _finish(env, chosen, flag, total, rounds, per_arm) -> RunResult:
    return RunResult(
        chosen=int(chosen),
        correct=(int(chosen) == best_arm(env.instance)),
        total_queries=int(total),
        rounds=int(rounds),
        per_arm_queries=per_arm,
        flag=flag,
    )


def _race(env, sched: ConfidenceSchedule, config: BaselineConfig, rng,
          radius_fn, first_test_round: int) -> RunResult:
    """Shared successive-elimination loop over per-arm confidence intervals.

    radius_fn(ts, sums, sumsq, active) returns the (span, m) interval radii;
    arm i is eliminated once some survivor's lower bound exceeds its upper
    bound.  All survivors are queried jointly every round.
    """
    k = env.instance.n_arms
    if k < 2:
        raise BadConfig("need at least two arms")
    active = np.arange(k)
    sums = np.zeros(k)
    sumsq = np.zeros(k)
    per_arm = np.zeros(k, dtype=np.int64)
    total = 0
    t = 1
    buffer = _SampleBuffer(env, rng, _BLOCK)

    while active.size > 1:
        if t > config.max_rounds:
            means = sums / float(t - 1) if t > 1 else sums
            return _finish(env, active[np.argmax(means)], FLAG_ROUND_CAP,
                           total, t - 1, per_arm)
        span = min(_BLOCK, config.max_rounds - t + 1)
        x = buffer.view(span, active)
        cs = np.cumsum(np.concatenate([sums[None], x], axis=0), axis=0)[1:]
        cq = np.cumsum(np.concatenate([sumsq[None], x * x], axis=0), axis=0)[1:]
        ts = np.arange(t, t + span, dtype=float)
        means = cs / ts[:, None]
        radius = radius_fn(ts, cs, cq, active)
        lcb = means - radius
        ucb = means + radius
        out = (lcb.max(axis=1)[:, None] > ucb) & (ts >= first_test_round)[:, None]
        hits = np.flatnonzero(out.any(axis=1))
        used = int(hits[0]) + 1 if hits.size else span
        sums = cs[used - 1].copy()
        sumsq = cq[used - 1].copy()
        buffer.consume(used)
        per_arm[active] += used
        total += active.size * used
        if hits.size:
            b = int(hits[0])
            keep = ~out[b]  # the arm attaining the max lower bound never self-eliminates
            active = active[keep]
            sums = sums[keep]
            sumsq = sumsq[keep]
        t += used
    return _finish(env, active[0], FLAG_OK, total, t - 1, per_arm)


def run_hoeffding_race(env, sched: ConfidenceSchedule, config: BaselineConfig,
                       rng) -> RunResult:
    """Successive elimination with known-variance Chernoff intervals."""
    sigma2 = config.sigma2(env.instance.n_arms)

    def radius(ts, cs, cq, active):
        log_term = np.log(1.0 / delta_t(sched, ts))
        return np.sqrt(2.0 * sigma2[active][None, :] * log_term[:, None] / ts[:, None])

    return _race(env, sched, config, rng, radius, first_test_round=1)


def run_empvar_se(env, sched: ConfidenceSchedule, config: BaselineConfig,
                  rng) -> RunResult:
    """Successive elimination with empirical variances.

    The per-arm sample variance is inflated by the reciprocal of the Gaussian
    sample-variance lower ratio bound at level delta_t, so the interval is a
    valid known-variance interval on the event that every ratio bound holds.
    """

    def radius(ts, cs, cq, active):
        tcol = ts[:, None]
        var = np.maximum((cq - cs * cs / tcol) / np.maximum(tcol - 1.0, 1.0), 0.0)
        lower, _ = gaussian_variance_bounds(np.maximum(ts, 2.0), delta_t(sched, ts))
        log_term = np.log(1.0 / delta_t(sched, ts))
        return np.sqrt(2.0 * (var / lower[:, None]) * log_term[:, None] / tcol)

    return _race(env, sched, config, rng, radius, first_test_round=2)


def run_lucb(env, sched: ConfidenceSchedule, config: BaselineConfig, rng) -> RunResult:
    """Leader/challenger sampling with known-variance confidence bounds.

    Round 1 queries every arm once; afterwards each round queries the
    empirical leader and the highest-UCB challenger, stopping when the
    challenger's upper bound falls below the leader's lower bound.  The
    exploration rate reuses the shared per-round budget, evaluated at each
    arm's own query count.
    """
    import math

    k = env.instance.n_arms
    if k < 2:
        raise BadConfig("need at least two arms")
    sigma2 = config.sigma2(k)
    counts = np.ones(k, dtype=np.int64)
    total = k
    buffer = _SampleBuffer(env, rng, _BLOCK)
    all_arms = np.arange(k)
    budget = 2.0 * sched.n_arms**2 / sched.effective_delta  # 1/delta_n = budget*n*(n+1)

    chunk = buffer.view(_BLOCK, all_arms)
    pos = 1
    buffer.consume(1)
    sums = chunk[0].copy()
    means = sums.copy()
    radius = np.sqrt(2.0 * sigma2 * math.log(budget * 2.0))
    t = 2

    while True:
        leader = int(np.argmax(means))
        ucb = means + radius
        ucb[leader] = -np.inf
        challenger = int(np.argmax(ucb))
        if ucb[challenger] < means[leader] - radius[leader]:
            return _finish(env, leader, FLAG_OK, total, t - 1, counts.copy())
        if t > config.max_rounds:
            return _finish(env, leader, FLAG_ROUND_CAP, total, t - 1, counts.copy())
        if pos == chunk.shape[0]:
            chunk = buffer.view(_BLOCK, all_arms)
            pos = 0
        x = chunk[pos]
        pos += 1
        buffer.consume(1)
        for a in (leader, challenger):
            sums[a] += x[a]
            n = counts[a] = counts[a] + 1
            means[a] = sums[a] / n
            radius[a] = math.sqrt(2.0 * sigma2[a] * math.log(budget * n * (n + 1.0)) / n)
        total += 2
        t += 1
