"""Elimination by comparison against convex combinations of queried arms.

A candidate i is dropped once some simplex weight vector w supported on the
queried set certifies a positive advantage through the combination statistic.
The supremum over the simplex is approached with multi-start Frank-Wolfe:
the objective (linear mean advantage minus a sample-seminorm radius minus a
constant l1 term) is concave, every vertex is a starting point, and the best
value found is a certified lower bound on the supremum, so firing on it never
eliminates unsoundly; it can only be late.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._engine import ConvexTester, EngineConfig, run_elimination
from .concentration import ConfidenceSchedule, alpha
from .core import RunResult
from .errors import BadConfig, InsufficientData

OVERSAMPLE_DEFAULT = 98.0

_VAR_FLOOR = 1e-30  # below this the seminorm subgradient is taken as zero


@dataclass
class OptConfig:
    """Inner-maximization budget: per-start iteration cap and stall tolerance."""

    max_iter: int = 200
    rel_tol: float = 1e-8


@dataclass
class ConvexConfig:
    oversample_mult: float = OVERSAMPLE_DEFAULT
    max_rounds: int = 10_000_000
    record_events: bool = False
    opt: OptConfig | None = None

    def __post_init__(self):
        if self.oversample_mult < 0:
            raise BadConfig("oversample multiplier must be nonnegative")
        if self.opt is None:
            self.opt = OptConfig()


def _maximize_on_moments(mu_hat, q_mat, i_local, support, a, n_arms_total,
                         config: OptConfig):
    """Frank-Wolfe ascent of the combination statistic over simplex(support).

    mu_hat and q_mat are the empirical means and covariance over the local
    arm set; support lists the local indices the weights may use (excluding
    i_local, over which the l1 term is the constant 2).  Starts at every
    vertex plus the uniform vector, tracks the best iterate seen, and returns
    (weights over support, value); the value is by construction at least the
    best vertex value.
    """
    m = support.size
    k = float(n_arms_total)
    mu_a = mu_hat[support]
    adv_const = -float(mu_hat[i_local]) - 14.0 * k * 2.0 * a * a
    q_aa = q_mat[np.ix_(support, support)]
    q_ai = q_mat[support, i_local]
    q_ii = q_mat[i_local, i_local]
    coef = 2.0 * a * np.sqrt(2.0 * k)

    def variance(w):
        v = np.einsum("sm,mn,sn->s", w, q_aa, w) - 2.0 * (w @ q_ai) + q_ii
        return np.maximum(v, 0.0)

    def value(w):
        return w @ mu_a + adv_const - coef * np.sqrt(variance(w))

    if m == 1:
        w = np.ones((1, 1))
        return w[0], float(value(w)[0])

    starts = np.vstack([np.eye(m), np.full((1, m), 1.0 / m)])
    w = starts.copy()
    vals = value(w)
    best = int(np.argmax(vals))
    best_w, best_val = w[best].copy(), float(vals[best])

    stalled = 0
    for k_it in range(config.max_iter):
        v = variance(w)
        scale = np.where(v > _VAR_FLOOR, coef / np.sqrt(np.maximum(v, _VAR_FLOOR)), 0.0)
        grad = mu_a[None, :] - scale[:, None] * (w @ q_aa - q_ai[None, :])
        towards = np.argmax(grad, axis=1)
        gamma = 2.0 / (k_it + 3.0)
        w *= 1.0 - gamma
        w[np.arange(w.shape[0]), towards] += gamma
        vals = value(w)
        top = int(np.argmax(vals))
        if vals[top] > best_val + config.rel_tol * (1.0 + abs(best_val)):
            best_w, best_val = w[top].copy(), float(vals[top])
            stalled = 0
        else:
            if vals[top] > best_val:
                best_w, best_val = w[top].copy(), float(vals[top])
            stalled += 1
            if stalled >= 3:
                break
    return best_w, best_val


def maximize_gamma(stats, sched: ConfidenceSchedule, i: int, candidates=None,
                   t: int | None = None, config: OptConfig | None = None):
    """Best combination weight vector and statistic value for candidate i.

    candidates defaults to every tracked arm; i itself is excluded from the
    support (including it only scales the statistic towards zero without
    changing its sign).  Returns (w, value) with w a full-length simplex
    vector supported on the comparators.
    """
    config = config or OptConfig()
    t = stats.t if t is None else t
    if t < 2:
        raise InsufficientData("combination maximization needs t >= 2")
    if candidates is None:
        candidates = np.flatnonzero(stats.tracked)
    candidates = np.asarray(sorted(set(int(c) for c in candidates)), dtype=int)
    comparators = candidates[candidates != i]
    if comparators.size < 1:
        raise BadConfig("need at least one comparator arm")

    local = np.concatenate([[i], comparators])
    tf = float(t)
    sums = stats.sum[local]
    gram = stats.gram[np.ix_(local, local)]
    mu_hat = sums / tf
    q_mat = (gram - np.outer(sums, sums) / tf) / (tf - 1.0)
    a = alpha(sched, t)
    support = np.arange(1, local.size)
    w_local, val = _maximize_on_moments(mu_hat, q_mat, 0, support, a,
                                        sched.n_arms, config)
    w = np.zeros(stats.n_arms)
    w[comparators] = w_local
    return w, float(val)


def run(env, sched: ConfidenceSchedule, config: ConvexConfig | None = None,
        rng: np.random.Generator | None = None) -> RunResult:
    """Full identification run with the combination test."""
    config = config or ConvexConfig()
    rng = rng if rng is not None else np.random.default_rng()
    tester = ConvexTester(sched, env.instance.n_arms, config.opt)
    engine_cfg = EngineConfig(
        oversample_mult=config.oversample_mult,
        max_rounds=config.max_rounds,
        record_events=config.record_events,
    )
    return run_elimination(env, sched, tester, engine_cfg, rng)
