"""Block-vectorized run loop for the joint-query elimination algorithms.

The protocol semantics are strictly per-round, but evaluating one round at a
time in Python is far too slow at the 1e5..1e6 round horizons the confidence
schedules imply.  The engine therefore processes rounds in blocks:

* the sampler draws raw randomness in blocks whose stream order is identical
  to one-round-at-a-time draws, so trajectories are reproducible and agree
  with a naive per-round implementation;
* cumulative sums/Gram matrices are accumulated in strict round order
  (including the running base), so the statistics after round t are bitwise
  the ones an incremental implementation maintains;
* elimination tests are evaluated for every round of the block at once, and
  the block is cut at the first firing round, at scheduled query-set
  removals, and at interior-search rounds, so the queried set is constant
  within each processed span.

Only currently-queried arms are held in the compacted state; an arm that
leaves the queried set can never re-enter, so its statistics are dead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import concentration as conc
from .core import FLAG_EMPTY, FLAG_OK, FLAG_ROUND_CAP, Elimination, RunResult, best_arm
from .errors import BadConfig, NumericalIntegrity

_BLOCK = 1024


class _SampleBuffer:
    """Full-vector draws, consumable in round order with partial views."""

    def __init__(self, env, rng, block=_BLOCK):
        self.env = env
        self.rng = rng
        self.block = block
        self._raw = env.draw_raw(rng, 0)
        self._cursor = 0

    def view(self, n: int, arms) -> np.ndarray:
        """Rewards of the given arms for the next n rounds (not yet consumed)."""
        avail = self._raw.shape[0] - self._cursor
        if avail < n:
            extra = self.env.draw_raw(self.rng, max(self.block, n - avail))
            self._raw = np.concatenate([self._raw[self._cursor:], extra], axis=0)
            self._cursor = 0
        rows = self._raw[self._cursor:self._cursor + n]
        return self.env.realize(rows, arms)

    def consume(self, n: int) -> None:
        self._cursor += n


def _cum_moments(base_sum, base_gram, x):
    """Statistics after each round of the block, accumulated in round order."""
    cs = np.cumsum(np.concatenate([base_sum[None], x], axis=0), axis=0)[1:]
    outer = np.einsum("ni,nj->nij", x, x)
    cg = np.cumsum(np.concatenate([base_gram[None], outer], axis=0), axis=0)[1:]
    return cs, cg


def _pair_variances(cs, cg, ts):
    """V-hat[b, i, j] for every pair, matching the scalar estimator's order."""
    d = np.einsum("bii->bi", cg)
    num = d[:, :, None] + d[:, None, :]
    num = num - 2.0 * cg
    num = num - (cs[:, :, None] - cs[:, None, :]) ** 2 / ts[:, None, None]
    v = num / (ts - 1.0)[:, None, None]
    low = v.min() if v.size else 0.0
    if low < 0.0:
        tol = 1e-9 * max(1.0, 2.0 * float(d.max(initial=0.0)) / max(float(ts[0]) - 1.0, 1.0))
        if low < -tol:
            raise NumericalIntegrity(f"pair variance {low:.3e} below tolerance {-tol:.3e}")
        np.maximum(v, 0.0, out=v)
    return v


@dataclass
class EngineConfig:
    oversample_mult: float = 82.0
    max_rounds: int = 10_000_000
    record_events: bool = False
    block: int = _BLOCK


class PairwiseTester:
    """Per-round pairwise tests over the compacted active set."""

    def __init__(self, sched, mode: str):
        if mode not in ("bounded", "gaussian"):
            raise BadConfig(f"mode must be 'bounded' or 'gaussian', got {mode!r}")
        self.sched = sched
        self.kernel = (conc.bounded_gap_stat if mode == "bounded"
                       else conc.gaussian_gap_stat)

    def stat_tensor(self, cs, cg, ts):
        means = cs / ts[:, None]
        gap = means[:, None, :] - means[:, :, None]
        v = _pair_variances(cs, cg, ts)
        a = conc.alpha(self.sched, ts)[:, None, None]
        return self.kernel(gap, v, a)

    def fired(self, cs, cg, ts, is_cand):
        t_stat = self.stat_tensor(cs, cg, ts)
        return (t_stat > 0.0).any(axis=2) & is_cand[None, :]

    def event(self, cs, cg, ts, b, i_local, active, t_round):
        row = self.stat_tensor(cs[b:b + 1], cg[b:b + 1], ts[b:b + 1])[0, i_local]
        js = np.flatnonzero(row > 0.0)
        return Elimination(
            round=t_round,
            arm=int(active[i_local]),
            comparators=tuple(int(active[j]) for j in js),
            margin=float(row.max()),
        )

    def next_special_round(self, t):  # no extra test schedule
        return None

    def special_fired(self, sums, gram, t, active, is_cand):
        return []


class ConvexTester:
    """Vertex tests every round; simplex-interior search on a round schedule.

    The vertex statistics are exact per round.  The interior Frank-Wolfe
    search runs on a geometric grid of rounds (every round up to 64, then 5%
    growth); testing less often can only delay an elimination, never make an
    unsound one, and an exact optimistic bound prunes candidates whose
    supremum cannot be positive regardless of the variance term.
    """

    def __init__(self, sched, n_arms_total, fw_config):
        self.sched = sched
        self.k_total = n_arms_total
        self.fw_config = fw_config
        self._grid = _fw_grid(64, 1.05)

    def stat_tensor(self, cs, cg, ts):
        means = cs / ts[:, None]
        gap = means[:, None, :] - means[:, :, None]
        v = _pair_variances(cs, cg, ts)
        a = conc.alpha(self.sched, ts)[:, None, None]
        return conc.combo_gap_stat(gap, v, 2.0, a, self.k_total)

    def fired(self, cs, cg, ts, is_cand):
        t_stat = self.stat_tensor(cs, cg, ts)
        return (t_stat > 0.0).any(axis=2) & is_cand[None, :]

    def event(self, cs, cg, ts, b, i_local, active, t_round):
        row = self.stat_tensor(cs[b:b + 1], cg[b:b + 1], ts[b:b + 1])[0, i_local]
        js = np.flatnonzero(row > 0.0)
        return Elimination(
            round=t_round,
            arm=int(active[i_local]),
            comparators=tuple(int(active[j]) for j in js),
            margin=float(row.max()),
        )

    def next_special_round(self, t):
        if t <= self._grid[0]:
            return t
        pos = np.searchsorted(self._grid, t)
        return int(self._grid[pos]) if pos < self._grid.size else None

    def special_fired(self, sums, gram, t, active, is_cand):
        """Interior search at round t; returns (local index, Elimination) pairs."""
        from .convex_bai import _maximize_on_moments  # local import avoids a cycle

        tf = float(t)
        mu_hat = sums / tf
        q_mat = (gram - np.outer(sums, sums) / tf) / (tf - 1.0)
        a = conc.alpha(self.sched, t)
        prune = 14.0 * self.k_total * 2.0 * a * a
        out = []
        for i_local in np.flatnonzero(is_cand):
            others = np.flatnonzero(np.arange(active.size) != i_local)
            if others.size < 2:
                continue  # single comparator: the vertex test already covers it
            if mu_hat[others].max() - mu_hat[i_local] - prune <= 0.0:
                continue  # supremum cannot be positive this round
            w_local, value = _maximize_on_moments(
                mu_hat, q_mat, int(i_local), others, a, self.k_total, self.fw_config)
            if value > 0.0:
                w_full = np.zeros(self.k_total)
                w_full[active[others]] = w_local
                out.append((int(i_local), Elimination(
                    round=t, arm=int(active[i_local]), comparators=(),
                    margin=float(value), weights=w_full)))
        return out


def _fw_grid(start: int, growth: float, limit: int = 20_000_000) -> np.ndarray:
    grid = [start]
    g = start
    while g < limit:
        g = max(g + 1, int(g * growth))
        grid.append(g)
    return np.asarray(grid, dtype=np.int64)


def run_elimination(env, sched, tester, cfg: EngineConfig, rng) -> RunResult:
    """Warm-up, then rounds of joint queries with per-round elimination tests."""
    inst = env.instance
    k = inst.n_arms
    if k < 2:
        raise BadConfig("need at least two arms to identify a best one")
    if cfg.oversample_mult < 0:
        raise BadConfig("oversample multiplier must be nonnegative")
    if cfg.max_rounds < 3:
        raise BadConfig("max_rounds must allow at least one tested round")

    active = np.arange(k)          # queried set C, ascending
    is_cand = np.ones(k, bool)     # S membership, parallel to active
    removal_round: dict[int, int] = {}
    per_arm = np.zeros(k, dtype=np.int64)
    total = 0
    events: list[Elimination] = []
    buffer = _SampleBuffer(env, rng, cfg.block)

    # Warm-up: two full-query rounds before any test.
    x = buffer.view(2, active)
    warm_cs, warm_cg = _cum_moments(np.zeros(k), np.zeros((k, k)), x)
    sums, gram = warm_cs[-1].copy(), warm_cg[-1].copy()
    buffer.consume(2)
    per_arm += 2
    total += 2 * k
    t = 3

    flag = FLAG_OK
    chosen = -1
    last_eliminated = -1

    while True:
        n_cand = int(is_cand.sum())
        if n_cand == 1:
            chosen = int(active[np.flatnonzero(is_cand)[0]])
            break
        if n_cand == 0:
            flag = FLAG_EMPTY
            chosen = last_eliminated
            break
        if t > cfg.max_rounds:
            flag = FLAG_ROUND_CAP
            means = sums / float(t - 1)
            cand = np.flatnonzero(is_cand)
            chosen = int(active[cand[np.argmax(means[cand])]])
            break

        stop = min(t + cfg.block - 1, cfg.max_rounds)
        if removal_round:
            stop = min(stop, min(removal_round.values()))
        special = tester.next_special_round(t)
        if special is not None:
            stop = min(stop, special)
        span = stop - t + 1

        x = buffer.view(span, active)
        cs, cg = _cum_moments(sums, gram, x)
        ts = np.arange(t, t + span, dtype=float)
        fired = tester.fired(cs, cg, ts, is_cand)
        hits = np.flatnonzero(fired.any(axis=1))

        used = int(hits[0]) + 1 if hits.size else span
        round_now = t + used - 1
        sums = cs[used - 1].copy()
        gram = cg[used - 1].copy()
        buffer.consume(used)
        per_arm[active] += used
        total += active.size * used

        elim_locals: list[int] = []
        if hits.size:
            b = int(hits[0])
            for i_local in np.flatnonzero(fired[b]):
                elim_locals.append(int(i_local))
                if cfg.record_events:
                    events.append(tester.event(cs, cg, ts, b, int(i_local), active, round_now))
        if special is not None and round_now == special:
            for i_local, event in tester.special_fired(sums, gram, round_now, active, is_cand):
                if i_local not in elim_locals:
                    elim_locals.append(i_local)
                    if cfg.record_events:
                        events.append(event)
            elim_locals.sort()

        for i_local in elim_locals:
            is_cand[i_local] = False
            last_eliminated = int(active[i_local])
            removal_round[int(active[i_local])] = int(math.floor(cfg.oversample_mult * round_now))

        if removal_round:
            due = sorted(g for g, r in removal_round.items() if r <= round_now)
            if due:
                keep = ~np.isin(active, due)
                active = active[keep]
                is_cand = is_cand[keep]
                sums = sums[keep]
                gram = gram[np.ix_(keep, keep)]
                for g in due:
                    del removal_round[g]
        t = round_now + 1

    rounds = t - 1
    return RunResult(
        chosen=chosen,
        correct=(chosen == best_arm(inst)),
        total_queries=int(total),
        rounds=int(rounds),
        per_arm_queries=per_arm,
        flag=flag,
        eliminations=events,
    )
