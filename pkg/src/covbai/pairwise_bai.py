"""Successive elimination with pairwise difference tests (bounded or Gaussian).

The round structure: two warm-up rounds querying every arm, then from t = 3
on, every arm in the queried set C is sampled jointly, each candidate i in S
is tested against max_{j in C} of the pairwise statistic, and arms that fail
are dropped from S immediately and from C once the oversampling window
(rounds up to floor(mult * t)) closes.  All tests within a round use that
round's statistics over a fixed C; an arm eliminated this round still serves
as a comparator for the others this round.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._engine import EngineConfig, PairwiseTester, run_elimination
from .concentration import ConfidenceSchedule, delta_hat_bounded, delta_hat_gaussian
from .core import Elimination, RunResult
from .errors import BadConfig

MODE_BOUNDED = "bounded"
MODE_GAUSSIAN = "gaussian"

# Oversampling presets: the analysis constant, the empirical "+" variant, and
# immediate stop.
OVERSAMPLE_DEFAULT = 82.0
OVERSAMPLE_PLUS = 2.0
OVERSAMPLE_NONE = 0.0


@dataclass
class PairwiseConfig:
    mode: str = MODE_GAUSSIAN
    oversample_mult: float = OVERSAMPLE_DEFAULT
    max_rounds: int = 10_000_000
    record_events: bool = False

    def __post_init__(self):
        if self.mode not in (MODE_BOUNDED, MODE_GAUSSIAN):
            raise BadConfig(f"unknown mode {self.mode!r}")
        if self.oversample_mult < 0:
            raise BadConfig("oversample multiplier must be nonnegative")


@dataclass
class AlgState:
    """Mutable state of a running elimination: S, C, and pending C-removals."""

    t: int
    candidates: list[int]
    queried: list[int]
    removal_round: dict[int, int] = field(default_factory=dict)
    mode: str = MODE_GAUSSIAN
    oversample_mult: float = OVERSAMPLE_DEFAULT


def init_state(n_arms: int, config: PairwiseConfig) -> AlgState:
    """Fresh state; t is positioned at 3, the first tested round."""
    if n_arms < 2:
        raise BadConfig("need at least two arms to identify a best one")
    return AlgState(
        t=3,
        candidates=list(range(n_arms)),
        queried=list(range(n_arms)),
        mode=config.mode,
        oversample_mult=config.oversample_mult,
    )


def step(state: AlgState, stats, sched: ConfidenceSchedule) -> list[Elimination]:
    """Run one round's tests; stats must already include round state.t.

    Candidates are scanned in ascending arm order against the fixed queried
    set; removals scheduled at floor(mult * t) leave C (and stop being
    tracked) once their round has passed.  Returns this round's eliminations.
    """
    stat = delta_hat_bounded if state.mode == MODE_BOUNDED else delta_hat_gaussian
    t = state.t
    events = []
    for i in sorted(state.candidates):
        best_j, best_val = -1, -np.inf
        for j in state.queried:
            if j == i:
                continue
            val = stat(stats, sched, i, j, t)
            if val > best_val:
                best_j, best_val = j, val
        if best_val > 0.0:
            fired = tuple(j for j in state.queried
                          if j != i and stat(stats, sched, i, j, t) > 0.0)
            events.append(Elimination(round=t, arm=i, comparators=fired, margin=best_val))
    for ev in events:
        state.candidates.remove(ev.arm)
        state.removal_round[ev.arm] = int(math.floor(state.oversample_mult * t))
    for arm, due in sorted(state.removal_round.items()):
        if due <= t:
            state.queried.remove(arm)
            del state.removal_round[arm]
            stats.drop(arm)
    state.t += 1
    return events


def run(env, sched: ConfidenceSchedule, config: PairwiseConfig | None = None,
        rng: np.random.Generator | None = None) -> RunResult:
    """Full identification run under the joint-query protocol."""
    config = config or PairwiseConfig()
    rng = rng if rng is not None else np.random.default_rng()
    tester = PairwiseTester(sched, config.mode)
    engine_cfg = EngineConfig(
        oversample_mult=config.oversample_mult,
        max_rounds=config.max_rounds,
        record_events=config.record_events,
    )
    return run_elimination(env, sched, tester, engine_cfg, rng)
