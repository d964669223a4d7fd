"""Confidence radii, threshold statistics, and variance concentration bounds.

All per-round quantities work elementwise on numpy arrays so the simulation
engine can evaluate whole blocks of rounds in one call; the scalar wrappers
at the bottom read from a PairStats object.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadDelta, BadWeights, InsufficientData

# The underlying concentration events fail with probability 3*delta (bounded
# pairwise) and 4*delta (Gaussian / combination), while the procedures read
# "input delta, success 1-delta".  Splitting the input by 4 makes every event
# budget honest; raw=True passes delta through unchanged.
SOUNDNESS_SPLIT = 4.0


@dataclass(frozen=True)
class ConfidenceSchedule:
    """Input confidence delta and the per-(pair, round) budget derived from it."""

    delta: float
    n_arms: int
    effective_delta: float

    def __post_init__(self):
        if not (0.0 < self.delta < 1.0):
            raise BadDelta(f"delta must lie in (0,1), got {self.delta}")
        if not (0.0 < self.effective_delta <= self.delta):
            raise BadDelta("effective delta must lie in (0, delta]")


def make_schedule(delta: float, n_arms: int, raw_delta: bool = False) -> ConfidenceSchedule:
    eff = float(delta) if raw_delta else float(delta) / SOUNDNESS_SPLIT
    return ConfidenceSchedule(delta=float(delta), n_arms=int(n_arms), effective_delta=eff)


def delta_t(sched: ConfidenceSchedule, t):
    """Per-round slice of the confidence budget: delta / (2 K^2 t (t+1))."""
    t = np.asarray(t, dtype=float)
    return sched.effective_delta / (2.0 * sched.n_arms**2 * t * (t + 1.0))


def alpha(sched: ConfidenceSchedule, t):
    """The deviation scale sqrt(log(1/delta_t) / (t-1)); needs t >= 2."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 2):
        raise InsufficientData("alpha needs t >= 2")
    out = np.sqrt(np.log(1.0 / delta_t(sched, t_arr)) / (t_arr - 1.0))
    return float(out) if out.ndim == 0 else out


def f_gauss(x):
    """Variance-ratio correction for Gaussian samples.

    exp(2x+1) for x >= 1/3 (the breakpoint uses the exponential branch, with
    its jump from 3 to e^{5/3} left as stated), 1/(1-2x) below it.
    """
    x = np.asarray(x, dtype=float)
    upper = x >= 1.0 / 3.0
    safe = np.where(upper, 1.0, 1.0 - 2.0 * x)
    out = np.where(upper, np.exp(2.0 * x + 1.0), 1.0 / safe)
    return out if out.ndim else float(out)


def eb_radius(x, v_hat, t, b=1.0):
    """Empirical-Bernstein deviation radius sqrt(2 v x / t) + 3 b x / t.

    Holds for i.i.d. samples in [0, b] with probability at least 1 - 3 e^{-x},
    with v the (biased) empirical variance.
    """
    x = np.asarray(x, dtype=float)
    return np.sqrt(2.0 * np.asarray(v_hat, dtype=float) * x / t) + 3.0 * b * x / t


def mp_std_radius(n, delta):
    """Deviation radius for the sample standard deviation of [0,1] samples.

    |sqrt(Vhat) - sqrt(V)| <= sqrt(2 log(1/delta) / (n-1)) with probability at
    least 1 - 2 delta (one delta per side); needs n >= 2.
    """
    n = np.asarray(n, dtype=float)
    if np.any(n < 2):
        raise InsufficientData("standard-deviation radius needs n >= 2")
    return np.sqrt(2.0 * np.log(1.0 / np.asarray(delta, dtype=float)) / (n - 1.0))


# ---------------------------------------------------------------------------
# Test-statistic kernels (shared by scalar wrappers and the block engine).


def bounded_gap_stat(gap, v_hat, a):
    """gap - (3/2) a sqrt(2 vhat) - 9 a^2; positive certifies the gap > 0."""
    return gap - 1.5 * a * np.sqrt(2.0 * np.asarray(v_hat, dtype=float)) - 9.0 * a * a


def gaussian_gap_stat(gap, v_hat, a):
    """gap - (3/2) a sqrt(2 f(a) vhat); the Gaussian-tail variant."""
    return gap - 1.5 * a * np.sqrt(2.0 * f_gauss(a) * np.asarray(v_hat, dtype=float))


def combo_gap_stat(adv, v_hat, l1, a, n_arms):
    """Convex-combination statistic.

    adv - 2 sqrt(2 K vhat) a - 14 K ||w - e_i||_1 a^2, where adv is the
    empirical mean advantage of the combination over the candidate arm.
    """
    k = float(n_arms)
    return (adv
            - 2.0 * a * np.sqrt(2.0 * k * np.asarray(v_hat, dtype=float))
            - 14.0 * k * np.asarray(l1, dtype=float) * a * a)


# ---------------------------------------------------------------------------
# Scalar wrappers over PairStats.


def delta_hat_bounded(stats, sched: ConfidenceSchedule, i: int, j: int, t: int | None = None):
    """Pairwise test statistic for bounded rewards; positive => mu_i < mu_j."""
    t = stats.t if t is None else t
    if t < 2:
        raise InsufficientData("pairwise statistic needs t >= 2")
    a = alpha(sched, t)
    gap = stats.mean(j) - stats.mean(i)
    return float(bounded_gap_stat(gap, stats.pair_variance(i, j), a))


def delta_hat_gaussian(stats, sched: ConfidenceSchedule, i: int, j: int, t: int | None = None):
    """Pairwise test statistic for Gaussian rewards; positive => mu_i < mu_j."""
    t = stats.t if t is None else t
    if t < 2:
        raise InsufficientData("pairwise statistic needs t >= 2")
    a = alpha(sched, t)
    gap = stats.mean(j) - stats.mean(i)
    return float(gaussian_gap_stat(gap, stats.pair_variance(i, j), a))


def check_simplex(w, n_arms: int, tracked=None, tol: float = 1e-9) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (n_arms,):
        raise BadWeights(f"weight vector must have length {n_arms}")
    if w.min() < -tol or abs(w.sum() - 1.0) > tol:
        raise BadWeights("weights must be nonnegative and sum to one")
    if tracked is not None and np.any((w > tol) & ~tracked):
        raise BadWeights("weights supported on an untracked arm")
    return w


def gamma_hat(stats, sched: ConfidenceSchedule, i: int, w, t: int | None = None):
    """Convex-combination test statistic; positive => <w, mu> > mu_i."""
    t = stats.t if t is None else t
    if t < 2:
        raise InsufficientData("combination statistic needs t >= 2")
    w = check_simplex(w, stats.n_arms, tracked=stats.tracked)
    a = alpha(sched, t)
    direction = w.copy()
    direction[i] -= 1.0
    adv = float(direction @ stats.means())
    v_hat = stats.combo_variance(direction)
    l1 = float(np.abs(direction).sum())
    return float(combo_gap_stat(adv, v_hat, l1, a, sched.n_arms))


def gaussian_variance_bounds(n: int, delta: float) -> tuple[float, float]:
    """Two-sided ratio bounds for the sample variance of n unit normals.

    Returns (lower, upper) such that Vhat/V lies in [lower, upper] with
    probability at least 1 - 3 delta; requires delta < 1/3.
    """
    delta = np.asarray(delta, dtype=float)
    if np.any(delta <= 0.0) or np.any(delta >= 1.0 / 3.0):
        raise BadDelta("variance bounds need delta in (0, 1/3)")
    n = np.asarray(n, dtype=float)
    if np.any(n < 2):
        raise InsufficientData("variance bounds need n >= 2")
    log_term = np.log(1.0 / delta)
    root = np.sqrt(log_term / (n - 1.0))
    lower = np.maximum(1.0 - 2.0 * root, np.exp(-1.0) * delta ** (2.0 / (n - 1.0)))
    upper = 1.0 + 2.0 * root + 2.0 * log_term / (n - 1.0)
    if lower.ndim:
        return lower, upper
    return float(lower), float(upper)
