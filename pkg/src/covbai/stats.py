"""Online sufficient statistics over jointly observed rewards.

One sum vector plus one Gram matrix of cross-products serves every estimator
we need: per-arm means, the empirical variance of any linear combination of
arms, and in particular the pairwise difference variances driving the
elimination tests.  Arms that stop being queried are dropped from tracking;
their rows freeze and are never read again (tests only ever compare arms that
are still queried, which all share the same sample count).
"""

from __future__ import annotations

import numpy as np

from .errors import InsufficientData, MissingArm, NumericalIntegrity

# Sample variances are computed by subtracting large near-equal terms.  Tiny
# negative results are rounding noise and clamp to zero; anything more
# negative than this relative tolerance indicates corrupted accumulation.
_CANCEL_TOL = 1e-9


class PairStats:
    """Counts, per-arm sums and the Gram matrix of a joint reward stream."""

    def __init__(self, n_arms: int):
        if n_arms < 1:
            raise MissingArm("need at least one arm to track")
        self.n_arms = n_arms
        self.t = 0
        self.sum = np.zeros(n_arms)
        self.gram = np.zeros((n_arms, n_arms))
        self.tracked = np.ones(n_arms, dtype=bool)

    def update(self, rewards) -> "PairStats":
        """Fold in one joint observation.

        rewards is an iterable of (arm, value) pairs (or a mapping arm->value)
        covering exactly the tracked arms: all tracked arms are queried
        jointly each round, so they share the sample count t.
        """
        if hasattr(rewards, "items"):
            rewards = rewards.items()
        got = dict()
        for arm, value in rewards:
            arm = int(arm)
            if not (0 <= arm < self.n_arms) or not self.tracked[arm]:
                raise MissingArm(f"reward supplied for untracked arm {arm}")
            if arm in got:
                raise MissingArm(f"duplicate reward for arm {arm}")
            got[arm] = float(value)
        missing = np.flatnonzero(self.tracked & ~np.isin(np.arange(self.n_arms), list(got)))
        if missing.size:
            raise MissingArm(f"no reward for tracked arm(s) {missing.tolist()}")
        idx = np.fromiter(got.keys(), dtype=int)
        x = np.fromiter(got.values(), dtype=float)
        self.sum[idx] += x
        self.gram[np.ix_(idx, idx)] += np.outer(x, x)
        self.t += 1
        return self

    def drop(self, arm: int) -> None:
        """Stop tracking an arm (it left the queried set and never returns)."""
        self.tracked[arm] = False

    def mean(self, i: int) -> float:
        if self.t < 1:
            raise InsufficientData("mean needs at least one round")
        return float(self.sum[i] / self.t)

    def means(self) -> np.ndarray:
        if self.t < 1:
            raise InsufficientData("means need at least one round")
        return self.sum / self.t

    def pair_variance(self, i: int, j: int) -> float:
        """Unbiased sample variance of the difference stream X_i - X_j.

        Equals the pairwise U-statistic sum_{u<v} (d_u - d_v)^2 / (t (t-1))
        exactly, computed from the Gram matrix.
        """
        if self.t < 2:
            raise InsufficientData("pair variance needs at least two rounds")
        if i == j:
            return 0.0
        t = float(self.t)
        num = self.gram[i, i] + self.gram[j, j] - 2.0 * self.gram[i, j]
        num -= (self.sum[i] - self.sum[j]) ** 2 / t
        return self._guard(num / (t - 1.0), self.gram[i, i] + self.gram[j, j])

    def combo_variance(self, a) -> float:
        """Unbiased sample variance of the scalar stream <a, X>.

        The combination must be supported on tracked arms.
        """
        if self.t < 2:
            raise InsufficientData("combination variance needs at least two rounds")
        a = np.asarray(a, dtype=float)
        if a.shape != (self.n_arms,):
            raise MissingArm(f"combination must have length {self.n_arms}")
        if np.any((a != 0.0) & ~self.tracked):
            raise MissingArm("combination is supported on an untracked arm")
        t = float(self.t)
        num = a @ self.gram @ a - (a @ self.sum) ** 2 / t
        scale = np.abs(a) @ np.abs(self.gram) @ np.abs(a)
        return self._guard(num / (t - 1.0), scale)

    def _guard(self, value: float, raw_scale: float) -> float:
        if value >= 0.0:
            return float(value)
        tol = _CANCEL_TOL * max(1.0, raw_scale / max(self.t - 1, 1))
        if value >= -tol:
            return 0.0
        raise NumericalIntegrity(
            f"sample variance {value:.3e} below cancellation tolerance {-tol:.3e}")
