"""Shared domain types: bandit instances, run results, and instance-level helpers.

Arms are 0-based everywhere in code; user-facing reports add 1 when printing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import AmbiguousOptimum, BadConfig, InfeasibleInstance

KIND_GAUSSIAN = "gaussian"
KIND_BERNOULLI = "coupled-bernoulli"

FLAG_OK = "ok"
FLAG_EMPTY = "empty_candidate_set"
FLAG_ROUND_CAP = "round_cap_hit"


@dataclass(frozen=True, eq=False)
class BernoulliCoupling:
    """Per-arm construction parameters for the coupled-Bernoulli joint law.

    Arm ``best`` is driven by a shared uniform U.  A coupled arm i fires when
    U <= a[i] or its private uniform W_i <= b[i]; an uncoupled arm fires when
    W_i <= means[i] and is independent of everything else.
    """

    v_targets: np.ndarray  # target Var(X_best - X_i), entry at best unused
    a: np.ndarray
    b: np.ndarray
    coupled: np.ndarray  # bool per arm; best arm entry is True by convention


@dataclass(frozen=True, eq=False)
class BanditInstance:
    """A joint reward law: means plus dependence structure.

    kind is either "gaussian" (dependence = covariance matrix) or
    "coupled-bernoulli" (dependence = BernoulliCoupling).
    """

    kind: str
    means: np.ndarray
    covariance: np.ndarray | None = None
    coupling: BernoulliCoupling | None = None
    label: str = ""

    @property
    def n_arms(self) -> int:
        return self.means.shape[0]


def best_arm(instance: BanditInstance) -> int:
    """Index of the unique mean-maximizing arm.

    Raises AmbiguousOptimum when the maximum is attained more than once:
    a single optimal arm is a precondition of every guarantee, so a tie is
    an instance defect rather than something to break arbitrarily.
    """
    means = np.asarray(instance.means, dtype=float)
    top = means.max()
    winners = np.flatnonzero(means == top)
    if winners.size != 1:
        raise AmbiguousOptimum(
            f"maximal mean {top} attained by arms {(winners + 1).tolist()} (1-based)"
        )
    return int(winners[0])


def gaps(instance: BanditInstance) -> np.ndarray:
    """Suboptimality gaps: entry i is mu_star - mu_i (zero at the best arm)."""
    means = np.asarray(instance.means, dtype=float)
    return means[best_arm(instance)] - means


def diff_variance(instance: BanditInstance, i: int, j: int) -> float:
    """Var(X_i - X_j) under the instance's joint law; NaN when not determined.

    Gaussian instances determine every pair from the covariance.  For
    coupled-Bernoulli instances the pairs involving the best arm and the
    coupled-coupled pairs follow from the construction; remaining pairs are
    reported as NaN.
    """
    if i == j:
        return 0.0
    if instance.kind == KIND_GAUSSIAN:
        c = instance.covariance
        return float(c[i, i] + c[j, j] - 2.0 * c[i, j])
    mu = instance.means
    cp = instance.coupling
    star = best_arm(instance)

    def var_of(k: int) -> float:
        return float(mu[k] * (1.0 - mu[k]))

    if i == star or j == star:
        other = j if i == star else i
        if cp.coupled[other]:
            return float(cp.v_targets[other])
        return var_of(i) + var_of(j)
    if not (cp.coupled[i] and cp.coupled[j]):
        return float("nan")
    # Both coupled to the shared uniform: E[Xi Xj] follows from integrating
    # over U, with the private uniforms independent.
    lo, hi = (i, j) if cp.a[i] <= cp.a[j] else (j, i)
    e_xx = cp.a[lo] + (cp.a[hi] - cp.a[lo]) * cp.b[lo] + (1.0 - cp.a[hi]) * cp.b[lo] * cp.b[hi]
    return float(mu[i] + mu[j] - 2.0 * e_xx - (mu[i] - mu[j]) ** 2)


def diff_variance_table(instance: BanditInstance) -> np.ndarray:
    """K x K table of Var(X_i - X_j); NaN entries where the law leaves it open."""
    k = instance.n_arms
    out = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            out[i, j] = out[j, i] = diff_variance(instance, i, j)
    return out


def bernoulli_diff_variance_range(x: float, y: float) -> tuple[float, float]:
    """Feasible range of Var(X - Y) for Bernoulli means x, y."""
    d = abs(x - y)
    lo = d - d * d
    hi = min(2.0 - (x + y), x + y) - (x - y) ** 2
    return lo, hi


def validate_instance(instance: BanditInstance) -> None:
    """Check the structural invariants; raises on violation."""
    means = np.asarray(instance.means, dtype=float)
    if means.ndim != 1 or means.shape[0] < 1:
        raise BadConfig("means must be a 1-d vector with at least one arm")
    best_arm(instance)  # uniqueness
    if instance.kind == KIND_GAUSSIAN:
        c = instance.covariance
        if c is None or c.shape != (means.size, means.size):
            raise BadConfig("gaussian instance needs a K x K covariance")
        if not np.allclose(c, c.T, atol=1e-10 * max(1.0, np.abs(c).max())):
            raise BadConfig("covariance must be symmetric")
        w = np.linalg.eigvalsh(0.5 * (c + c.T))
        if w.min() < -1e-8 * max(1.0, w.max()):
            raise BadConfig(f"covariance is not positive semidefinite (min eig {w.min():.3g})")
    elif instance.kind == KIND_BERNOULLI:
        if instance.coupling is None:
            raise BadConfig("coupled-bernoulli instance needs coupling parameters")
        if means.min() < 0.25 or means.max() > 0.75:
            raise InfeasibleInstance("bernoulli means must lie in [1/4, 3/4]")
        star = best_arm(instance)
        for i in range(means.size):
            if i == star:
                continue
            lo, hi = bernoulli_diff_variance_range(means[star], means[i])
            v = instance.coupling.v_targets[i]
            if not (lo - 1e-12 <= v <= hi + 1e-12):
                raise InfeasibleInstance(
                    f"target Var(X_best - X_{i + 1}) = {v:.6g} outside feasible "
                    f"range [{lo:.6g}, {hi:.6g}]"
                )
    else:
        raise BadConfig(f"unknown instance kind {instance.kind!r}")


@dataclass
class Elimination:
    """One candidate-set elimination event.

    comparators lists every arm whose pairwise test fired this round (empty
    for combination tests); weights carries the certifying simplex vector
    when a convex-combination test fired.
    """

    round: int
    arm: int
    comparators: tuple[int, ...]
    margin: float
    weights: np.ndarray | None = None


@dataclass
class RunResult:
    """Outcome of one identification run under the joint-query protocol."""

    chosen: int
    correct: bool
    total_queries: int
    rounds: int
    per_arm_queries: np.ndarray
    flag: str = FLAG_OK
    eliminations: list[Elimination] = field(default_factory=list)


def save_instance(instance: BanditInstance, path) -> None:
    doc: dict = {"kind": instance.kind, "means": np.asarray(instance.means).tolist(),
                 "label": instance.label}
    if instance.kind == KIND_GAUSSIAN:
        doc["covariance"] = np.asarray(instance.covariance).tolist()
    else:
        doc["bernoulli_params"] = {"v_targets": np.asarray(instance.coupling.v_targets).tolist()}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_instance(path) -> BanditInstance:
    """Read an instance JSON file; construction re-runs all validation."""
    from . import environments  # deferred: environments owns the constructors

    with open(path) as fh:
        doc = json.load(fh)
    kind = doc.get("kind")
    means = doc.get("means")
    label = doc.get("label", "")
    if kind == KIND_GAUSSIAN:
        return environments.make_gaussian_instance(
            means, doc["covariance"], label=label)
    if kind == KIND_BERNOULLI:
        return environments.make_coupled_bernoulli(
            means, doc["bernoulli_params"]["v_targets"], label=label)
    raise BadConfig(f"unknown instance kind {kind!r} in {path}")
