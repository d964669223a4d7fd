"""Joint reward samplers and scenario presets.

Every sampler draws the full K-dimensional reward vector each round; the run
loops mask down to the queried subset, so the joint law never depends on the
query pattern.  Block draws consume the generator stream in exactly the same
order as one-round-at-a-time draws, which keeps trajectories reproducible no
matter how the engine batches its work.
"""

from __future__ import annotations

import zlib

import numpy as np

from . import core
from .core import BanditInstance, BernoulliCoupling
from .errors import BadClusterCount, BadConfig, BadRho, InfeasibleInstance


def trial_rng(seed: int, scenario_name: str, trial: int) -> np.random.Generator:
    """Counter-based stream keyed by (experiment seed, scenario, trial index)."""
    scenario_id = zlib.crc32(scenario_name.encode("utf-8"))
    return np.random.Generator(np.random.Philox(
        np.random.SeedSequence((int(seed), scenario_id, int(trial)))))


# ---------------------------------------------------------------------------
# Instance constructors.


def make_gaussian_instance(means, covariance, label: str = "") -> BanditInstance:
    inst = BanditInstance(
        kind=core.KIND_GAUSSIAN,
        means=np.asarray(means, dtype=float),
        covariance=np.asarray(covariance, dtype=float),
        label=label,
    )
    core.validate_instance(inst)
    return inst


def coupling_parameters(mu_star: float, mu_i: float, v_target: float) -> tuple[float, float]:
    """Closed-form (a_i, b_i) putting Var(X_star - X_i) exactly at v_target."""
    gap = mu_star - mu_i
    b = (v_target - (gap - gap * gap)) / (2.0 * (1.0 - mu_star))
    a = (mu_i - b) / (1.0 - b)
    return a, b


def make_coupled_bernoulli(means, v_targets, label: str = "") -> BanditInstance:
    """Coupled-Bernoulli joint law hitting the requested difference variances.

    Arm i is tied to the best arm through a shared uniform whenever the target
    variance is at or below the independent level mu* + mu_i - mu*^2 - mu_i^2;
    above that level an independent Bernoulli already satisfies the target as
    an upper bound.
    """
    means = np.asarray(means, dtype=float)
    v_targets = np.asarray(v_targets, dtype=float)
    if v_targets.shape != means.shape:
        raise BadConfig("need one target difference-variance per arm")
    k = means.size
    star = int(np.argmax(means))
    a = np.zeros(k)
    b = np.zeros(k)
    coupled = np.ones(k, dtype=bool)
    for i in range(k):
        if i == star:
            continue
        indep_level = means[star] + means[i] - means[star] ** 2 - means[i] ** 2
        if v_targets[i] <= indep_level:
            a[i], b[i] = coupling_parameters(means[star], means[i], v_targets[i])
            if not (-1e-12 <= a[i] <= 1.0 + 1e-12 and -1e-12 <= b[i] <= 1.0 + 1e-12):
                raise InfeasibleInstance(
                    f"coupling parameters ({a[i]:.6g}, {b[i]:.6g}) for arm {i + 1} "
                    "left [0,1]; targets violate the feasibility range")
            # Derivation check: the or-construction must reproduce the mean.
            if abs(a[i] + b[i] - a[i] * b[i] - means[i]) > 1e-12:
                raise InfeasibleInstance(
                    f"coupling parameters fail the mean identity for arm {i + 1}")
        else:
            coupled[i] = False
    inst = BanditInstance(
        kind=core.KIND_BERNOULLI,
        means=means,
        coupling=BernoulliCoupling(v_targets=v_targets, a=a, b=b, coupled=coupled),
        label=label,
    )
    core.validate_instance(inst)
    return inst


# ---------------------------------------------------------------------------
# Samplers.


class GaussianEnv:
    """Multivariate normal sampler backed by a Cholesky factor."""

    def __init__(self, instance: BanditInstance):
        self.instance = instance
        self.mean = np.asarray(instance.means, dtype=float)
        self.cov = np.asarray(instance.covariance, dtype=float)
        self.chol = _cholesky_with_jitter(self.cov)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return self.sample_block(rng, 1)[0]

    def draw_raw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Raw randomness for n rounds; consumes n*K normals regardless of use."""
        return rng.standard_normal((n, self.mean.size))

    def realize(self, raw: np.ndarray, arms=None) -> np.ndarray:
        if arms is None:
            rows, mean = self.chol, self.mean
        else:
            idx = np.asarray(arms, dtype=int)
            rows, mean = self.chol[idx], self.mean[idx]
        # optimize=False keeps a fixed per-row summation order, so one-row and
        # block draws agree bitwise.
        return mean + np.einsum("nk,ik->ni", raw, rows, optimize=False)

    def sample_block(self, rng: np.random.Generator, n: int, arms=None) -> np.ndarray:
        """n i.i.d. full draws; optionally return only the listed coordinates.

        Always consumes n*K normals so the stream position is independent of
        which coordinates the caller reads.
        """
        return self.realize(self.draw_raw(rng, n), arms)


class BernoulliCoupledEnv:
    """Sampler for the coupled-Bernoulli construction."""

    def __init__(self, instance: BanditInstance):
        self.instance = instance
        self.mean = np.asarray(instance.means, dtype=float)
        self.star = core.best_arm(instance)
        cp = instance.coupling
        k = self.mean.size
        # Column thresholds: X_i = 1{U <= a_i or W_i <= b_i} when coupled,
        # 1{W_i <= mu_i} when independent; the best arm is 1{U <= mu_star}.
        self.u_thresh = np.where(cp.coupled, cp.a, -1.0)
        self.w_thresh = np.where(cp.coupled, cp.b, self.mean)
        self.u_thresh[self.star] = self.mean[self.star]
        self.w_thresh[self.star] = -1.0

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return self.sample_block(rng, 1)[0]

    def draw_raw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """One shared uniform plus one private uniform per arm, per round."""
        return rng.random((n, self.mean.size + 1))

    def realize(self, raw: np.ndarray, arms=None) -> np.ndarray:
        shared, private = raw[:, :1], raw[:, 1:]
        x = ((shared <= self.u_thresh) | (private <= self.w_thresh)).astype(float)
        if arms is None:
            return x
        return x[:, np.asarray(arms, dtype=int)]

    def sample_block(self, rng: np.random.Generator, n: int, arms=None) -> np.ndarray:
        return self.realize(self.draw_raw(rng, n), arms)


def make_env(instance: BanditInstance):
    if instance.kind == core.KIND_GAUSSIAN:
        return GaussianEnv(instance)
    return BernoulliCoupledEnv(instance)


def _cholesky_with_jitter(cov: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    jitter = 1e-10 * (np.trace(cov) / cov.shape[0])
    try:
        return np.linalg.cholesky(cov + jitter * np.eye(cov.shape[0]))
    except np.linalg.LinAlgError as exc:
        raise BadConfig("covariance not factorizable even with jitter") from exc


# ---------------------------------------------------------------------------
# Scenario presets.


def make_fig1_equicorrelated(rho: float) -> BanditInstance:
    """K=10 arms, means i/10, unit variances, constant off-diagonal correlation."""
    if not (0.0 <= rho < 1.0):
        raise BadRho(f"equicorrelation needs rho in [0, 1), got {rho}")
    k = 10
    means = np.arange(1, k + 1) / 10.0
    cov = np.full((k, k), float(rho))
    np.fill_diagonal(cov, 1.0)
    return make_gaussian_instance(means, cov, label=f"fig1-rho-{_fmt(rho)}")


def make_fig1_clusters(n_cl: int) -> BanditInstance:
    """K=16 arms, means i/10, 0.99 correlation inside equal-size clusters."""
    k = 16
    if n_cl < 1 or k % n_cl != 0:
        raise BadClusterCount(f"cluster count must divide {k}, got {n_cl}")
    means = np.arange(1, k + 1) / 10.0
    size = k // n_cl
    cov = np.zeros((k, k))
    for c in range(n_cl):
        block = slice(c * size, (c + 1) * size)
        cov[block, block] = 0.99
    np.fill_diagonal(cov, 1.0)
    return make_gaussian_instance(means, cov, label=f"fig1-clusters-{n_cl}")


TOY_BASE_MEAN = 0.5  # the reference mean is free in the construction


def make_toy2(eps: float) -> BanditInstance:
    """Two arms with X2 = X1 + Y, Y ~ N(eps, eps^2): tiny difference variance."""
    if eps <= 0:
        raise BadConfig("eps must be positive")
    m = TOY_BASE_MEAN
    means = np.array([m, m + eps])
    cov = np.array([[1.0, 1.0], [1.0, 1.0 + eps * eps]])
    return make_gaussian_instance(means, cov, label=f"toy2-{_fmt(eps)}")


def make_toy3(eps: float) -> BanditInstance:
    """make_toy2 plus an independent third arm at mean mu1 + 2 eps (the best)."""
    if eps <= 0:
        raise BadConfig("eps must be positive")
    m = TOY_BASE_MEAN
    means = np.array([m, m + eps, m + 2.0 * eps])
    cov = np.array([
        [1.0, 1.0, 0.0],
        [1.0, 1.0 + eps * eps, 0.0],
        [0.0, 0.0, 1.0],
    ])
    return make_gaussian_instance(means, cov, label=f"toy3-{_fmt(eps)}")


def _fmt(x: float) -> str:
    s = f"{x:g}"
    return s


STANDARD_SCENARIOS = (
    "fig1-rho-0", "fig1-rho-0.5", "fig1-rho-0.7", "fig1-rho-0.9",
    "fig1-clusters-8", "fig1-clusters-4", "fig1-clusters-2", "fig1-clusters-1",
    "toy2-0.1", "toy2-0.05", "toy3-0.2",
)


def scenario(name: str) -> BanditInstance:
    """Resolve a preset name (or an instance JSON path) to an instance."""
    makers = (("fig1-rho-", float, make_fig1_equicorrelated),
              ("fig1-clusters-", int, make_fig1_clusters),
              ("toy2-", float, make_toy2),
              ("toy3-", float, make_toy3))
    for prefix, parse, make in makers:
        if name.startswith(prefix):
            try:
                value = parse(name[len(prefix):])
            except ValueError as exc:
                raise BadConfig(f"unparseable scenario parameter in {name!r}") from exc
            return make(value)
    if name.endswith(".json"):
        return core.load_instance(name)
    raise BadConfig(f"unknown scenario {name!r}")
