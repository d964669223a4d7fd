"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s`.  The Monte-Carlo cells are
seeded, so every number below is reproducible; the heavier cells take minutes
on one core (the convex fig1-rho-0 cell dominates).
"""

import math
import shutil
import subprocess
from pathlib import Path

import numpy as np
import pytest
from scipy import stats as sp_stats

from covbai import (bench, complexity, concentration as conc, convex_bai,
                    core, environments as envs, pairwise_bai as pw)
from covbai.errors import InfeasibleInstance
from covbai.stats import PairStats

pytestmark = pytest.mark.acceptance

SEED = 7
DELTA = 0.1

_cells: dict = {}


def cell(scenario: str, algo: str, trials: int) -> list[dict]:
    """Bench rows for one (scenario, algo) cell; cached and prefix-stable."""
    key = (scenario, algo)
    rows = _cells.get(key, [])
    for t in range(len(rows), trials):
        rows.append(bench.run_trial(scenario, algo, DELTA, seed=SEED, trial=t))
    _cells[key] = rows
    return rows[:trials]


def queries(rows) -> np.ndarray:
    return np.array([r["total_queries"] for r in rows], dtype=float)


def mean_se(rows) -> tuple[float, float]:
    q = queries(rows)
    return float(q.mean()), float(q.std(ddof=1) / math.sqrt(q.size))


def report(num: int, ok: bool, detail: str) -> None:
    line = f"[criterion {num:2d}] {'PASS' if ok else 'FAIL'}: {detail}"
    print(line)
    assert ok, line


def binom_upper_99(errors: int, n: int) -> float:
    """Exact (Clopper-Pearson) one-sided 99% upper bound on the error rate."""
    if errors >= n:
        return 1.0
    return float(sp_stats.beta.ppf(0.99, errors + 1, n - errors))


class TestCriterion1Soundness:
    @pytest.mark.parametrize("algo", ["pairwise", "pairwise-plus", "convex"])
    @pytest.mark.parametrize("scenario", ["fig1-rho-0", "fig1-rho-0.9", "toy3-0.2"])
    def test_delta_soundness(self, algo, scenario):
        rows = cell(scenario, algo, 300)
        errors = sum(1 - r["correct"] for r in rows)
        rate = errors / 300.0
        ucb = binom_upper_99(errors, 300)
        report(1, rate <= DELTA and ucb <= 0.15,
               f"{algo} on {scenario}: {errors}/300 errors "
               f"(rate {rate:.4f}, 99% UCB {ucb:.4f} <= 0.15)")


class TestCriterion2CorrelationMonotonicity:
    def test_rho_sweep(self):
        stats = {rho: mean_se(cell(f"fig1-rho-{rho}", "pairwise", 100))
                 for rho in ("0", "0.5", "0.9")}
        ok = True
        parts = []
        order = ["0", "0.5", "0.9"]
        for a, b in zip(order, order[1:]):
            (ma, sa), (mb, sb) = stats[a], stats[b]
            margin = (ma - mb) / math.sqrt(sa**2 + sb**2)
            ok &= ma - mb >= 2.0 * math.sqrt(sa**2 + sb**2)
            parts.append(f"rho {a}->{b}: {ma:.0f}->{mb:.0f} ({margin:.1f} se)")
        report(2, ok, "; ".join(parts))


class TestCriterion3ClusterMonotonicity:
    def test_cluster_sweep(self):
        stats = {n: mean_se(cell(f"fig1-clusters-{n}", "pairwise", 100))
                 for n in (8, 4, 2, 1)}
        ok = True
        parts = []
        for a, b in zip((8, 4, 2), (4, 2, 1)):
            (ma, sa), (mb, sb) = stats[a], stats[b]
            margin = (ma - mb) / math.sqrt(sa**2 + sb**2)
            ok &= ma - mb >= 2.0 * math.sqrt(sa**2 + sb**2)
            parts.append(f"{a}->{b} clusters: {ma:.0f}->{mb:.0f} ({margin:.1f} se)")
        report(3, ok, "; ".join(parts))


class TestCriterion4CovarianceAdvantage:
    def test_high_correlation_advantage(self):
        mp, sp_ = mean_se(cell("fig1-rho-0.9", "pairwise", 100))
        mh, sh = mean_se(cell("fig1-rho-0.9", "hoeffding", 100))
        se = math.sqrt(sp_**2 + sh**2)
        report(4, mh - mp >= 2.0 * se,
               f"rho 0.9: pairwise {mp:.0f} vs hoeffding {mh:.0f} "
               f"(advantage {(mh - mp) / se:.1f} se)")

    def test_independent_case_parity(self):
        mp, sp_ = mean_se(cell("fig1-rho-0", "pairwise", 100))
        mh, sh = mean_se(cell("fig1-rho-0", "hoeffding", 100))
        se = math.sqrt(sp_**2 + sh**2)
        report(4, abs(mp - mh) < 3.0 * se,
               f"rho 0: pairwise {mp:.0f} vs hoeffding {mh:.0f} "
               f"(|diff| {abs(mp - mh) / se:.1f} se, tolerance 3)")


class TestCriterion5ToyScaling:
    def test_log_inverse_delta_scaling(self):
        p_01 = mean_se(cell("toy2-0.1", "pairwise", 100))[0]
        p_005 = mean_se(cell("toy2-0.05", "pairwise", 100))[0]
        h_01 = mean_se(cell("toy2-0.1", "hoeffding", 100))[0]
        h_005 = mean_se(cell("toy2-0.05", "hoeffding", 100))[0]
        ratio_p = p_005 / p_01
        ratio_h = h_005 / h_01
        report(5, ratio_p <= 2.0 and ratio_h >= 3.0,
               f"pairwise ratio {ratio_p:.2f} <= 2; hoeffding ratio {ratio_h:.2f} >= 3")


class TestCriterion6BaselineBlindness:
    @pytest.mark.parametrize("algo", ["hoeffding", "lucb", "empvar-se"])
    def test_correlation_blind(self, algo):
        rows0 = cell("fig1-rho-0", algo, 100)
        rows9 = cell("fig1-rho-0.9", algo, 100)
        m0, s0 = mean_se(rows0)
        m9, s9 = mean_se(rows9)
        se = math.sqrt(s0**2 + s9**2)
        # the baselines must also be delta-sound on these instances
        errors = sum(1 - r["correct"] for r in rows0 + rows9)
        sound = binom_upper_99(errors, 200) <= 0.15
        report(6, abs(m0 - m9) < 3.0 * se and sound,
               f"{algo}: rho 0 {m0:.0f} vs rho 0.9 {m9:.0f} "
               f"(|diff| {abs(m0 - m9) / se:.1f} se); {errors}/200 errors")


class TestCriterion7EstimatorOracle:
    def test_u_statistic_oracle(self):
        rng = np.random.default_rng(SEED)
        worst = 0.0
        for _ in range(1000):
            t = int(rng.integers(2, 51))
            d = rng.normal(scale=rng.uniform(0.1, 10.0), size=t)
            stats = PairStats(2)
            for value in d:
                stats.update([(0, value), (1, 0.0)])
            brute = np.sum(np.subtract.outer(d, d) ** 2) / (2.0 * t * (t - 1))
            got = stats.pair_variance(0, 1)
            worst = max(worst, abs(got - brute) / brute)
        report(7, worst <= 1e-10, f"max relative error {worst:.2e} <= 1e-10 "
                                  "over 1000 sequences")


class TestCriterion8ConcentrationCoverage:
    def _alpha(self, t, n_arms=2):
        sched = conc.make_schedule(DELTA, n_arms)
        return conc.alpha(sched, t), sched

    def test_bounded_event_coverage(self):
        inst = envs.make_coupled_bernoulli([0.6, 0.4], [0.0, 0.3])
        env = envs.make_env(inst)
        true_gap = 0.2
        reps = 2000
        ok = True
        parts = []
        rng = np.random.default_rng(SEED + 1)
        for t in (10, 100, 1000):
            x = env.sample_block(rng, reps * t).reshape(reps, t, 2)
            d = x[:, :, 0] - x[:, :, 1]
            gap_err = np.abs(d.mean(axis=1) - true_gap)
            vhat = d.var(axis=1, ddof=1)
            a, _ = self._alpha(t)
            covered = gap_err <= a * np.sqrt(2.0 * vhat) + 6.0 * a * a
            freq = covered.mean()
            nominal = 1.0 - 3.0 * 0.025
            slack = 3.0 * math.sqrt(nominal * (1 - nominal) / reps)
            ok &= freq >= nominal - slack
            parts.append(f"t={t}: {freq:.4f} >= {nominal - slack:.4f}")
        report(8, ok, "bounded-event coverage " + "; ".join(parts))

    def test_gaussian_event_coverage(self):
        cov = np.array([[1.0, 0.3], [0.3, 1.0]])
        inst = envs.make_gaussian_instance([0.5, 0.0], cov)
        env = envs.make_env(inst)
        v_true = 1.4
        reps = 2000
        ok = True
        parts = []
        rng = np.random.default_rng(SEED + 2)
        for t in (10, 100, 1000):
            x = env.sample_block(rng, reps * t).reshape(reps, t, 2)
            d = x[:, :, 0] - x[:, :, 1]
            gap_err = np.abs(d.mean(axis=1) - 0.5)
            vhat = d.var(axis=1, ddof=1)
            a, _ = self._alpha(t)
            f = conc.f_gauss(a)
            nominal = 1.0 - 4.0 * 0.025
            slack = 3.0 * math.sqrt(nominal * (1 - nominal) / reps)
            for name, covered in (
                    ("mean", gap_err <= np.sqrt(2.0 * f * vhat) * a),
                    ("var-upper", vhat <= v_true * (1.0 + 2.0 * a + 2.0 * a * a)),
                    ("var-lower", v_true <= vhat * f)):
                freq = covered.mean()
                ok &= freq >= nominal - slack
                parts.append(f"t={t} {name}: {freq:.4f}")
        report(8, ok, "gaussian-event coverage " + "; ".join(parts))


class TestCriterion9UltraMetric:
    def test_all_triples(self):
        rng = np.random.default_rng(SEED + 3)
        violations = 0
        for _ in range(1000):
            k = 5
            a = rng.normal(size=(k, k))
            cov = a @ a.T / k + 0.05 * np.eye(k)
            means = rng.normal(size=k)
            means[int(rng.integers(k))] += 0.5
            if np.unique(means).size < k:
                continue
            inst = envs.make_gaussian_instance(means, cov)
            tables = complexity.lambda_tables(inst)
            for table in (tables.envelope, tables.gaussian):
                rhs = np.maximum(table[:, None, :], table.T[None, :, :])
                lhs = table[:, :, None]
                finite = np.isfinite(lhs) & np.isfinite(rhs)
                bad = finite & (lhs > rhs * (1.0 + 1e-12))
                violations += int(bad.sum())
        report(9, violations == 0, f"{violations} triple violations over 1000 instances")


class TestCriterion10HandValues:
    def test_calculator_values(self):
        inst_h = envs.make_gaussian_instance([0.5, 0.3, 0.1], np.eye(3))
        h = complexity.h_complexity(inst_h, 1.0)

        c01 = (2.0 - 1.0) / 2.0
        inst_l = envs.make_gaussian_instance(
            [0.0, 0.5], np.array([[1.0, c01], [c01, 1.0]]))
        tables = complexity.lambda_tables(inst_l)

        lb_b = complexity.lower_bound_bernoulli([0.75, 0.5], [0.0, 0.2], 0.025)
        lb_g = complexity.lower_bound_gaussian([0.0, 0.5], [1.0, 0.0], 0.025)

        checks = {
            "H": (h, 31.25),
            "lambda-envelope": (tables.envelope[0, 1], 10.0),
            "lambda-headline": (tables.headline[0, 1], 6.0),
            "lambda-gaussian": (tables.gaussian[0, 1], 4.0),
            "lb-bernoulli": (lb_b, 0.5 * math.log(10.0)),
            "lb-gaussian": (lb_g, 2.0 * math.log(10.0) / math.log(1.25)),
        }
        worst = max(abs(got - want) / max(abs(want), 1.0)
                    for got, want in checks.values())
        report(10, worst <= 1e-9,
               "hand values "
               + "; ".join(f"{k}={got:.6g}" for k, (got, _) in checks.items())
               + f" (max rel err {worst:.1e})")


class TestCriterion11BernoulliCoupling:
    def test_targets_hit_and_infeasible_rejected(self):
        rng = np.random.default_rng(SEED + 4)
        n = 100_000
        ok = True
        worst = 0.0
        for _ in range(20):
            mu1 = rng.uniform(0.35, 0.75)
            mui = rng.uniform(0.25, mu1 - 0.05)
            lo, hi = core.bernoulli_diff_variance_range(mu1, mui)
            v = rng.uniform(lo + 0.02 * (hi - lo), hi - 0.02 * (hi - lo))
            inst = envs.make_coupled_bernoulli([mu1, mui], [0.0, v])
            env = envs.make_env(inst)
            x = env.sample_block(np.random.default_rng(rng.integers(2**32)), n)
            mean_err = abs(x[:, 1].mean() - mui) / math.sqrt(mui * (1 - mui) / n)
            d = x[:, 0] - x[:, 1]
            vhat = d.var(ddof=1)
            se_v = math.sqrt(max(np.mean(d**4) - np.mean(d**2) ** 2, 1e-12) / n)
            target = core.diff_variance(inst, 0, 1)
            var_err = abs(vhat - target) / se_v
            worst = max(worst, mean_err, var_err)
            ok &= mean_err <= 5.0 and var_err <= 5.0
        rejected = 0
        for _ in range(5):
            mu1 = rng.uniform(0.4, 0.75)
            mui = rng.uniform(0.25, mu1 - 0.1)
            lo, _ = core.bernoulli_diff_variance_range(mu1, mui)
            try:
                envs.make_coupled_bernoulli([mu1, mui], [0.0, max(lo - 0.05, 0.0)])
            except InfeasibleInstance:
                rejected += 1
        ok &= rejected == 5
        report(11, ok, f"20 feasible triples within 5 se (worst {worst:.2f}); "
                       f"{rejected}/5 infeasible rejected")


class TestCriterion12EliminationEnvelope:
    def test_firing_round_envelope(self):
        inst = envs.make_fig1_equicorrelated(0.5)
        env = envs.make_env(inst)
        sched = conc.make_schedule(DELTA, inst.n_arms)
        table = complexity.lambda_tables(inst).envelope
        config = pw.PairwiseConfig(mode=pw.MODE_BOUNDED, oversample_mult=0.0,
                                   record_events=True)
        trials_with_violation = 0
        trials = 200
        for trial in range(trials):
            res = pw.run(env, sched, config, envs.trial_rng(SEED, "envelope", trial))
            violated = False
            for ev in res.eliminations:
                bound_log = math.log(1.0 / conc.delta_t(sched, ev.round))
                for j in ev.comparators:
                    if ev.round - 1 < 0.25 * bound_log * table[ev.arm, j]:
                        violated = True
            trials_with_violation += violated
        frac = trials_with_violation / trials
        nominal = 3.0 * 0.025
        tol = nominal + 3.0 * math.sqrt(nominal * (1 - nominal) / trials)
        report(12, frac <= tol,
               f"{trials_with_violation}/{trials} trials with an early firing "
               f"({frac:.3f} <= {tol:.3f})")


class TestCriterion13VertexDominance:
    def test_maximizer_dominates_vertices(self):
        rng = np.random.default_rng(SEED + 5)
        violations = 0
        worst = 0.0
        for trial in range(100):
            k = int(rng.integers(3, 7))
            a = rng.normal(size=(k, k))
            cov = a @ a.T / k + 0.1 * np.eye(k)
            chol = np.linalg.cholesky(cov)
            t = int(rng.integers(5, 60))
            x = rng.normal(size=(t, k)) @ chol.T + rng.normal(scale=0.5, size=k)
            stats = PairStats(k)
            for row in x:
                stats.update(list(enumerate(row)))
            sched = conc.make_schedule(DELTA, k)
            i = int(rng.integers(k))
            _, val = convex_bai.maximize_gamma(stats, sched, i)
            for j in range(k):
                if j == i:
                    continue
                e = np.zeros(k)
                e[j] = 1.0
                gap = conc.gamma_hat(stats, sched, i, e) - val
                worst = max(worst, gap)
                if gap > 1e-12:
                    violations += 1
        report(13, violations == 0,
               f"{violations} vertex-dominance violations over 100 states "
               f"(worst vertex excess {worst:.2e})")


class TestCriterion14Determinism:
    def test_serial_parallel_csv_identical(self):
        base = dict(scenarios=["toy2-0.1", "fig1-rho-0.9"],
                    algos=["pairwise", "hoeffding"], trials=3, seed=SEED, delta=DELTA)
        serial = bench.rows_to_csv(bench.run_bench(bench.BenchConfig(**base)))
        parallel = bench.rows_to_csv(bench.run_bench(bench.BenchConfig(**base, jobs=2)))
        rerun = bench.rows_to_csv(bench.run_bench(bench.BenchConfig(**base)))

        def strip_wall(text):
            return [",".join(line.split(",")[:-1]) for line in text.splitlines()]

        same = (strip_wall(serial) == strip_wall(parallel) == strip_wall(rerun))
        report(14, same, "bench CSV identical (excluding wall_ms) across serial, "
                         "parallel, and rerun")


PLOTS_DIR = Path(__file__).resolve().parents[1] / "plots"


class TestCriterion15PlotRender:
    """Secondary-component check; authoritative coverage lives in plots/ tests."""

    def _cli(self):
        cli = PLOTS_DIR / "dist" / "cli.js"
        if not cli.exists() or shutil.which("node") is None:
            pytest.skip("plots CLI not built; run `npm install && npm run build` "
                        "in plots/ (covered by its vitest suite)")
        return cli

    def test_render_and_schema(self, tmp_path):
        cli = self._cli()
        rows = []
        for rho in ("0", "0.5", "0.7", "0.9"):
            for algo in ("pairwise", "hoeffding"):
                rows.extend(cell(f"fig1-rho-{rho}", algo, 3))
        csv_path = tmp_path / "sweep.csv"
        bench.write_csv(rows, csv_path)
        out = tmp_path / "sweep.svg"
        proc = subprocess.run(
            ["node", str(cli), "--csv", str(csv_path), "--group-by", "rho",
             "--out", str(out)],
            capture_output=True, text=True)
        ok = proc.returncode == 0 and out.exists()
        bars = []
        if ok:
            import re

            svg = out.read_text()
            bars = re.findall(r'data-mean="([0-9.eE+-]+)"', svg)
            ok &= len(bars) == 8
            means = {}
            for row in rows:
                means.setdefault((row["scenario"], row["algo"]), []).append(
                    row["total_queries"])
            expected = sorted(np.mean(v) for v in means.values())
            got = sorted(float(b) for b in bars)
            ok &= np.allclose(got, expected, rtol=1e-9, atol=1e-9)

        bad_csv = tmp_path / "bad.csv"
        bad_csv.write_text("scenario,algo,trial\nx,y,0\n")
        proc_bad = subprocess.run(
            ["node", str(cli), "--csv", str(bad_csv), "--group-by", "rho",
             "--out", str(tmp_path / "bad.svg")],
            capture_output=True, text=True)
        ok &= proc_bad.returncode != 0
        report(15, ok, f"{len(bars)} bars rendered with exact means; "
                       f"schema mismatch exits {proc_bad.returncode}")
