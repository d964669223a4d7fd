"""Command-line entry point: bench, single traced runs, bound reports."""

from __future__ import annotations

import argparse
import sys

from . import bench, complexity, core, environments
from .errors import CovbaiError


def _split(values: list[str] | None) -> list[str]:
    out: list[str] = []
    for chunk in values or []:
        out.extend(p for p in chunk.split(",") if p)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="covbai",
        description="Covariance-adaptive best-arm identification benchmarks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_bench = sub.add_parser("bench", help="seeded Monte-Carlo benchmark, CSV output")
    p_bench.add_argument("--scenarios", action="append", required=True,
                         help="comma-separated preset names or instance JSON paths")
    p_bench.add_argument("--algos", action="append", required=True,
                         help=f"comma-separated subset of {', '.join(bench.ALGOS)}")
    p_bench.add_argument("--delta", type=float, default=0.1)
    p_bench.add_argument("--trials", type=int, default=100)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--max-rounds", type=int, default=10_000_000)
    p_bench.add_argument("--oversample-mult", type=float, default=None,
                         help="override the elimination algorithms' removal window")
    p_bench.add_argument("--raw-delta", action="store_true",
                         help="pass delta through unsplit, as the pseudocode reads")
    p_bench.add_argument("--jobs", type=int, default=1)
    p_bench.add_argument("--out", default=None, help="CSV output path")

    p_run = sub.add_parser("run", help="single traced run")
    p_run.add_argument("--scenario", required=True)
    p_run.add_argument("--algo", default="pairwise")
    p_run.add_argument("--delta", type=float, default=0.1)
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--trial", type=int, default=0)
    p_run.add_argument("--max-rounds", type=int, default=10_000_000)
    p_run.add_argument("--oversample-mult", type=float, default=None)
    p_run.add_argument("--raw-delta", action="store_true")

    p_bounds = sub.add_parser("bounds", help="complexity report for an instance")
    p_bounds.add_argument("--scenario", required=True,
                          help="preset name or instance JSON path")
    p_bounds.add_argument("--delta", type=float, default=0.1)
    p_bounds.add_argument("--csv", default=None,
                          help="also write the pairwise cost tables as CSV")

    sub.add_parser("scenarios", help="list the built-in scenario presets")
    return parser


def cmd_bench(args) -> int:
    config = bench.BenchConfig(
        scenarios=_split(args.scenarios),
        algos=_split(args.algos),
        delta=args.delta,
        trials=args.trials,
        seed=args.seed,
        max_rounds=args.max_rounds,
        oversample_mult=args.oversample_mult,
        raw_delta=args.raw_delta,
        jobs=args.jobs,
    )
    rows = bench.run_bench(config)
    if args.out:
        bench.write_csv(rows, args.out)
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        sys.stdout.write(bench.rows_to_csv(rows))
    print(bench.render_summary(bench.summarize(rows)))
    return 0


def cmd_run(args) -> int:
    row = bench.run_trial(
        args.scenario, args.algo, args.delta, args.seed, args.trial,
        max_rounds=args.max_rounds, oversample_mult=args.oversample_mult,
        raw_delta=args.raw_delta, record_events=True)
    result: core.RunResult = row["_result"]
    mult = (bench.ELIMINATION_ALGOS.get(args.algo, 0.0)
            if args.oversample_mult is None else args.oversample_mult)
    print(f"trace: scenario={args.scenario} algo={args.algo} delta={args.delta:g} "
          f"seed={args.seed} trial={args.trial}")
    timeline = []
    for ev in result.eliminations:
        if ev.weights is not None:
            support = ", ".join(f"{w:.3f}*arm{j + 1}"
                                for j, w in enumerate(ev.weights) if w > 1e-9)
            how = f"combination test ({support})"
        elif ev.comparators:
            arms = ", ".join(str(j + 1) for j in ev.comparators)
            kind = "vertex" if args.algo == "convex" else "pairwise"
            how = f"{kind} test vs arm(s) {arms}"
        else:
            how = "test"
        removal = int(mult * ev.round)
        tail = (f"; scheduled to leave queries at round {removal}"
                if removal > ev.round else "; leaves query set now")
        timeline.append((ev.round, 0, f"eliminate arm {ev.arm + 1} by {how} "
                                      f"(margin {ev.margin:.5g}){tail}"))
        if ev.round < removal <= result.rounds:
            timeline.append((removal, 1, f"arm {ev.arm + 1} leaves the query set"))
    for rnd, _, text in sorted(timeline):
        print(f"  round {rnd}: {text}")
    print(f"result: arm {row['chosen']} (true best {row['true_best']}) "
          f"correct={bool(row['correct'])} queries={row['total_queries']} "
          f"rounds={row['rounds']} flag={row['flag']}")
    return 0


def cmd_bounds(args) -> int:
    instance = environments.scenario(args.scenario)
    report = complexity.build_report(instance, args.delta)
    print(complexity.render_report(report))
    if args.csv:
        import csv as _csv

        with open(args.csv, "w", newline="") as fh:
            writer = _csv.writer(fh, lineterminator="\n")
            writer.writerow(["table", "i", "j", "value"])
            for name, table in (("envelope", report.tables.envelope),
                                ("headline", report.tables.headline),
                                ("gaussian", report.tables.gaussian)):
                for i in range(table.shape[0]):
                    for j in range(table.shape[1]):
                        writer.writerow([name, i + 1, j + 1, table[i, j]])
        print(f"wrote tables to {args.csv}")
    return 0


def cmd_scenarios(_args) -> int:
    for name in environments.STANDARD_SCENARIOS:
        inst = environments.scenario(name)
        print(f"{name:18s} K={inst.n_arms:2d} kind={inst.kind} "
              f"best=arm {core.best_arm(inst) + 1}")
    print("custom instances: pass a JSON file path "
          "{kind, means, covariance | bernoulli_params, label}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "bench":
            return cmd_bench(args)
        if args.command == "run":
            return cmd_run(args)
        if args.command == "bounds":
            return cmd_bounds(args)
        if args.command == "scenarios":
            return cmd_scenarios(args)
    except CovbaiError as exc:
        parser.exit(2, f"covbai: error: {exc}\n")
    except OSError as exc:
        parser.exit(2, f"covbai: error: {exc}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
