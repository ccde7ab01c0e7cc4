"""``wmcts`` command line: run, sweep, bandit, oracle, plot.

Exit status: 0 on success, 1 on a usage error, 2 when the work itself fails
(including failed episodes or failed checks).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import itertools
import os
import sys
from pathlib import Path

import numpy as np

from .. import bandit
from ..planner import Selection
from .configfile import ConfigError, build_experiment, load_experiments, parse_float_list, parse_int_list
from .experiment import CSV_COLUMNS, format_results, read_results, run_experiment, write_results
from .oracle import GRID_STEP, oracle_suite
from .plotting import PlotSpec, emit_plot
from .stats import SUMMARY_COLUMNS, aggregate, write_summary

ALGOS = [s.value for s in Selection]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _jobs(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("WMCTS_JOBS", "").strip()
    if not env:
        return 1
    try:
        return max(1, int(env))
    except ValueError:
        raise UsageError(f"WMCTS_JOBS must be an integer, got {env!r}") from None


def _add_planner_flags(sp, many: bool = False):
    sp.add_argument("--env", help="environment, e.g. nchain, taxi, rocksample-11-11, pocman")
    sp.add_argument("--algo", help=("comma-separated subset of " if many else "one of ") + ", ".join(ALGOS))
    sp.add_argument("--p", help="power-mean order" + (" list" if many else "") +
                    " (default: best-p table entry for env and algorithm)")
    sp.add_argument("--c", help="exploration constant" + (" list" if many else "") + " (default sqrt 2)")
    sp.add_argument("--budget", help="simulations per step; comma-separated list allowed")
    sp.add_argument("--seeds", help="count N (seeds 0..N-1), range a-b, or comma list")
    sp.add_argument("--gamma", type=float, help="discount factor (default 0.95)")
    sp.add_argument("--init-std", type=float, help="initial posterior std on the normalised scale (default 30)")
    sp.add_argument("--max-depth", type=int, help="search depth cap (default 100; 90 for pocman)")
    sp.add_argument("--horizon", type=int, help="episode length override")
    sp.add_argument("--out", help="result CSV path (default: stdout)")
    sp.add_argument("--summary", help="also write the aggregated summary CSV here")
    sp.add_argument("--jobs", type=int, help="worker processes (falls back to $WMCTS_JOBS, then 1)")
    sp.add_argument("--wallclock", action="store_true", help="record per-episode wallclock_ms (breaks byte-identity)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wmcts", description="Wasserstein MCTS experiments")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    run = sub.add_parser("run", help="run one experiment (or each section of a config file)")
    run.add_argument("--config", help="experiment file; flags override its values")
    _add_planner_flags(run)

    sweep = sub.add_parser("sweep", help="grid over algorithms, p, C and budgets")
    sweep.add_argument("--config", help="experiment file supplying defaults")
    _add_planner_flags(sweep, many=True)

    bd = sub.add_parser("bandit", help="Thompson-sampling bandit checks (log regret, bias, tail)")
    bd.add_argument("--arms", default="0.9,0.5", help="arm means (default 0.9,0.5)")
    bd.add_argument("--variance", type=float, default=1.0, help="reward variance of every arm")
    bd.add_argument("--horizons", default="1000,3000,10000,30000,100000")
    bd.add_argument("--reps", type=int, default=200)
    bd.add_argument("--p", type=float, default=2.0, help="order of the root power-mean estimate")
    bd.add_argument("--epsilon", type=float, default=0.1)
    bd.add_argument("--seed", type=int, default=0)
    bd.add_argument("--out", help="per-rep CSV (rep,horizon,arm,pulls,estimate_p,abs_bias)")
    bd.add_argument("--jobs", type=int)

    oc = sub.add_parser("oracle", help="closed-form barycenter vs brute-force grid oracle")
    oc.add_argument("--instances", type=int, default=20)
    oc.add_argument("--alphas", default="0,-0.5,-1")
    oc.add_argument("--step", type=float, default=GRID_STEP)
    oc.add_argument("--seed", type=int, default=0)

    pl = sub.add_parser("plot", help="SVG chart per environment from a result or summary CSV")
    pl.add_argument("input")
    pl.add_argument("--out", default="plots", help="output directory (default ./plots)")
    return parser


def _overrides(args) -> dict:
    return {
        "env": args.env, "algo": args.algo, "p": args.p, "c": args.c, "budgets": args.budget, "seeds": args.seeds,
        "gamma": None if args.gamma is None else repr(args.gamma),
        "init_std": None if args.init_std is None else repr(args.init_std),
        "max_depth": None if args.max_depth is None else str(args.max_depth),
        "horizon": None if args.horizon is None else str(args.horizon),
        "wallclock": "yes" if args.wallclock else None,
    }


def _emit(rows, out, summary) -> int:
    if out is None:
        sys.stdout.write(format_results(rows))
    if summary:
        write_summary(summary, aggregate(rows))
    failed = [r for r in rows if not r.ok]
    for r in failed:
        print(f"episode failed: env={r.env} algo={r.algorithm} budget={r.budget} seed={r.seed}: {r.status}",
              file=sys.stderr)
    return 2 if failed else 0


def _experiments(args, overrides):
    if args.config:
        return load_experiments(args.config, overrides)
    return [build_experiment(overrides)]


def cmd_run(args) -> int:
    jobs = _jobs(args.jobs)
    experiments = _experiments(args, _overrides(args))
    rows = []
    for exp in experiments:
        exp_rows = run_experiment(dataclasses.replace(exp, jobs=jobs, output=None))
        if not args.out and exp.output is not None:
            write_results(exp.output, exp_rows)
        rows.extend(exp_rows)
    if args.out:
        write_results(args.out, rows)
    to_files = args.out or all(e.output is not None for e in experiments)
    return _emit(rows, to_files or None, args.summary)


def cmd_sweep(args) -> int:
    jobs = _jobs(args.jobs)
    base = _overrides(args)
    algos = (args.algo or "").split(",") if args.algo else [None]
    ps = [repr(p) for p in parse_float_list(args.p)] if args.p else [None]
    cs = [repr(c) for c in parse_float_list(args.c)] if args.c else [None]
    rows = []
    for algo, p, c in itertools.product(algos, ps, cs):
        over = dict(base, algo=algo.strip() if algo else None, p=p, c=c)
        for exp in _experiments(args, over):
            rows.extend(run_experiment(dataclasses.replace(exp, jobs=jobs, output=None)))
    if args.out:
        write_results(args.out, rows)
    return _emit(rows, args.out, args.summary)


def cmd_bandit(args) -> int:
    arms = [bandit.ArmSpec(mu, variance_scale=args.variance) for mu in parse_float_list(args.arms)]
    horizons = parse_int_list(args.horizons)
    res = bandit.run_reps(arms, horizons, args.reps, args.p, args.seed, jobs=_jobs(args.jobs))
    regret = bandit.check_log_regret(arms, horizons, args.reps, args.p, args.seed, results=res)
    tail = bandit.check_concentration(arms, horizons, args.reps, args.p, args.epsilon, args.seed, results=res)
    bias = bandit.check_bias(arms, horizons, args.reps, args.p, args.seed, results=res)
    print(f"log-regret fit: slope={regret.slope:.4g} intercept={regret.intercept:.4g} r2={regret.r_squared:.4f}")
    suboptimal = np.sum([v for v in regret.mean_pulls.values()], axis=0) if regret.mean_pulls else np.zeros(len(horizons))
    for n, pulls, tp, b in zip(regret.horizons, suboptimal, tail.tail, bias.bias):
        print(f"n={n}: mean suboptimal pulls={pulls:.2f} tail(eps={args.epsilon})={tp:.4f} |bias|={b:.5f}")
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("rep", "horizon", "arm", "pulls", "estimate_p", "abs_bias"))
            for rep, n, arm, pulls, est, err in bandit.report_rows(arms, res, args.p):
                w.writerow((rep, n, arm, pulls, repr(est), repr(err)))
    return 0


def cmd_oracle(args) -> int:
    cases = oracle_suite(args.instances, parse_float_list(args.alphas), args.seed, args.step)
    status = 0
    for alpha in sorted({c.alpha for c in cases}, reverse=True):
        group = [c for c in cases if c.alpha == alpha]
        worst = max(c.grid_steps_off for c in group)
        ok = all(c.ok for c in group)
        status = status or (0 if ok else 2)
        print(f"alpha={alpha:g}: {sum(c.ok for c in group)}/{len(group)} within one grid step "
              f"(worst {worst:.2f} steps) {'PASS' if ok else 'FAIL'}")
    return status


def cmd_plot(args) -> int:
    src = Path(args.input)
    with open(src, encoding="utf-8") as fh:
        header = tuple(fh.readline().strip().split(","))
    if header == CSV_COLUMNS:
        summary_path = Path(args.out) / f"{src.stem}.summary.csv"
        write_summary(summary_path, aggregate(read_results(src)))
    elif set(header) <= set(SUMMARY_COLUMNS) and header:
        summary_path = src
    else:
        raise UsageError(f"{src}: unknown column(s) {', '.join(c for c in header if c not in SUMMARY_COLUMNS)}")
    for path in emit_plot(summary_path, PlotSpec(Path(args.out))):
        print(path)
    return 0


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "bandit": cmd_bandit, "oracle": cmd_oracle, "plot": cmd_plot}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (UsageError, ConfigError) as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"wmcts: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
