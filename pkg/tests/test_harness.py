import csv
import math
import statistics
from pathlib import Path

import matplotlib
import numpy as np
import pytest

from wmcts.envs import make_chain, make_nchain
from wmcts.harness import (
    CSV_COLUMNS,
    SUMMARY_COLUMNS,
    ExperimentConfig,
    PlotSpec,
    ResultRow,
    aggregate,
    best_p,
    emit_plot,
    load_experiments,
    read_results,
    read_summary,
    run_episode,
    run_experiment,
    write_results,
    write_summary,
)
from wmcts.harness.cli import main
from wmcts.harness.configfile import ConfigError, parse_seeds
from wmcts.planner import PlannerConfig

FIXTURES = Path(__file__).parent / "fixtures"
SMALL = PlannerConfig(selection="wmcts-ts", p=100, max_depth=15)


def tiny(**kw):
    base = dict(env="nchain", planner=SMALL, budgets=(16, 32), seeds=(0, 1, 2), horizon=8)
    base.update(kw)
    return ExperimentConfig(**base)


class TestRunEpisode:
    def test_zero_horizon(self):
        assert run_episode(make_nchain(), SMALL, 64, seed=0, horizon=0) == 0.0

    def test_single_action_env_is_a_rollout(self):
        # every policy on a one-action chain is the rollout policy
        ret = run_episode(make_chain(1.0, 100), SMALL, 8, seed=3, horizon=12)
        assert ret == pytest.approx(sum(0.95**t for t in range(12)))

    def test_deterministic(self):
        a = run_episode(make_nchain(), SMALL, 64, seed=4, horizon=10)
        b = run_episode(make_nchain(), SMALL, 64, seed=4, horizon=10)
        assert a == b

    def test_seeds_differ(self):
        rets = {run_episode(make_nchain(), SMALL, 32, seed=s, horizon=20) for s in range(6)}
        assert len(rets) > 1


class TestExperimentConfig:
    @pytest.mark.parametrize("kw", [dict(budgets=(32, 16)), dict(budgets=(16, 16)), dict(seeds=(1, 1)),
                                    dict(seeds=()), dict(jobs=0), dict(horizon=-1)])
    def test_validation(self, kw):
        with pytest.raises(ValueError):
            tiny(**kw)


class TestRunExperiment:
    def test_one_cell(self):
        assert len(run_experiment(tiny(budgets=(16,), seeds=(5,)))) == 1

    def test_row_order_is_budget_then_seed(self):
        rows = run_experiment(tiny(budgets=(4, 8, 16, 32), seeds=tuple(range(50)), horizon=2))
        assert len(rows) == 200
        assert [(r.budget, r.seed) for r in rows] == [(b, s) for b in (4, 8, 16, 32) for s in range(50)]

    def test_byte_identical_across_workers(self, tmp_path):
        a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
        run_experiment(tiny(output=a))
        run_experiment(tiny(output=b, jobs=2))
        run_experiment(tiny(output=c, jobs=3))
        assert a.read_bytes() == b.read_bytes() == c.read_bytes()

    def test_failures_become_rows(self):
        rows = run_experiment(tiny(env="no-such-env", budgets=(1,), seeds=(0, 1)))
        assert [r.ok for r in rows] == [False, False]
        assert all(r.status.startswith("error: ValueError") for r in rows)

    def test_append(self, tmp_path):
        out = tmp_path / "r.csv"
        run_experiment(tiny(output=out, budgets=(16,), seeds=(0,)))
        run_experiment(tiny(output=out, budgets=(16,), seeds=(1,)), append=True)
        assert [r.seed for r in read_results(out)] == [0, 1]
        assert out.read_text().count("env,algorithm") == 1


class TestResultCsv:
    def test_schema(self, tmp_path):
        out = write_results(tmp_path / "r.csv", run_experiment(tiny(budgets=(16,), seeds=(0,))))
        raw = out.read_bytes()
        assert raw.split(b"\n", 1)[0] == b"env,algorithm,p,exploration_c,budget,seed,discounted_return,wallclock_ms,status"
        assert CSV_COLUMNS == tuple(raw.split(b"\n", 1)[0].decode().split(","))
        assert b"\r" not in raw and raw.endswith(b"\n")

    def test_round_trip_is_exact(self, tmp_path):
        rows = [ResultRow("nchain", "uct", 1.0, math.sqrt(2), 64, 3, 0.1 + 0.2),
                ResultRow("nchain", "uct", 1.0, math.sqrt(2), 64, 4, 1 / 3, wallclock_ms=12.5),
                ResultRow("nchain", "uct", 1.0, math.sqrt(2), 64, 5, math.nan, status="error: boom")]
        back = read_results(write_results(tmp_path / "r.csv", rows))
        assert back[:2] == rows[:2]
        assert back[2].status == "error: boom" and not back[2].ok

    def test_append_rejects_foreign_file(self, tmp_path):
        path = tmp_path / "x.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError):
            write_results(path, [], append=True)


class TestAggregate:
    def rows(self, values, budget=64, algo="uct"):
        return [ResultRow("nchain", algo, 1.0, 1.4, budget, i, v) for i, v in enumerate(values)]

    def test_two_point_example(self):
        (s,) = aggregate(self.rows([0.0, 1.0]))
        assert (s.mean, s.stderr, s.n_runs) == (0.5, pytest.approx(0.5), 2)

    def test_identical_returns(self):
        (s,) = aggregate(self.rows([2.5] * 7))
        assert s.stderr == 0.0

    def test_singleton_has_no_stderr(self):
        (s,) = aggregate(self.rows([4.0]))
        assert s.stderr is None and s.n_runs == 1

    def test_failed_rows_are_skipped(self):
        rows = self.rows([1.0, 3.0]) + [ResultRow("nchain", "uct", 1.0, 1.4, 64, 9, math.nan, status="error: x")]
        (s,) = aggregate(rows)
        assert s.n_runs == 2 and s.mean == 2.0

    def test_matches_independent_statistics(self):
        rng = np.random.default_rng(0)
        rows = []
        for algo in ("uct", "wmcts-ts"):
            for budget in (64, 256):
                rows += self.rows(list(rng.normal(10, 3, size=25)), budget, algo)
        assert len(rows) == 100
        summary = aggregate(rows)
        assert [(s.algorithm, s.budget) for s in summary] == [("uct", 64), ("uct", 256), ("wmcts-ts", 64),
                                                            ("wmcts-ts", 256)]
        for s in summary:
            xs = [r.discounted_return for r in rows if (r.algorithm, r.budget) == (s.algorithm, s.budget)]
            assert abs(s.mean - statistics.fmean(xs)) <= 1e-12
            assert abs(s.stderr - statistics.stdev(xs) / math.sqrt(len(xs))) <= 1e-12

    def test_summary_round_trip(self, tmp_path):
        summary = aggregate(self.rows([0.1, 0.7, 0.3]) + self.rows([5.0], budget=128))
        assert read_summary(write_summary(tmp_path / "s.csv", summary)) == summary

    def test_summary_schema(self, tmp_path):
        path = write_summary(tmp_path / "s.csv", [])
        assert path.read_text() == ",".join(SUMMARY_COLUMNS) + "\n"

    def test_unknown_summary_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("env,algorithm,budget,mean,stderr,n_runs,colour\n")
        with pytest.raises(ValueError, match="unknown column"):
            read_summary(path)


class TestPlot:
    def test_golden_file(self, tmp_path):
        if matplotlib.__version__ != "3.10.9":
            pytest.skip("golden SVG was rendered with matplotlib 3.10.9")
        paths = emit_plot(FIXTURES / "summary_small.csv", PlotSpec(tmp_path))
        assert [p.name for p in paths] == ["nchain.svg", "sixarms.svg"]
        assert paths[0].read_bytes() == (FIXTURES / "golden_nchain.svg").read_bytes()

    def test_byte_stable(self, tmp_path):
        a = emit_plot(FIXTURES / "summary_small.csv", PlotSpec(tmp_path / "a"))
        b = emit_plot(FIXTURES / "summary_small.csv", PlotSpec(tmp_path / "b"))
        assert [p.read_bytes() for p in a] == [p.read_bytes() for p in b]

    def test_single_series_has_band(self, tmp_path):
        src = tmp_path / "s.csv"
        src.write_text("env,algorithm,budget,mean,stderr,n_runs\nx,uct,8,1.0,0.1,5\nx,uct,16,2.0,0.2,5\n")
        (svg,) = emit_plot(src, PlotSpec(tmp_path / "out"))
        text = svg.read_text()
        assert svg.stat().st_size > 0 and "fill-opacity: 0.25" in text

    def test_empty_summary(self, tmp_path):
        src = tmp_path / "s.csv"
        src.write_text(",".join(SUMMARY_COLUMNS) + "\n")
        (svg,) = emit_plot(src, PlotSpec(tmp_path / "out"))
        assert svg.name == "empty.svg" and svg.stat().st_size > 0


class TestConfigFile:
    def test_seed_forms(self):
        assert parse_seeds("3") == [0, 1, 2]
        assert parse_seeds("10-12") == [10, 11, 12]
        assert parse_seeds("4,7,1-2") == [4, 7, 1, 2]

    def test_sections_and_defaults(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text("[DEFAULT]\nbudgets = 16, 32\nseeds = 0-2\nhorizon = 5\n\n"
                        "[ts]\nenv = nchain\nalgo = wmcts-ts\n\n[uct]\nenv = nchain\nalgo = uct ; baseline\n")
        ts, uct = load_experiments(path)
        assert (ts.label, ts.planner.p, ts.budgets, ts.seeds, ts.horizon) == ("ts", 100.0, (16, 32), (0, 1, 2), 5)
        assert uct.planner.selection.value == "uct" and uct.planner.p == 1.0

    def test_overrides_win(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text("[a]\nenv = nchain\nalgo = wmcts-ts\nbudgets = 16\np = 4\n")
        (exp,) = load_experiments(path, {"p": "8", "seeds": "2", "c": None})
        assert exp.planner.p == 8.0 and exp.seeds == (0, 1)

    @pytest.mark.parametrize("body", ["[a]\nenv = nchain\nalgo = uct\n", "[a]\nenv = nchain\nalgo = uct\nbudgets = 8\ncolour = red\n",
                                      "[a]\nenv = nchain\nalgo = bogus\nbudgets = 8\n", ""])
    def test_errors(self, tmp_path, body):
        path = tmp_path / "exp.ini"
        path.write_text(body)
        with pytest.raises(ConfigError):
            load_experiments(path)

    def test_pomdp_defaults(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text("[a]\nenv = pocman\nalgo = wmcts-ts\nbudgets = 16\n")
        (exp,) = load_experiments(path)
        assert exp.planner.knowledge == (0, 1) and exp.planner.max_depth == 90 and exp.planner.p == 100.0


@pytest.mark.parametrize("name", ["budget_sweep.ini", "pocman.ini"])
def test_shipped_configs_parse(name):
    exps = load_experiments(Path(__file__).parent.parent / "configs" / name)
    assert exps and all(len(e.seeds) in (50, 100) and e.output is not None for e in exps)


class TestBestP:
    @pytest.mark.parametrize("env,algo,p", [("nchain", "wmcts-ts", 100), ("frozenlake", "wmcts-os", 100),
                                            ("riverswim", "wmcts-ts", 15), ("taxi", "power-uct", 15),
                                            ("pocman", "wmcts-ts", 100), ("pocman", "wmcts-os", 1),
                                            ("nchain", "uct", 1), ("chain", "wmcts-ts", 1)])
    def test_table(self, env, algo, p):
        assert best_p(env, algo) == p


class TestCli:
    def test_run_rows(self, tmp_path):
        out = tmp_path / "r.csv"
        code = main(["run", "--env", "nchain", "--algo", "wmcts-ts", "--p", "100", "--budget", "1024", "--seeds", "5",
                     "--horizon", "3", "--max-depth", "10", "--out", str(out)])
        assert code == 0
        rows = read_results(out)
        assert len(rows) == 5 and all(r.ok and r.p == 100.0 for r in rows)

    def test_default_p_from_table(self, capsys):
        code = main(["run", "--env", "nchain", "--algo", "wmcts-ts", "--budget", "8", "--seeds", "1", "--horizon", "2"])
        assert code == 0
        (row,) = list(csv.DictReader(capsys.readouterr().out.splitlines()))
        assert float(row["p"]) == 100.0

    def test_plot_after_run(self, tmp_path, capsys):
        out = tmp_path / "r.csv"
        assert main(["run", "--env", "nchain", "--algo", "uct", "--budget", "8,16", "--seeds", "3", "--horizon", "3",
                     "--out", str(out)]) == 0
        assert main(["plot", str(out), "--out", str(tmp_path / "plots")]) == 0
        svg = tmp_path / "plots" / "nchain.svg"
        assert svg.exists() and svg.stat().st_size > 0

    def test_sweep(self, tmp_path):
        out = tmp_path / "s.csv"
        summary = tmp_path / "sum.csv"
        code = main(["sweep", "--env", "nchain", "--algo", "uct,wmcts-ts", "--p", "1,4", "--budget", "8",
                     "--seeds", "2", "--horizon", "2", "--out", str(out), "--summary", str(summary)])
        assert code == 0
        rows = read_results(out)
        assert len(rows) == 8 and {(r.algorithm, r.p) for r in rows} == {("uct", 1.0), ("uct", 4.0),
                                                                        ("wmcts-ts", 1.0), ("wmcts-ts", 4.0)}
        assert read_summary(summary)

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "exp.ini"
        out = tmp_path / "r.csv"
        cfg.write_text(f"[a]\nenv = nchain\nalgo = uct\nbudgets = 8\nseeds = 2\nhorizon = 2\nout = {out}\n")
        assert main(["run", "--config", str(cfg)]) == 0
        assert len(read_results(out)) == 2

    def test_jobs_from_environment(self, tmp_path, monkeypatch):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["run", "--env", "nchain", "--algo", "wmcts-ts", "--budget", "16", "--seeds", "4", "--horizon", "4"]
        assert main(args + ["--out", str(a)]) == 0
        monkeypatch.setenv("WMCTS_JOBS", "2")
        assert main(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    @pytest.mark.parametrize("argv", [["run", "--bogus"], ["frobnicate"], [],
                                      ["run", "--env", "nchain", "--budget", "8"],
                                      ["run", "--env", "nchain", "--algo", "wat", "--budget", "8"]])
    def test_usage_errors(self, argv, capsys):
        assert main(argv) == 1

    def test_bad_jobs_variable(self, monkeypatch):
        monkeypatch.setenv("WMCTS_JOBS", "many")
        assert main(["run", "--env", "nchain", "--algo", "uct", "--budget", "8", "--seeds", "1"]) == 1

    def test_runtime_failure(self, tmp_path):
        assert main(["plot", str(tmp_path / "missing.csv")]) == 2

    def test_oracle(self, capsys):
        assert main(["oracle", "--instances", "3", "--alphas", "-1"]) == 0
        assert "PASS" in capsys.readouterr().out

    def test_bandit(self, tmp_path, capsys):
        out = tmp_path / "b.csv"
        assert main(["bandit", "--horizons", "100,300", "--reps", "5", "--out", str(out)]) == 0
        assert "log-regret fit" in capsys.readouterr().out
        assert len(out.read_text().splitlines()) == 1 + 5 * 2 * 2

    def test_help(self, capsys):
        assert main(["--help"]) == 0
