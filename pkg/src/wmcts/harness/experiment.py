"""Seeded evaluation episodes and batched experiments with a fixed CSV schema.

One integer seed fans out (via ``SeedSequence.spawn``) into independent
streams for the real environment, the planner and the belief filter, so a
cell's result depends only on ``(env, config, budget, seed)`` -- never on the
worker that ran it. Rows are emitted in (budget, seed) order.
"""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..envs import GenerativeModel, make_env
from ..planner import Belief, PlannerConfig, SearchTree, Selection, plan, step_root, transition_key, update_belief

CSV_COLUMNS = ("env", "algorithm", "p", "exploration_c", "budget", "seed", "discounted_return", "wallclock_ms",
               "status")

# Best order p per (environment family, algorithm) from the published hyper-parameter table.
BEST_P = {
    "frozenlake": {"wmcts-os": 100.0, "wmcts-ts": 100.0, "power-uct": 100.0},
    "nchain": {"wmcts-os": 4.0, "wmcts-ts": 100.0, "power-uct": 8.0},
    "riverswim": {"wmcts-os": 100.0, "wmcts-ts": 15.0, "power-uct": 15.0},
    "sixarms": {"wmcts-os": 100.0, "wmcts-ts": 100.0, "power-uct": 8.0},
    "taxi": {"wmcts-os": 15.0, "wmcts-ts": 15.0, "power-uct": 15.0},
    "rocksample-11-11": {"wmcts-os": 150.0, "wmcts-ts": 100.0},
    "rocksample-15-15": {"wmcts-os": 100.0, "wmcts-ts": 100.0},
    "rocksample-15-35": {"wmcts-os": 150.0, "wmcts-ts": 10.0},
    "pocman": {"wmcts-os": 1.0, "wmcts-ts": 100.0},
}


def _env_key(env_name: str) -> str:
    key = env_name.lower().replace("_", "-")
    return "rocksample-11-11" if key == "rocksample" else key


def best_p(env_name: str, algorithm: str | Selection) -> float:
    """Default power-mean order for ``algorithm`` on ``env_name`` (1 when the table has no entry)."""
    algo = Selection(algorithm).value
    if algo == Selection.UCT.value:
        return 1.0
    return BEST_P.get(_env_key(env_name), {}).get(algo, 1.0)


def env_planner_defaults(env: GenerativeModel) -> dict:
    """Per-environment planner settings: preferred-action rollouts where the model offers them."""
    out = {}
    if env.has_preferred:
        out["knowledge"] = (0, 1)
    if env.pomdp and env.name == "pocman":
        out["max_depth"] = 90
    return out


@dataclass(frozen=True)
class ResultRow:
    """One evaluation episode; ``discounted_return`` is in raw environment units."""

    env: str
    algorithm: str
    p: float
    exploration_c: float
    budget: int
    seed: int
    discounted_return: float
    wallclock_ms: float | None = None
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def cells(self) -> list[str]:
        ret = repr(float(self.discounted_return)) if self.ok else ""
        wall = "" if self.wallclock_ms is None else repr(float(self.wallclock_ms))
        return [self.env, self.algorithm, repr(float(self.p)), repr(float(self.exploration_c)), str(self.budget),
                str(self.seed), ret, wall, self.status]


@dataclass(frozen=True)
class ExperimentConfig:
    """A batch of episodes: every budget crossed with every seed.

    ``horizon`` overrides the environment's episode length. Leave
    ``record_wallclock`` off when result files must be byte-reproducible.
    """

    env: str
    planner: PlannerConfig
    budgets: tuple[int, ...]
    seeds: tuple[int, ...]
    horizon: int | None = None
    output: Path | None = None
    jobs: int = 1
    record_wallclock: bool = False
    label: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "budgets", tuple(int(b) for b in self.budgets))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if not self.budgets or any(b <= a for a, b in zip(self.budgets, self.budgets[1:])):
            raise ValueError(f"budgets must be non-empty and strictly increasing, got {self.budgets}")
        if any(b < 0 for b in self.budgets):
            raise ValueError("budgets must be non-negative")
        if len(set(self.seeds)) != len(self.seeds) or not self.seeds:
            raise ValueError("seeds must be non-empty and distinct")
        if self.horizon is not None and self.horizon < 0:
            raise ValueError("horizon override must be non-negative")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")

    @property
    def algorithm(self) -> str:
        return self.planner.selection.value

    def cells(self) -> list[tuple]:
        return [(self.env, self.planner, b, s, self.horizon, self.record_wallclock)
                for b in self.budgets for s in self.seeds]


def episode_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator, np.random.Generator]:
    """Independent (environment, planner, belief) generators derived from one seed."""
    env_ss, plan_ss, belief_ss = np.random.SeedSequence(seed).spawn(3)
    return np.random.default_rng(env_ss), np.random.default_rng(plan_ss), np.random.default_rng(belief_ss)


def run_episode(env: GenerativeModel, config: PlannerConfig, budget: int, seed: int,
                horizon: int | None = None) -> float:
    """Play one episode, planning with ``budget`` simulations per real step; returns the discounted raw return."""
    env_rng, plan_rng, belief_rng = episode_streams(seed)
    config = config.with_(num_simulations=int(budget))
    steps = env.horizon if horizon is None else int(horizon)
    state = env.initial(env_rng)
    belief = Belief.from_prior(env, config.belief_particles, belief_rng) if env.pomdp and steps > 0 else None
    tree = SearchTree(init_std=config.init_std)
    total, discount = 0.0, 1.0
    for t in range(steps):
        action = plan(tree, belief if env.pomdp else state, env, config, plan_rng, horizon=steps - t)
        state, obs, reward, terminal = env.step(state, action, env_rng)
        total += discount * reward
        discount *= config.gamma
        if terminal:
            break
        tree = step_root(tree, action, transition_key(obs, terminal), config.init_std)
        if env.pomdp:
            belief = update_belief(belief, action, obs, env, belief_rng, config.belief_particles)
    return total


@lru_cache(maxsize=None)
def _cached_env(name: str) -> GenerativeModel:
    return make_env(name)


def _run_cell(cell) -> ResultRow:
    env_name, config, budget, seed, horizon, record_wallclock = cell
    start = time.perf_counter()
    try:
        ret = run_episode(_cached_env(env_name), config, budget, seed, horizon)
        if not math.isfinite(ret):
            raise FloatingPointError(f"non-finite return {ret}")
        status = "ok"
    except Exception as exc:  # recorded in the row; the batch carries on
        ret, status = math.nan, f"error: {type(exc).__name__}: {exc}"
    wall = (time.perf_counter() - start) * 1e3 if record_wallclock else None
    return ResultRow(env_name, config.selection.value, config.p, config.exploration_c, budget, seed, ret, wall, status)


def run_experiment(config: ExperimentConfig, append: bool = False) -> list[ResultRow]:
    """Run every (budget, seed) cell, in parallel when ``config.jobs > 1``; rows come back in cell order.

    When ``config.output`` is set the rows are written there (or appended
    with ``append=True``) in one atomic replace.
    """
    cells = config.cells()
    if config.jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=min(config.jobs, len(cells))) as pool:
            rows = list(pool.map(_run_cell, cells))
    else:
        rows = [_run_cell(c) for c in cells]
    if config.output is not None:
        write_results(config.output, rows, append=append)
    return rows


def format_results(rows: Iterable[ResultRow], header: bool = True) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if header:
        writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(row.cells())
    return buf.getvalue()


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_results(path, rows: Sequence[ResultRow], append: bool = False) -> Path:
    """Write a result CSV (UTF-8, LF, shortest round-trip floats); appending keeps the existing rows."""
    path = Path(path)
    existing = ""
    if append and path.exists() and path.stat().st_size:
        existing = path.read_text(encoding="utf-8")
        first = existing.split("\n", 1)[0]
        if first != ",".join(CSV_COLUMNS):
            raise ValueError(f"{path} does not carry the result header")
        if not existing.endswith("\n"):
            existing += "\n"
    _atomic_write(path, existing + format_results(rows, header=not existing))
    return path


def read_results(path) -> list[ResultRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"{path}: expected columns {','.join(CSV_COLUMNS)}")
        out = []
        for rec in reader:
            ok = rec["status"] == "ok"
            out.append(ResultRow(
                rec["env"], rec["algorithm"], float(rec["p"]), float(rec["exploration_c"]), int(rec["budget"]),
                int(rec["seed"]), float(rec["discounted_return"]) if ok else math.nan,
                float(rec["wallclock_ms"]) if rec["wallclock_ms"] else None, rec["status"]))
    return out
