"""Flat key-value experiment files (INI syntax, one section per experiment).

Example::

    [DEFAULT]
    seeds = 0-49
    budgets = 1024, 4096, 32768

    [nchain-ts]
    env = nchain
    algo = wmcts-ts
    ; p defaults to the best-p table entry for (env, algo)

    [nchain-uct]
    env = nchain
    algo = uct

Keys: ``env``, ``algo``, ``p``, ``c``, ``budgets``, ``seeds``, ``gamma``,
``init_std``, ``max_depth``, ``horizon``, ``knowledge`` (tree, rollout),
``particles``, ``recommendation`` (max_mean or max_visits), ``out``,
``jobs``, ``wallclock`` (yes/no). ``seeds`` accepts a count (``5`` means
0..4), inclusive ranges (``10-19``) and comma lists of either.
"""

from __future__ import annotations

import configparser
import math
from pathlib import Path
from typing import Mapping

from ..envs import make_env
from ..planner import PlannerConfig
from .experiment import ExperimentConfig, best_p, env_planner_defaults

KEYS = {"env", "algo", "p", "c", "budgets", "seeds", "gamma", "init_std", "max_depth", "horizon", "knowledge",
        "particles", "recommendation", "out", "jobs", "wallclock"}
DEFAULT_JOBS = 1


class ConfigError(ValueError):
    """A malformed experiment description."""


def parse_int_list(text: str) -> list[int]:
    return [int(tok) for tok in str(text).replace(";", ",").split(",") if tok.strip()]


def parse_float_list(text: str) -> list[float]:
    return [float(tok) for tok in str(text).replace(";", ",").split(",") if tok.strip()]


def parse_seeds(text: str) -> list[int]:
    """``"5"`` -> 0..4; ``"10-12"`` -> 10, 11, 12; ``"3,7"`` -> 3, 7."""
    tokens = [t.strip() for t in str(text).split(",") if t.strip()]
    if len(tokens) == 1 and "-" not in tokens[0]:
        count = int(tokens[0])
        if count < 1:
            raise ConfigError("seed count must be positive")
        return list(range(count))
    seeds = []
    for tok in tokens:
        if "-" in tok.lstrip("-"):
            lo, hi = tok.split("-", 1)
            seeds.extend(range(int(lo), int(hi) + 1))
        else:
            seeds.append(int(tok))
    return seeds


def build_experiment(settings: Mapping[str, str | None], label: str = "") -> ExperimentConfig:
    """Turn string settings (file values already merged with flag overrides) into an experiment."""
    s = {k: v for k, v in settings.items() if v is not None and str(v).strip() != ""}
    unknown = set(s) - KEYS
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(sorted(unknown))}")
    for required in ("env", "algo", "budgets"):
        if required not in s:
            raise ConfigError(f"missing required key {required!r}")
    try:
        env = make_env(s["env"])
        planner_kw = env_planner_defaults(env)
        planner_kw.update(selection=s["algo"], p=float(s["p"]) if "p" in s else best_p(s["env"], s["algo"]))
        if "c" in s:
            planner_kw["exploration_c"] = float(s["c"])
        if "gamma" in s:
            planner_kw["gamma"] = float(s["gamma"])
        if "init_std" in s:
            planner_kw["init_std"] = float(s["init_std"])
        if "max_depth" in s:
            planner_kw["max_depth"] = int(s["max_depth"])
        if "knowledge" in s:
            levels = parse_int_list(s["knowledge"])
            if len(levels) != 2:
                raise ConfigError("knowledge takes two levels: tree, rollout")
            planner_kw["knowledge"] = tuple(levels)
        if "particles" in s:
            planner_kw["belief_particles"] = int(s["particles"])
        if "recommendation" in s:
            planner_kw["root_recommendation"] = s["recommendation"]
        planner = PlannerConfig(**planner_kw)
        if not math.isfinite(planner.p):
            raise ConfigError("p must be finite")
        return ExperimentConfig(
            env=s["env"],
            planner=planner,
            budgets=tuple(parse_int_list(s["budgets"])),
            seeds=tuple(parse_seeds(s.get("seeds", "1"))),
            horizon=int(s["horizon"]) if "horizon" in s else None,
            output=Path(s["out"]) if "out" in s else None,
            jobs=int(s.get("jobs", DEFAULT_JOBS)),
            record_wallclock=str(s.get("wallclock", "no")).lower() in ("1", "yes", "true", "on"),
            label=label,
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def read_sections(path) -> list[tuple[str, dict[str, str]]]:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    with open(path, encoding="utf-8") as fh:
        parser.read_file(fh)
    sections = [(name, dict(parser[name])) for name in parser.sections()]
    if not sections:
        defaults = dict(parser.defaults())
        if defaults:
            sections = [("DEFAULT", defaults)]
    if not sections:
        raise ConfigError(f"{path} defines no experiment")
    return sections


def load_experiments(path, overrides: Mapping[str, str | None] | None = None) -> list[ExperimentConfig]:
    """Every section of ``path`` as an experiment, with non-empty ``overrides`` taking precedence."""
    out = []
    for name, settings in read_sections(Path(path)):
        merged = dict(settings)
        merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
        out.append(build_experiment(merged, label=name))
    return out
