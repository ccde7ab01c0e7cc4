"""Benchmark environments behind one sampled-transition interface."""

from .catalog import (
    env_names,
    make_bernoulli_bandit,
    make_chain,
    make_env,
    make_frozenlake,
    make_nchain,
    make_pocman,
    make_riverswim,
    make_rocksample,
    make_sixarms,
    make_taxi,
)
from .model import GenerativeModel
from .tables import declared_law, optimal_return, value_iteration

__all__ = [
    "GenerativeModel",
    "declared_law",
    "env_names",
    "make_bernoulli_bandit",
    "make_chain",
    "make_env",
    "make_frozenlake",
    "make_nchain",
    "make_pocman",
    "make_riverswim",
    "make_rocksample",
    "make_sixarms",
    "make_taxi",
    "optimal_return",
    "value_iteration",
]
