"""Planner configuration."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np


class Selection(str, Enum):
    UCT = "uct"
    POWER_UCT = "power-uct"
    WMCTS_OS = "wmcts-os"
    WMCTS_TS = "wmcts-ts"

    @property
    def code(self) -> int:
        return _SELECTION_CODES[self]


_SELECTION_CODES = {Selection.UCT: 0, Selection.POWER_UCT: 1, Selection.WMCTS_OS: 2, Selection.WMCTS_TS: 3}


class Recommendation(str, Enum):
    MAX_MEAN = "max_mean"
    MAX_VISITS = "max_visits"

    @property
    def code(self) -> int:
        return 0 if self is Recommendation.MAX_MEAN else 1


@dataclass(frozen=True)
class PlannerConfig:
    """Search hyper-parameters.

    ``reward_bounds`` of ``None`` means "use the environment's declared
    bounds"; rewards are mapped affinely to [0, 1] with them before any
    backup. ``init_std`` is on that normalised scale. ``knowledge`` is
    ``(tree_level, rollout_level)``: level 0 considers every action, level 1
    only the environment's preferred/legal actions.
    """

    p: float = 1.0
    exploration_c: float = math.sqrt(2.0)
    gamma: float = 0.95
    init_std: float = 30.0
    num_simulations: int = 1000
    max_depth: int = 100
    selection: Selection = Selection.WMCTS_TS
    root_recommendation: Recommendation = Recommendation.MAX_MEAN
    reward_bounds: tuple[float, float] | None = None
    knowledge: tuple[int, int] = (0, 0)
    belief_particles: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "selection", Selection(self.selection))
        object.__setattr__(self, "root_recommendation", Recommendation(self.root_recommendation))
        if not self.p >= 1:
            raise ValueError(f"backups need p >= 1, got {self.p}")
        if self.exploration_c < 0:
            raise ValueError("exploration constant must be non-negative")
        if not 0 <= self.gamma < 1:
            raise ValueError(f"gamma must lie in [0, 1), got {self.gamma}")
        if not self.init_std > 0:
            raise ValueError("init_std must be positive")
        if self.num_simulations < 0 or self.max_depth < 0 or self.belief_particles < 1:
            raise ValueError("simulation, depth and particle counts must be non-negative")
        if self.reward_bounds is not None and not self.reward_bounds[0] < self.reward_bounds[1]:
            raise ValueError(f"reward bounds {self.reward_bounds} are empty")
        if any(level not in (0, 1) for level in self.knowledge):
            raise ValueError("knowledge levels are 0 (all actions) or 1 (preferred actions)")

    def with_(self, **changes) -> "PlannerConfig":
        return replace(self, **changes)

    def bounds_for(self, env) -> tuple[float, float]:
        return self.reward_bounds if self.reward_bounds is not None else env.reward_bounds

    def pack(self, env) -> tuple[np.ndarray, np.ndarray]:
        """Float and int parameter vectors for the compiled kernels (see ``kernel.CF_*``/``CI_*``)."""
        lo, hi = self.bounds_for(env)
        cf = np.array([self.p, self.exploration_c, self.gamma, self.init_std, lo, hi - lo])
        ci = np.array([self.selection.code, self.max_depth, self.knowledge[0], self.knowledge[1],
                       self.root_recommendation.code, env.kind, env.num_actions, int(env.pomdp)], dtype=np.int64)
        return cf, ci
