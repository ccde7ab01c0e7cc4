"""The sampled-transition model shared by every environment."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import dispatch as dp


@dataclass(eq=False)
class GenerativeModel:
    """An environment reachable only through sampled transitions.

    ``ip``/``fp`` are the integer/float parameter vectors consumed by the
    compiled kernels; states are int64 vectors of length ``state_size``.
    Fully observed models have ``pomdp=False`` and emit their canonical
    state key as the observation, so both planner paths accept them.
    """

    name: str
    kind: int
    num_actions: int
    pomdp: bool
    state_size: int
    ip: np.ndarray
    fp: np.ndarray
    reward_bounds: tuple[float, float]
    horizon: int
    start: np.ndarray | None = None
    has_preferred: bool = False
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.ip = np.ascontiguousarray(self.ip, dtype=np.int64)
        self.fp = np.ascontiguousarray(self.fp, dtype=np.float64)
        lo, hi = self.reward_bounds
        if not lo < hi:
            raise ValueError(f"empty reward range {self.reward_bounds}")

    def initial(self, rng: np.random.Generator) -> np.ndarray:
        """A start state (a prior sample for partially observed models)."""
        if self.start is not None:
            return self.start.copy()
        s = np.zeros(self.state_size, dtype=np.int64)
        dp.env_initial(self.kind, self.ip, self.fp, s, rng)
        return s

    def step(self, state, action: int, rng: np.random.Generator):
        """Sample ``(next_state, observation, reward, terminal)``; ``state`` is not modified."""
        if not 0 <= action < self.num_actions:
            raise ValueError(f"{self.name}: action {action} outside [0, {self.num_actions})")
        s = np.array(state, dtype=np.int64, copy=True)
        r, t, obs = dp.env_step(self.kind, self.ip, self.fp, s, int(action), rng, True)
        return s, int(obs), float(r), bool(t)

    def preferred_actions(self, state) -> np.ndarray:
        buf = np.empty(self.num_actions, dtype=np.int64)
        n = dp.env_legal(self.kind, self.ip, np.asarray(state, dtype=np.int64), buf, self.num_actions)
        return buf[:n].copy()

    def key(self, state) -> int:
        """Canonical encoding of a fully observed state (its observation)."""
        if self.pomdp:
            raise TypeError(f"{self.name} is partially observed; states have no public key")
        s = np.asarray(state, dtype=np.int64)
        return int(s[0] * 8 + s[1]) if self.kind == dp.TAXI else int(s[0])

    def consistent(self, state, action: int, observation: int) -> bool:
        return bool(dp.env_consistent(self.kind, self.ip, self.fp, np.asarray(state, dtype=np.int64),
                                      int(action), int(observation)))

    def __repr__(self):
        return f"GenerativeModel({self.name!r}, actions={self.num_actions}, pomdp={self.pomdp})"
