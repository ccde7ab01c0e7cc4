"""Declared transition laws and an exact value-iteration oracle.

Each environment's law is restated here in plain Python, independently of
the compiled kernels, as ``{(next_state, reward, terminal, observation): probability}``.
The conformance tests compare kernel samples against these tables, and the
value-iteration oracle uses them to compute reference ceilings.
"""

from __future__ import annotations

import math
from collections import defaultdict

import numpy as np

from . import catalog as cat
from . import dispatch as dp
from . import gridworlds as gw
from .model import GenerativeModel

Outcome = tuple  # (next_state tuple, reward, terminal, observation)


def _grid_target(nrow, ncol, cells, pos, direction):
    r, c = divmod(pos, ncol)
    r += gw.DR[direction]
    c += gw.DC[direction]
    if not (0 <= r < nrow and 0 <= c < ncol) or cells[r * ncol + c] == gw.WALL:
        return pos
    return r * ncol + c


def declared_law(model: GenerativeModel, state, action: int) -> dict[Outcome, float]:
    """Exact outcome distribution of one step from ``state`` under ``action``."""
    s = tuple(int(v) for v in state)
    law: dict[Outcome, float] = defaultdict(float)
    kind = model.kind
    if kind == dp.FROZENLAKE:
        nrow, ncol, cells = int(model.ip[0]), int(model.ip[1]), model.ip[2:]
        for k in range(3):
            move = (action + k - 1) % 4
            nxt = _grid_target(nrow, ncol, cells, s[0], gw.FROZEN_TO_DIR[move])
            goal = cells[nxt] == gw.GOAL
            law[((nxt,), 1.0 if goal else 0.0, goal or cells[nxt] == gw.HOLE, nxt)] += 1 / 3
    elif kind == dp.NCHAIN:
        n = int(model.ip[0])
        for a, prob in ((action, 1 - cat.NCHAIN_SLIP), (1 - action, cat.NCHAIN_SLIP)):
            if a == 0:
                out = ((s[0],), cat.NCHAIN_END_REWARD, False, s[0]) if s[0] == n - 1 else ((s[0] + 1,), 0.0, False, s[0] + 1)
            else:
                out = ((0,), cat.NCHAIN_BACK_REWARD, False, 0)
            law[out] += prob
    elif kind == dp.RIVERSWIM:
        n, pos = int(model.ip[0]), s[0]
        if action == 0:
            law[((max(pos - 1, 0),), cat.RIVERSWIM_LEFT_REWARD if pos == 0 else 0.0, False, max(pos - 1, 0))] = 1.0
        elif pos == n - 1:
            law[((pos,), cat.RIVERSWIM_END_REWARD, False, pos)] += cat.RIVERSWIM_EDGE_STAY
            law[((pos - 1,), 0.0, False, pos - 1)] += 1 - cat.RIVERSWIM_EDGE_STAY
        elif pos == 0:
            law[((1,), 0.0, False, 1)] += cat.RIVERSWIM_RIGHT[0]
            law[((0,), 0.0, False, 0)] += 1 - cat.RIVERSWIM_RIGHT[0]
        else:
            for nxt, prob in zip((pos + 1, pos, pos - 1), cat.RIVERSWIM_RIGHT):
                law[((nxt,), 0.0, False, nxt)] += prob
    elif kind == dp.SIXARMS:
        pos = s[0]
        if pos == 0:
            p = cat.SIXARMS_PROBS[action]
            law[((action + 1,), 0.0, False, action + 1)] += p
            if p < 1:
                law[((0,), 0.0, False, 0)] += 1 - p
        elif action == pos - 1:
            law[((pos,), cat.SIXARMS_REWARDS[action], False, pos)] = 1.0
        else:
            law[((0,), 0.0, False, 0)] = 1.0
    elif kind == dp.TAXI:
        nrow, ncol, cells = int(model.ip[0]), int(model.ip[1]), model.ip[2:]
        slip = cat.TAXI_SLIP
        for a, prob in ((action, 1 - slip), ((action + 1) % 4, slip / 2), ((action + 3) % 4, slip / 2)):
            nxt = _grid_target(nrow, ncol, cells, s[0], a)
            mask = s[1]
            code = cells[nxt]
            if code >= gw.PASSENGER:
                mask |= 1 << (code - gw.PASSENGER)
            if code == gw.GOAL:
                out = ((nxt, mask), float(bin(mask).count("1")), True, nxt * 8 + mask)
            else:
                out = ((nxt, mask), 0.0, False, nxt * 8 + mask)
            law[out] += prob
    elif kind == dp.ROCKSAMPLE:
        law.update(_rocksample_law(model, s, action))
    elif kind == dp.BANDIT:
        p = model.params["probs"][action]
        law[((0,), 1.0, False, 0)] += p
        law[((0,), 0.0, False, 0)] += 1 - p
    elif kind == dp.CHAIN:
        law[((s[0] + 1,), float(model.fp[0]), False, s[0] + 1)] = 1.0
    else:
        raise NotImplementedError(f"{model.name} has no declared table")
    return {k: v for k, v in law.items() if v > 0}


def rocksample_sensor_accuracy(distance: float, half_efficiency: float = cat.ROCKSAMPLE_HALF_EFFICIENCY) -> float:
    return 0.5 * (1.0 + 2.0 ** (-distance / half_efficiency))


def _rocksample_law(model, s, action):
    n, k = model.params["n"], model.params["k"]
    rocks = model.params["rocks"]
    x, y, good, sampled = s
    if action == 0:
        return {((x, min(y + 1, n - 1), good, sampled), 0.0, False, 0): 1.0}
    if action == 1:
        if x + 1 >= n:
            return {((x, y, good, sampled), 10.0, True, 0): 1.0}
        return {((x + 1, y, good, sampled), 0.0, False, 0): 1.0}
    if action == 2:
        return {((x, max(y - 1, 0), good, sampled), 0.0, False, 0): 1.0}
    if action == 3:
        return {((max(x - 1, 0), y, good, sampled), 0.0, False, 0): 1.0}
    if action == 4:
        if (x, y) not in rocks:
            return {((x, y, good, sampled), -10.0, False, 0): 1.0}
        i = rocks.index((x, y))
        bit = 1 << i
        reward = 10.0 if (good & bit) and not (sampled & bit) else -10.0
        return {((x, y, good & ~bit, sampled | bit), reward, False, 0): 1.0}
    i = action - 5
    rx, ry = rocks[i]
    eta = rocksample_sensor_accuracy(math.hypot(x - rx, y - ry))
    truth, other = (1, 2) if (good >> i) & 1 else (2, 1)
    law = {((x, y, good, sampled), 0.0, False, truth): eta}
    if eta < 1:
        law[((x, y, good, sampled), 0.0, False, other)] = 1 - eta
    return law


def enumerate_states(model: GenerativeModel) -> list[tuple]:
    """Every state of a finite fully observed benchmark MDP."""
    if model.kind in (dp.FROZENLAKE,):
        return [(c,) for c in range(int(model.ip[0] * model.ip[1]))]
    if model.kind in (dp.NCHAIN, dp.RIVERSWIM):
        return [(c,) for c in range(int(model.ip[0]))]
    if model.kind == dp.SIXARMS:
        return [(c,) for c in range(7)]
    if model.kind == dp.TAXI:
        cells = model.ip[2:]
        return [(c, m) for c in range(len(cells)) if cells[c] != gw.WALL for m in range(8)]
    if model.kind == dp.BANDIT:
        return [(0,)]
    raise NotImplementedError(f"{model.name} is not a finite fully observed MDP")


def value_iteration(model: GenerativeModel, gamma: float, horizon: int) -> dict[tuple, float]:
    """Optimal expected discounted return over ``horizon`` steps, per start state (raw units)."""
    states = enumerate_states(model)
    laws = {(s, a): declared_law(model, s, a) for s in states for a in range(model.num_actions)}
    value = {s: 0.0 for s in states}
    for _ in range(horizon):
        nxt = {}
        for s in states:
            best = -math.inf
            for a in range(model.num_actions):
                q = sum(p * (r + (0.0 if t else gamma * value[ns])) for (ns, r, t, _), p in laws[(s, a)].items())
                best = max(best, q)
            nxt[s] = best
        value = nxt
    return value


def optimal_return(model: GenerativeModel, gamma: float = 0.95, horizon: int | None = None) -> float:
    """Reference ceiling: optimal discounted return from the start state."""
    v = value_iteration(model, gamma, model.horizon if horizon is None else horizon)
    return v[tuple(int(x) for x in np.asarray(model.start))]
