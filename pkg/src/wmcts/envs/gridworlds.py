"""Step kernels for the fully observed benchmark MDPs and two toy MDPs.

Every kernel has the signature ``step(ip, fp, s, a, rng) -> (reward, terminal)``
and mutates the int64 state vector ``s`` in place. ``ip``/``fp`` hold the
integer/float parameters of one environment instance. Observations of
fully observed models are the canonical state key (see ``mdp_key``).

Uniform draws always go through ``rng.random()`` so that an independent
re-implementation can reproduce a stream exactly.
"""

from __future__ import annotations

from numba import njit

# Direction offsets (row, col) in N, E, S, W order.
DR = (-1, 0, 1, 0)
DC = (0, 1, 0, -1)

# cell codes shared by the grid layouts
FREE, WALL, HOLE, GOAL, START = 0, 1, 2, 3, 4
PASSENGER = 8  # passenger i is coded PASSENGER + i

# FrozenLake actions follow the Gym numbering: Left, Down, Right, Up.
FROZEN_TO_DIR = (3, 2, 1, 0)


@njit(cache=True, inline="always")
def grid_target(ip, pos, direction):
    """Cell reached by moving one step from ``pos``; walls and the border block."""
    nrow, ncol = ip[0], ip[1]
    r = pos // ncol + DR[direction]
    c = pos % ncol + DC[direction]
    if r < 0 or r >= nrow or c < 0 or c >= ncol:
        return pos
    nxt = r * ncol + c
    if ip[2 + nxt] == WALL:
        return pos
    return nxt


# ---------------------------------------------------------------- FrozenLake
@njit(cache=True, inline="always")
def frozenlake_step(ip, fp, s, a, rng):
    k = int(rng.random() * 3.0)  # 0: (a-1)%4, 1: a, 2: (a+1)%4, each 1/3
    move = (a + k - 1) % 4
    s[0] = grid_target(ip, s[0], FROZEN_TO_DIR[move])
    cell = ip[2 + s[0]]
    if cell == GOAL:
        return 1.0, True
    return 0.0, cell == HOLE


# -------------------------------------------------------------------- NChain
@njit(cache=True, inline="always")
def nchain_step(ip, fp, s, a, rng):
    # fp = [slip, end reward, backward reward]
    if rng.random() < fp[0]:
        a = 1 - a
    if a == 0:
        if s[0] == ip[0] - 1:
            return fp[1], False
        s[0] += 1
        return 0.0, False
    s[0] = 0
    return fp[2], False


# ----------------------------------------------------------------- RiverSwim
@njit(cache=True, inline="always")
def riverswim_step(ip, fp, s, a, rng):
    # fp = [p_advance, p_stay, p_edge_stay, left reward at 0, reward at the far end]
    n = ip[0]
    pos = s[0]
    if a == 0:
        reward = fp[3] if pos == 0 else 0.0
        if pos > 0:
            s[0] = pos - 1
        return reward, False
    u = rng.random()
    if pos == n - 1:
        if u < fp[2]:
            return fp[4], False
        s[0] = pos - 1
        return 0.0, False
    if pos == 0:
        if u < fp[0]:
            s[0] = 1
        return 0.0, False
    if u < fp[0]:
        s[0] = pos + 1
    elif u >= fp[0] + fp[1]:
        s[0] = pos - 1
    return 0.0, False


# ------------------------------------------------------------------ SixArms
@njit(cache=True, inline="always")
def sixarms_step(ip, fp, s, a, rng):
    # state 0 is the hub, state i + 1 the satellite of arm i; fp = [p_0..p_5, r_0..r_5]
    arms = ip[0]
    pos = s[0]
    if pos == 0:
        if rng.random() < fp[a]:
            s[0] = a + 1
        return 0.0, False
    if a == pos - 1:
        return fp[arms + a], False
    s[0] = 0
    return 0.0, False


# --------------------------------------------------------------------- Taxi
@njit(cache=True, inline="always")
def taxi_step(ip, fp, s, a, rng):
    # state = [cell, collected-passenger bitmask]; fp = [slip]
    u = rng.random()
    if u < fp[0]:
        a = (a + 1) % 4 if u < 0.5 * fp[0] else (a + 3) % 4
    s[0] = grid_target(ip, s[0], a)
    cell = ip[2 + s[0]]
    if cell >= PASSENGER:
        s[1] |= 1 << (cell - PASSENGER)
        return 0.0, False
    if cell == GOAL:
        return float(_popcount(s[1])), True
    return 0.0, False


@njit(cache=True, inline="always")
def _popcount(x):
    n = 0
    while x:
        n += x & 1
        x >>= 1
    return n


@njit(cache=True, inline="always")
def taxi_legal(ip, s, buf):
    count = 0
    for d in range(4):
        if grid_target(ip, s[0], d) != s[0]:
            buf[count] = d
            count += 1
    return count


# -------------------------------------------------------------- toy models
@njit(cache=True, inline="always")
def chain_step(ip, fp, s, a, rng):
    """Deterministic single-action chain paying ``fp[0]`` per step, never terminal."""
    s[0] += 1
    return fp[0], False


@njit(cache=True, inline="always")
def bernoulli_bandit_step(ip, fp, s, a, rng):
    """One state, arm ``a`` pays 1 with probability ``fp[a]``; the state never changes."""
    return (1.0 if rng.random() < fp[a] else 0.0), False


@njit(cache=True, inline="always")
def mdp_key(ip, s, taxi):
    if taxi:
        return s[0] * 8 + s[1]
    return s[0]
