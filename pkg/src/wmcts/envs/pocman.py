"""PocMan kernels.

State vector (int64)::

    [pocman cell, ghost cells (G), ghost headings (G), power steps, items...]

where ``items`` holds one 0/1 slot per item cell of the maze (food-pellet
cells and power pills). Headings are 0 N, 1 E, 2 S, 3 W or -1 (none yet).

``ip`` layout: a fixed header (see the ``H_*`` offsets) followed by the
cell codes and a cell -> item-slot map. ``fp = [food_prob, chase_prob, flee_slip]``.

Observation bits: 0-3 ghost in line of sight N/E/S/W, 4-7 passable
neighbour N/E/S/W, 8 food smelled nearby, 9 ghost heard nearby.
"""

from __future__ import annotations

from numba import njit

from .gridworlds import DC, DR

H_NROW, H_NCOL, H_NGHOSTS, H_NITEMS, H_PAC_START, H_POWER_STEPS = 0, 1, 2, 3, 4, 5
H_CHASE_RANGE, H_SMELL, H_HEAR, H_GHOST_START = 6, 7, 8, 9
MAX_GHOSTS = 8
HEADER = H_GHOST_START + MAX_GHOSTS

C_FREE, C_WALL, C_FOOD, C_PILL = 0, 1, 2, 3

STEP_REWARD = -1.0
FOOD_REWARD = 10.0
GHOST_REWARD = 25.0
DEATH_REWARD = -100.0


@njit(cache=True)
def _cells(ip):
    return ip[H_NROW] * ip[H_NCOL]


@njit(cache=True)
def cell_code(ip, cell):
    return ip[HEADER + cell]


@njit(cache=True)
def item_slot(ip, cell):
    return ip[HEADER + _cells(ip) + cell]


@njit(cache=True)
def neighbour(ip, cell, d):
    """Adjacent cell in direction ``d`` or -1 if it is a wall or off the maze."""
    ncol = ip[H_NCOL]
    r = cell // ncol + DR[d]
    c = cell % ncol + DC[d]
    if r < 0 or r >= ip[H_NROW] or c < 0 or c >= ncol:
        return -1
    nxt = r * ncol + c
    if cell_code(ip, nxt) == C_WALL:
        return -1
    return nxt


@njit(cache=True)
def manhattan(ip, a, b):
    ncol = ip[H_NCOL]
    return abs(a // ncol - b // ncol) + abs(a % ncol - b % ncol)


def state_size(ip) -> int:
    return 2 + 2 * int(ip[H_NGHOSTS]) + int(ip[H_NITEMS])


@njit(cache=True)
def _pick(mask, count, rng):
    """Uniformly chosen direction among the set bits of ``mask``."""
    k = 0 if count == 1 else int(rng.random() * count)
    for d in range(4):
        if (mask >> d) & 1:
            if k == 0:
                return d
            k -= 1
    return -1


@njit(cache=True)
def move_ghost(ip, fp, s, g, rng):
    ng = ip[H_NGHOSTS]
    pos = s[1 + g]
    heading = s[1 + ng + g]
    pac = s[0]
    power = s[1 + 2 * ng]
    # candidate moves: passable and not reversing (unless it is a dead end)
    mask = 0
    count = 0
    for d in range(4):
        if neighbour(ip, pos, d) >= 0 and (heading < 0 or d != (heading + 2) % 4):
            mask |= 1 << d
            count += 1
    if count == 0:
        if heading < 0:
            return
        mask = 1 << ((heading + 2) % 4)
        count = 1
    directed = False
    flee = False
    if manhattan(ip, pos, pac) <= ip[H_CHASE_RANGE]:
        if power > 0:
            directed = rng.random() >= fp[2]
            flee = True
        else:
            directed = rng.random() < fp[1]
    if directed and count > 1:
        best = 0
        nbest = 0
        target = 0
        for d in range(4):
            if (mask >> d) & 1:
                dist = manhattan(ip, neighbour(ip, pos, d), pac)
                score = dist if flee else -dist
                if nbest == 0 or score > target:
                    target = score
                    best = 1 << d
                    nbest = 1
                elif score == target:
                    best |= 1 << d
                    nbest += 1
        d = _pick(best, nbest, rng)
    else:
        d = _pick(mask, count, rng)
    s[1 + g] = neighbour(ip, pos, d)
    s[1 + ng + g] = d


@njit(cache=True)
def pocman_step(ip, fp, s, a, rng):
    """Returns ``(reward, terminal)``; the observation is read with :func:`observe`."""
    ng = ip[H_NGHOSTS]
    p_idx = 1 + 2 * ng
    reward = STEP_REWARD
    nxt = neighbour(ip, s[0], a)
    if nxt >= 0:
        s[0] = nxt
    if s[p_idx] > 0:
        s[p_idx] -= 1
    ate_ghost = False
    for g in range(ng):
        hit = s[1 + g] == s[0]
        if not hit:
            move_ghost(ip, fp, s, g, rng)
            hit = s[1 + g] == s[0]
        if hit:
            if s[p_idx] > 0:
                s[1 + g] = ip[H_GHOST_START + g]
                s[1 + ng + g] = -1
                ate_ghost = True
            else:
                return DEATH_REWARD, True
    if ate_ghost:
        reward += GHOST_REWARD
    slot = item_slot(ip, s[0])
    if slot >= 0 and s[p_idx + 1 + slot] == 1:
        s[p_idx + 1 + slot] = 0
        if cell_code(ip, s[0]) == C_PILL:
            s[p_idx] = ip[H_POWER_STEPS]
        else:
            reward += FOOD_REWARD
    return reward, False


@njit(cache=True)
def observe(ip, s):
    ng = ip[H_NGHOSTS]
    ncol = ip[H_NCOL]
    pac = s[0]
    obs = 0
    for d in range(4):
        cell = neighbour(ip, pac, d)
        if cell >= 0:
            obs |= 1 << (4 + d)
        while cell >= 0:
            seen = False
            for g in range(ng):
                if s[1 + g] == cell:
                    seen = True
            if seen:
                obs |= 1 << d
                break
            cell = neighbour(ip, cell, d)
    smell = ip[H_SMELL]
    r0 = pac // ncol
    c0 = pac % ncol
    items = 2 + 2 * ng
    for dr in range(-smell, smell + 1):
        for dc in range(-smell, smell + 1):
            r = r0 + dr
            c = c0 + dc
            if 0 <= r < ip[H_NROW] and 0 <= c < ncol:
                slot = item_slot(ip, r * ncol + c)
                if slot >= 0 and s[items + slot] == 1 and cell_code(ip, r * ncol + c) == C_FOOD:
                    obs |= 1 << 8
    for g in range(ng):
        if manhattan(ip, s[1 + g], pac) <= ip[H_HEAR]:
            obs |= 1 << 9
    return obs


@njit(cache=True)
def pocman_legal(ip, s, buf):
    count = 0
    for d in range(4):
        if neighbour(ip, s[0], d) >= 0:
            buf[count] = d
            count += 1
    return count


@njit(cache=True)
def pocman_initial(ip, fp, s, rng):
    ng = ip[H_NGHOSTS]
    s[0] = ip[H_PAC_START]
    for g in range(ng):
        s[1 + g] = ip[H_GHOST_START + g]
        s[1 + ng + g] = -1
    s[1 + 2 * ng] = 0
    base = 2 + 2 * ng
    ncells = _cells(ip)
    for cell in range(ncells):
        slot = item_slot(ip, cell)
        if slot >= 0:
            if cell_code(ip, cell) == C_PILL:
                s[base + slot] = 1
            else:
                s[base + slot] = 1 if rng.random() < fp[0] else 0


@njit(cache=True)
def pocman_perturb(ip, fp, s, rng):
    """Random-walk one ghost by 1-3 cells."""
    ng = ip[H_NGHOSTS]
    g = int(rng.random() * ng)
    steps = 1 + int(rng.random() * 3)
    for _ in range(steps):
        mask = 0
        count = 0
        for d in range(4):
            if neighbour(ip, s[1 + g], d) >= 0:
                mask |= 1 << d
                count += 1
        if count == 0:
            return
        d = _pick(mask, count, rng)
        s[1 + g] = neighbour(ip, s[1 + g], d)
        s[1 + ng + g] = d


@njit(cache=True)
def pocman_consistent(ip, fp, s, a, obs):
    ng = ip[H_NGHOSTS]
    for g in range(ng):
        if s[1 + g] == s[0]:
            return False
    return observe(ip, s) == obs


@njit(cache=True)
def pocman_reinit(ip, fp, s, rng):
    """Scatter the ghosts uniformly over open cells, keeping PocMan, power and items."""
    ng = ip[H_NGHOSTS]
    ncells = _cells(ip)
    for g in range(ng):
        while True:
            cell = int(rng.random() * ncells)
            if cell_code(ip, cell) != C_WALL and cell != s[0]:
                break
        s[1 + g] = cell
        s[1 + ng + g] = -1
