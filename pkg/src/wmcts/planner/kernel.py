"""Compiled search loop over an array-backed tree.

Tree layout (see :class:`TreeArrays`): V-nodes and Q-edges live in parallel
arrays. A node's edges occupy a contiguous block ``[edge0, edge0 + nedges)``;
an edge's children form a singly linked list (``head``/``tail`` on the edge,
``next`` on the node) in creation order. All values are on the normalised
scale where every one-step reward lies in [0, 1].

Counting convention: an edge's count equals the summed counts of its
children. A V-node counts every pass through it, including the rollout
pass that created it, so an expanded non-root node carries one more visit
than its edges; the power-mean weights use the edge counts, ``n / sum(n)``.
"""

from __future__ import annotations

import math
from collections import namedtuple

import numpy as np
from numba import njit

from ..envs.dispatch import env_consistent, env_legal, env_perturb, env_reinit, env_step

UCT, POWER_UCT, WMCTS_OS, WMCTS_TS = 0, 1, 2, 3
MAX_MEAN, MAX_VISITS = 0, 1

# node flags
OPEN, TERMINAL = 0, 1

# float parameter vector
CF_P, CF_C, CF_GAMMA, CF_INIT_STD, CF_RMIN, CF_RRANGE = range(6)
# int parameter vector
CI_SELECTION, CI_MAX_DEPTH, CI_TREE_LEVEL, CI_ROLLOUT_LEVEL, CI_RECOMMEND, CI_KIND, CI_ACTIONS, CI_POMDP = range(8)

TreeArrays = namedtuple(
    "TreeArrays",
    [
        "n_visits", "n_mean", "n_std", "n_key", "n_next", "n_edge0", "n_nedges", "n_flag",
        "e_visits", "e_rsum", "e_mean", "e_std", "e_action", "e_head", "e_tail",
        "counts",
    ],
)


def allocate(node_capacity: int, edge_capacity: int) -> TreeArrays:
    i8 = lambda n: np.zeros(n, dtype=np.int64)  # noqa: E731
    f8 = lambda n: np.zeros(n, dtype=np.float64)  # noqa: E731
    nc, ec = max(node_capacity, 1), max(edge_capacity, 1)
    return TreeArrays(i8(nc), f8(nc), f8(nc), i8(nc), i8(nc), i8(nc), i8(nc), i8(nc),
                      i8(ec), f8(ec), f8(ec), f8(ec), i8(ec), i8(ec), i8(ec), i8(2))


def grow(t: TreeArrays, node_capacity: int, edge_capacity: int) -> TreeArrays:
    """Copy of ``t`` with at least the requested capacities."""
    nc = max(node_capacity, t.n_visits.size)
    ec = max(edge_capacity, t.e_visits.size)
    out = allocate(nc, ec)
    for name in TreeArrays._fields:
        src, dst = getattr(t, name), getattr(out, name)
        dst[: src.size] = src
    return out


# ------------------------------------------------------------------ helpers
@njit(cache=True, inline="always")
def rand_index(n, rng):
    """Uniform index in [0, n); consumes a draw only when there is a choice."""
    if n <= 1:
        return 0
    return int(rng.random() * n)


@njit(cache=True, inline="always")
def argmax_random_tie(scores, n, rng):
    best = scores[0]
    ties = 1
    for i in range(1, n):
        if scores[i] > best:
            best = scores[i]
            ties = 1
        elif scores[i] == best:
            ties += 1
    k = rand_index(ties, rng)
    for i in range(n):
        if scores[i] == best:
            if k == 0:
                return i
            k -= 1
    return -1


@njit(cache=True, inline="always")
def power_mean_kernel(values, counts, n, p):
    """Power mean of ``values[:n]`` weighted by ``counts[:n] / sum(counts[:n])``; zero-count entries are skipped."""
    total = 0.0
    top = 0.0
    low = np.inf
    for i in range(n):
        if counts[i] > 0:
            total += counts[i]
            top = max(top, values[i])
            low = min(low, values[i])
    if total == 0.0:
        return 0.0
    if p == 1.0:
        acc = 0.0
        for i in range(n):
            if counts[i] > 0:
                acc += (counts[i] / total) * values[i]
        return acc
    if top == 0.0:
        return 0.0
    acc = 0.0
    for i in range(n):
        if counts[i] > 0:
            acc += (counts[i] / total) * (values[i] / top) ** p
    out = top * acc ** (1.0 / p)
    return min(max(out, low), top)


@njit(cache=True, inline="always")
def new_node(t, key, mean, std, flag):
    i = t.counts[0]
    t.counts[0] += 1
    t.n_visits[i] = 0
    t.n_mean[i] = mean
    t.n_std[i] = std
    t.n_key[i] = key
    t.n_next[i] = -1
    t.n_edge0[i] = -1
    t.n_nedges[i] = 0
    t.n_flag[i] = flag
    return i


@njit(cache=True, inline="always")
def expand(t, node, ci, ip, s, buf):
    """Create one edge per candidate action (every action, or the preferred ones at tree level 1)."""
    num_actions = ci[CI_ACTIONS]
    if ci[CI_TREE_LEVEL] == 1:
        count = env_legal(ci[CI_KIND], ip, s, buf, num_actions)
    else:
        count = num_actions
        for a in range(num_actions):
            buf[a] = a
    e0 = t.counts[1]
    t.counts[1] += count
    for j in range(count):
        e = e0 + j
        t.e_visits[e] = 0
        t.e_rsum[e] = 0.0
        t.e_mean[e] = 0.0
        t.e_std[e] = 0.0
        t.e_action[e] = buf[j]
        t.e_head[e] = -1
        t.e_tail[e] = -1
    t.n_edge0[node] = e0
    t.n_nedges[node] = count


@njit(cache=True, inline="always")
def find_child(t, e, key):
    c = t.e_head[e]
    while c >= 0:
        if t.n_key[c] == key:
            return c
        c = t.n_next[c]
    return -1


@njit(cache=True, inline="always")
def attach_child(t, e, c):
    if t.e_head[e] < 0:
        t.e_head[e] = c
    else:
        t.n_next[t.e_tail[e]] = c
    t.e_tail[e] = c


# ---------------------------------------------------------------- selection
@njit(cache=True, inline="always")
def selection_scores(t, node, selection, c, rng, scores):
    """Fill ``scores`` for every edge of an expanded node whose edges were all tried."""
    e0 = t.n_edge0[node]
    ne = t.n_nedges[node]
    log_n = math.log(t.n_visits[node]) if t.n_visits[node] > 0 else 0.0
    for j in range(ne):
        e = e0 + j
        if selection == WMCTS_TS:
            scores[j] = t.e_mean[e] + t.e_std[e] * rng.standard_normal()
        elif selection == WMCTS_OS:
            scores[j] = t.e_mean[e] + c * t.e_std[e] * math.sqrt(log_n)
        else:
            scores[j] = t.e_mean[e] + c * math.sqrt(log_n / t.e_visits[e])
    return ne


@njit(cache=True, inline="always")
def select_edge(t, node, selection, c, rng, scores, offset):
    """Untried edges first (in action order), then the rule's argmax with random tie-breaking."""
    e0 = t.n_edge0[node]
    ne = t.n_nedges[node]
    for j in range(ne):
        if t.e_visits[e0 + j] == 0:
            return e0 + j
    selection_scores(t, node, selection, c, rng, scores)
    if offset != 0.0:
        for j in range(ne):
            scores[j] += offset
    return e0 + argmax_random_tie(scores, ne, rng)


# ------------------------------------------------------------------ backups
@njit(cache=True, inline="always")
def backup_q(t, e, reward, gamma):
    """Add one visit with normalised ``reward`` and recompute the edge's mean and std from its children."""
    t.e_visits[e] += 1
    t.e_rsum[e] += reward
    acc_m = 0.0
    acc_s = 0.0
    ch = t.e_head[e]
    while ch >= 0:
        acc_m += t.n_visits[ch] * t.n_mean[ch]
        acc_s += t.n_visits[ch] * t.n_std[ch]
        ch = t.n_next[ch]
    n = t.e_visits[e]
    t.e_mean[e] = (t.e_rsum[e] + gamma * acc_m) / n
    t.e_std[e] = gamma * acc_s / n


@njit(cache=True, inline="always")
def backup_v(t, node, p):
    """Count the pass and set the node's mean/std to power means of its visited edges."""
    t.n_visits[node] += 1
    e0 = t.n_edge0[node]
    ne = t.n_nedges[node]
    if e0 < 0 or ne == 0:
        return
    counts = t.e_visits[e0:e0 + ne]
    visited = 0
    for j in range(ne):
        visited += counts[j]
    if visited == 0:
        return
    t.n_mean[node] = power_mean_kernel(t.e_mean[e0:e0 + ne], counts, ne, p)
    t.n_std[node] = power_mean_kernel(t.e_std[e0:e0 + ne], counts, ne, p)


# ----------------------------------------------------------------- rollouts
@njit(cache=True, inline="always")
def terminal_value(cf, steps_left):
    """Normalised value of the zero-raw-reward stream after termination, over ``steps_left`` steps.

    Normalisation maps a raw reward r to (r - rmin) / range, so stopping
    early still earns -rmin / range per remaining step; crediting it keeps
    normalised returns an affine function of raw returns.
    """
    z = -cf[CF_RMIN] / cf[CF_RRANGE]
    if z == 0.0 or steps_left <= 0:
        return 0.0
    g = cf[CF_GAMMA]
    if g == 0.0:
        return z
    return z * (1.0 - g ** steps_left) / (1.0 - g)


@njit(cache=True, inline="always")
def rollout_kernel(s, budget, cf, ci, ip, fp, rng, buf):
    """Play the rollout policy for at most ``budget`` steps; normalised discounted return."""
    kind = ci[CI_KIND]
    num_actions = ci[CI_ACTIONS]
    gamma = cf[CF_GAMMA]
    ret = 0.0
    disc = 1.0
    for step in range(budget):
        if ci[CI_ROLLOUT_LEVEL] == 1:
            count = env_legal(kind, ip, s, buf, num_actions)
            a = buf[rand_index(count, rng)]
        else:
            a = rand_index(num_actions, rng)
        r, term, _ = env_step(kind, ip, fp, s, a, rng, False)
        ret += disc * (r - cf[CF_RMIN]) / cf[CF_RRANGE]
        disc *= gamma
        if term:
            ret += disc * terminal_value(cf, budget - step - 1)
            break
    return ret


# --------------------------------------------------------------- simulation
@njit(cache=True)
def simulate_kernel(t, root, s, budget, cf, ci, ip, fp, rng, path_nodes, path_edges, path_rewards, buf, scores):
    """One selection/expansion/rollout/backup pass from ``root`` in state ``s`` (mutated)."""
    kind = ci[CI_KIND]
    gamma = cf[CF_GAMMA]
    init_std = cf[CF_INIT_STD]
    node = root
    depth = 0
    plen = 0
    leaf = 0.0
    while True:
        if t.n_flag[node] == TERMINAL:
            leaf = t.n_mean[node]
            t.n_visits[node] += 1
            break
        if depth >= budget:
            t.n_visits[node] += 1
            break
        if t.n_edge0[node] < 0:
            if node != root and t.n_visits[node] == 0:
                leaf = rollout_kernel(s, budget - depth, cf, ci, ip, fp, rng, buf)
                t.n_mean[node] = leaf
                t.n_std[node] = init_std
                t.n_visits[node] = 1
                break
            expand(t, node, ci, ip, s, buf)
        e = select_edge(t, node, ci[CI_SELECTION], cf[CF_C], rng, scores, 0.0)
        r, term, obs = env_step(kind, ip, fp, s, t.e_action[e], rng, ci[CI_POMDP] == 1)
        key = -1 - obs if term else obs
        child = find_child(t, e, key)
        if child < 0:
            if term:
                child = new_node(t, key, terminal_value(cf, budget - depth - 1), 0.0, TERMINAL)
            else:
                child = new_node(t, key, 0.0, init_std, OPEN)
            attach_child(t, e, child)
        path_nodes[plen] = node
        path_edges[plen] = e
        path_rewards[plen] = (r - cf[CF_RMIN]) / cf[CF_RRANGE]
        plen += 1
        node = child
        depth += 1
    ret = leaf
    for i in range(plen - 1, -1, -1):
        backup_q(t, path_edges[i], path_rewards[i], gamma)
        backup_v(t, path_nodes[i], cf[CF_P])
        ret = path_rewards[i] + gamma * ret
    return ret


@njit(cache=True)
def run_simulations(t, root, particles, n_sims, budget, cf, ci, ip, fp, rng):
    """Run up to ``n_sims`` passes; stops early (returning the count done) when capacity runs low."""
    num_actions = ci[CI_ACTIONS]
    cap_nodes = t.n_visits.size
    cap_edges = t.e_visits.size
    depth_cap = max(budget, 0) + 1
    path_nodes = np.empty(depth_cap, dtype=np.int64)
    path_edges = np.empty(depth_cap, dtype=np.int64)
    path_rewards = np.empty(depth_cap)
    buf = np.empty(num_actions, dtype=np.int64)
    scores = np.empty(num_actions)
    s = np.empty(particles.shape[1], dtype=np.int64)
    for i in range(n_sims):
        if t.counts[0] + 1 > cap_nodes or t.counts[1] + num_actions > cap_edges:
            return i
        s[:] = particles[rand_index(particles.shape[0], rng)]
        simulate_kernel(t, root, s, budget, cf, ci, ip, fp, rng, path_nodes, path_edges, path_rewards, buf, scores)
    return n_sims


@njit(cache=True)
def recommend_kernel(t, root, mode, rng):
    """Action of the visited root edge with the largest mean (or count); -1 if none was visited."""
    e0 = t.n_edge0[root]
    ne = t.n_nedges[root]
    if e0 < 0:
        return -1
    scores = np.empty(ne)
    idx = np.empty(ne, dtype=np.int64)
    m = 0
    for j in range(ne):
        e = e0 + j
        if t.e_visits[e] > 0:
            scores[m] = t.e_mean[e] if mode == MAX_MEAN else float(t.e_visits[e])
            idx[m] = e
            m += 1
    if m == 0:
        return -1
    return t.e_action[idx[argmax_random_tie(scores, m, rng)]]


# --------------------------------------------------------------- tree reuse
@njit(cache=True)
def compact_subtree(t, root, out):
    """Copy the subtree under ``root`` into ``out`` (breadth-first, root at index 0)."""
    queue = np.empty(t.counts[0], dtype=np.int64)
    qh = 0
    qt = 1
    queue[0] = root
    new_edges = 0
    out.n_next[0] = -1
    while qh < qt:
        old = queue[qh]
        new = qh
        qh += 1
        out.n_visits[new] = t.n_visits[old]
        out.n_mean[new] = t.n_mean[old]
        out.n_std[new] = t.n_std[old]
        out.n_key[new] = t.n_key[old]
        out.n_flag[new] = t.n_flag[old]
        ne = t.n_nedges[old]
        if t.n_edge0[old] < 0:
            out.n_edge0[new] = -1
            out.n_nedges[new] = 0
            continue
        e0 = new_edges
        new_edges += ne
        out.n_edge0[new] = e0
        out.n_nedges[new] = ne
        for j in range(ne):
            eo = t.n_edge0[old] + j
            en = e0 + j
            out.e_visits[en] = t.e_visits[eo]
            out.e_rsum[en] = t.e_rsum[eo]
            out.e_mean[en] = t.e_mean[eo]
            out.e_std[en] = t.e_std[eo]
            out.e_action[en] = t.e_action[eo]
            out.e_head[en] = -1
            out.e_tail[en] = -1
            ch = t.e_head[eo]
            while ch >= 0:
                nc = qt
                queue[qt] = ch
                qt += 1
                out.n_next[nc] = -1
                if out.e_head[en] < 0:
                    out.e_head[en] = nc
                else:
                    out.n_next[out.e_tail[en]] = nc
                out.e_tail[en] = nc
                ch = t.n_next[ch]
    out.counts[0] = qt
    out.counts[1] = new_edges


@njit(cache=True)
def subtree_size(t, root):
    """(nodes, edges) reachable from ``root``."""
    stack = np.empty(t.counts[0], dtype=np.int64)
    top = 1
    stack[0] = root
    nodes = 0
    edges = 0
    while top > 0:
        top -= 1
        node = stack[top]
        nodes += 1
        if t.n_edge0[node] < 0:
            continue
        edges += t.n_nedges[node]
        for j in range(t.n_nedges[node]):
            ch = t.e_head[t.n_edge0[node] + j]
            while ch >= 0:
                stack[top] = ch
                top += 1
                ch = t.n_next[ch]
    return nodes, edges


# ------------------------------------------------------------------- belief
@njit(cache=True)
def belief_update_kernel(kind, ip, fp, particles, action, obs, n_out, rng, out, reinvigorate_frac, tries_per_particle):
    """Rejection-sample the successor belief into ``out`` (``n_out`` rows); returns the survivor count."""
    n_in, width = particles.shape
    prop = particles.copy()
    keep = np.empty(n_in, dtype=np.int64)
    survivors = 0
    for i in range(n_in):
        _, term, o = env_step(kind, ip, fp, prop[i], action, rng, True)
        if not term and o == obs:
            keep[survivors] = i
            survivors += 1
    target = int(math.ceil(reinvigorate_frac * n_out))
    extra = np.empty((max(target, 1), width), dtype=np.int64)
    n_extra = 0
    if survivors < target:
        tries = tries_per_particle * n_out
        s = np.empty(width, dtype=np.int64)
        for _ in range(tries):
            if n_extra + survivors >= target:
                break
            if survivors > 0:
                s[:] = prop[keep[rand_index(survivors, rng)]]
                env_perturb(kind, ip, fp, s, rng)
            else:
                s[:] = prop[rand_index(n_in, rng)]
                env_reinit(kind, ip, fp, s, rng)
            if env_consistent(kind, ip, fp, s, action, obs):
                extra[n_extra] = s
                n_extra += 1
    pool = survivors + n_extra
    for j in range(n_out):
        if pool == 0:
            out[j] = prop[rand_index(n_in, rng)]
            continue
        k = rand_index(pool, rng)
        if k < survivors:
            out[j] = prop[keep[k]]
        else:
            out[j] = extra[k - survivors]
    return survivors
