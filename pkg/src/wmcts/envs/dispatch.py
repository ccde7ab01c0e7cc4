"""Kind-indexed dispatch over the environment kernels.

The planner kernels are compiled once and call into whichever model they
are handed through these functions, so every environment shares one
compiled search loop.
"""

from __future__ import annotations

from numba import njit

from . import gridworlds as gw
from . import pocman as pm
from . import rocksample as rs

FROZENLAKE, NCHAIN, RIVERSWIM, SIXARMS, TAXI, ROCKSAMPLE, POCMAN, CHAIN, BANDIT = range(9)


@njit(cache=True, inline="always")
def env_step(kind, ip, fp, s, a, rng, want_obs):
    """Advance ``s`` in place; returns ``(reward, terminal, observation)``.

    Fully observed models report their canonical state key as the
    observation. PocMan only computes its percept when ``want_obs`` is set
    (rollouts skip it).
    """
    if kind == FROZENLAKE:
        r, t = gw.frozenlake_step(ip, fp, s, a, rng)
        return r, t, s[0]
    if kind == NCHAIN:
        r, t = gw.nchain_step(ip, fp, s, a, rng)
        return r, t, s[0]
    if kind == RIVERSWIM:
        r, t = gw.riverswim_step(ip, fp, s, a, rng)
        return r, t, s[0]
    if kind == SIXARMS:
        r, t = gw.sixarms_step(ip, fp, s, a, rng)
        return r, t, s[0]
    if kind == TAXI:
        r, t = gw.taxi_step(ip, fp, s, a, rng)
        return r, t, s[0] * 8 + s[1]
    if kind == ROCKSAMPLE:
        return rs.rocksample_step(ip, fp, s, a, rng)
    if kind == POCMAN:
        r, t = pm.pocman_step(ip, fp, s, a, rng)
        obs = 0
        if want_obs and not t:
            obs = pm.observe(ip, s)
        return r, t, obs
    if kind == CHAIN:
        r, t = gw.chain_step(ip, fp, s, a, rng)
        return r, t, s[0]
    r, t = gw.bernoulli_bandit_step(ip, fp, s, a, rng)
    return r, t, s[0]


@njit(cache=True, inline="always")
def env_legal(kind, ip, s, buf, num_actions):
    """Fill ``buf`` with the model's preferred actions in ``s``; returns how many."""
    if kind == TAXI:
        return gw.taxi_legal(ip, s, buf)
    if kind == ROCKSAMPLE:
        return rs.rocksample_legal(ip, s, buf)
    if kind == POCMAN:
        return pm.pocman_legal(ip, s, buf)
    for a in range(num_actions):
        buf[a] = a
    return num_actions


@njit(cache=True, inline="always")
def env_initial(kind, ip, fp, s, rng):
    """Sample a prior state for the partially observed models (fully observed ones are left as given)."""
    if kind == ROCKSAMPLE:
        rs.rocksample_initial(ip, fp, s, rng)
    elif kind == POCMAN:
        pm.pocman_initial(ip, fp, s, rng)


@njit(cache=True, inline="always")
def env_perturb(kind, ip, fp, s, rng):
    """Local transformation used to reinvigorate a depleted belief."""
    if kind == ROCKSAMPLE:
        rs.rocksample_perturb(ip, fp, s, rng)
    elif kind == POCMAN:
        pm.pocman_perturb(ip, fp, s, rng)


@njit(cache=True, inline="always")
def env_reinit(kind, ip, fp, s, rng):
    """Resample the hidden part of ``s`` from the prior, keeping what the history pins down."""
    if kind == ROCKSAMPLE:
        rs.rocksample_reinit(ip, fp, s, rng)
    elif kind == POCMAN:
        pm.pocman_reinit(ip, fp, s, rng)


@njit(cache=True, inline="always")
def env_consistent(kind, ip, fp, s, a, obs):
    """Whether state ``s`` (reached by action ``a``) can emit observation ``obs``."""
    if kind == ROCKSAMPLE:
        return rs.rocksample_consistent(ip, fp, s, a, obs)
    if kind == POCMAN:
        return pm.pocman_consistent(ip, fp, s, a, obs)
    if kind == TAXI:
        return s[0] * 8 + s[1] == obs
    return s[0] == obs
