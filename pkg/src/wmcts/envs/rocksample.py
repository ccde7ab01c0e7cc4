"""RockSample(n, k) kernels.

State vector: ``[x, y, good_bits, sampled_bits]``. The robot starts at
``(0, n // 2)``; ``y`` grows northwards. Actions: 0 N, 1 E, 2 S, 3 W,
4 sample, ``5 + i`` check rock ``i``. Observations: 0 none, 1 good, 2 bad.

``ip = [n, k, rock_x[0..k), rock_y[0..k)]``, ``fp = [half-efficiency distance]``.
"""

from __future__ import annotations

import math

from numba import njit

SAMPLE = 4
OBS_NONE, OBS_GOOD, OBS_BAD = 0, 1, 2
EXIT_REWARD = 10.0
SAMPLE_REWARD = 10.0


@njit(cache=True)
def rock_at(ip, x, y):
    k = ip[1]
    for i in range(k):
        if ip[2 + i] == x and ip[2 + k + i] == y:
            return i
    return -1


@njit(cache=True)
def sensor_accuracy(ip, fp, s, rock):
    k = ip[1]
    dx = s[0] - ip[2 + rock]
    dy = s[1] - ip[2 + k + rock]
    d = math.sqrt(dx * dx + dy * dy)
    return 0.5 * (1.0 + 2.0 ** (-d / fp[0]))


@njit(cache=True)
def rocksample_step(ip, fp, s, a, rng):
    """Returns ``(reward, terminal, observation)``."""
    n = ip[0]
    if a == 0:
        if s[1] + 1 < n:
            s[1] += 1
        return 0.0, False, OBS_NONE
    if a == 1:
        if s[0] + 1 >= n:
            return EXIT_REWARD, True, OBS_NONE
        s[0] += 1
        return 0.0, False, OBS_NONE
    if a == 2:
        if s[1] > 0:
            s[1] -= 1
        return 0.0, False, OBS_NONE
    if a == 3:
        if s[0] > 0:
            s[0] -= 1
        return 0.0, False, OBS_NONE
    if a == SAMPLE:
        rock = rock_at(ip, s[0], s[1])
        if rock < 0:
            return -SAMPLE_REWARD, False, OBS_NONE
        bit = 1 << rock
        good = (s[2] & bit) != 0 and (s[3] & bit) == 0
        s[3] |= bit
        s[2] &= ~bit
        return (SAMPLE_REWARD if good else -SAMPLE_REWARD), False, OBS_NONE
    rock = a - SAMPLE - 1
    good = (s[2] >> rock) & 1
    correct = rng.random() < sensor_accuracy(ip, fp, s, rock)
    return 0.0, False, (OBS_GOOD if (good == 1) == correct else OBS_BAD)


@njit(cache=True)
def rocksample_legal(ip, s, buf):
    n, k = ip[0], ip[1]
    count = 0
    if s[1] + 1 < n:
        buf[count] = 0
        count += 1
    buf[count] = 1
    count += 1
    if s[1] > 0:
        buf[count] = 2
        count += 1
    if s[0] > 0:
        buf[count] = 3
        count += 1
    rock = rock_at(ip, s[0], s[1])
    if rock >= 0 and (s[3] >> rock) & 1 == 0:
        buf[count] = SAMPLE
        count += 1
    for i in range(k):
        if (s[3] >> i) & 1 == 0:
            buf[count] = SAMPLE + 1 + i
            count += 1
    return count


@njit(cache=True)
def rocksample_initial(ip, fp, s, rng):
    n, k = ip[0], ip[1]
    s[0] = 0
    s[1] = n // 2
    s[2] = 0
    s[3] = 0
    for i in range(k):
        if rng.random() < 0.5:
            s[2] |= 1 << i


@njit(cache=True)
def rocksample_perturb(ip, fp, s, rng):
    """Flip the goodness of one unsampled rock (no-op once every rock is sampled)."""
    k = ip[1]
    free = 0
    for i in range(k):
        if (s[3] >> i) & 1 == 0:
            free += 1
    if free == 0:
        return
    pick = int(rng.random() * free)
    for i in range(k):
        if (s[3] >> i) & 1 == 0:
            if pick == 0:
                s[2] ^= 1 << i
                return
            pick -= 1


@njit(cache=True)
def rocksample_consistent(ip, fp, s, a, obs):
    """Whether ``obs`` has positive probability after action ``a`` ending in ``s``."""
    if a <= SAMPLE:
        return obs == OBS_NONE
    rock = a - SAMPLE - 1
    if obs == OBS_NONE:
        return False
    if sensor_accuracy(ip, fp, s, rock) < 1.0:
        return True
    good = (s[2] >> rock) & 1
    return (obs == OBS_GOOD) == (good == 1)


@njit(cache=True)
def rocksample_reinit(ip, fp, s, rng):
    """Resample the hidden rock qualities, keeping the position and sampled flags."""
    k = ip[1]
    s[2] = 0
    for i in range(k):
        if (s[3] >> i) & 1 == 0 and rng.random() < 0.5:
            s[2] |= 1 << i
