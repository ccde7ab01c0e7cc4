"""Constructors for the benchmark environments."""

from __future__ import annotations

import numpy as np

from . import dispatch as dp
from . import gridworlds as gw
from . import pocman as pm
from .layouts import load_fixture
from .model import GenerativeModel

FROZENLAKE_MAP = ("SFFF", "FHFH", "FFFH", "HFFG")

SIXARMS_PROBS = (1.0, 0.15, 0.10, 0.05, 0.03, 0.01)
SIXARMS_REWARDS = (50.0, 133.0, 300.0, 800.0, 1660.0, 6000.0)

NCHAIN_SLIP = 0.2
NCHAIN_END_REWARD = 10.0
NCHAIN_BACK_REWARD = 2.0

RIVERSWIM_RIGHT = (0.3, 0.6, 0.1)  # advance, stay, slip back (interior states)
RIVERSWIM_EDGE_STAY = 0.7
RIVERSWIM_LEFT_REWARD = 0.005
RIVERSWIM_END_REWARD = 1.0

TAXI_SLIP = 0.1
ROCKSAMPLE_HALF_EFFICIENCY = 20.0
ROCKSAMPLE_STANDARD = ((11, 11), (15, 15), (15, 35))


def make_frozenlake() -> GenerativeModel:
    codes = {"S": gw.START, "F": gw.FREE, "H": gw.HOLE, "G": gw.GOAL}
    cells = [codes[ch] for row in FROZENLAKE_MAP for ch in row]
    ip = np.array([len(FROZENLAKE_MAP), len(FROZENLAKE_MAP[0]), *cells])
    return GenerativeModel("frozenlake", dp.FROZENLAKE, 4, False, 1, ip, np.zeros(1), (0.0, 1.0), 100,
                           start=np.array([cells.index(gw.START)]))


def make_nchain(length: int = 5) -> GenerativeModel:
    if length < 2:
        raise ValueError("NChain needs at least 2 states")
    fp = np.array([NCHAIN_SLIP, NCHAIN_END_REWARD, NCHAIN_BACK_REWARD])
    return GenerativeModel("nchain", dp.NCHAIN, 2, False, 1, np.array([length]), fp,
                           (0.0, NCHAIN_END_REWARD), 50, start=np.array([0]), params={"length": length})


def make_riverswim(states: int = 5) -> GenerativeModel:
    if states < 2:
        raise ValueError("RiverSwim needs at least 2 states")
    fp = np.array([RIVERSWIM_RIGHT[0], RIVERSWIM_RIGHT[1], RIVERSWIM_EDGE_STAY,
                   RIVERSWIM_LEFT_REWARD, RIVERSWIM_END_REWARD])
    return GenerativeModel("riverswim", dp.RIVERSWIM, 2, False, 1, np.array([states]), fp,
                           (0.0, RIVERSWIM_END_REWARD), 50, start=np.array([0]), params={"states": states})


def make_sixarms() -> GenerativeModel:
    fp = np.array(SIXARMS_PROBS + SIXARMS_REWARDS)
    return GenerativeModel("sixarms", dp.SIXARMS, 6, False, 1, np.array([6]), fp,
                           (0.0, max(SIXARMS_REWARDS)), 50, start=np.array([0]))


def make_taxi() -> GenerativeModel:
    fx = load_fixture("taxi")
    cells, passengers = [], 0
    for row in fx.rows:
        for ch in row:
            if ch == "P":
                cells.append(gw.PASSENGER + passengers)
                passengers += 1
            else:
                cells.append({"#": gw.WALL, ".": gw.FREE, "S": gw.START, "G": gw.GOAL}[ch])
    ip = np.array([fx.nrow, fx.ncol, *cells])
    return GenerativeModel("taxi", dp.TAXI, 4, False, 2, ip, np.array([TAXI_SLIP]), (0.0, float(passengers)), 100,
                           start=np.array([cells.index(gw.START), 0]), has_preferred=True,
                           params={"passengers": passengers})


def rock_positions(n: int, k: int) -> list[tuple[int, int]]:
    """Distinct rock cells drawn once from a stream seeded by ``(n, k)``; the start cell is excluded."""
    rng = np.random.default_rng([n, k])
    start = (n // 2) * n
    pool = np.array([c for c in range(n * n) if c != start])
    chosen = rng.choice(pool, size=k, replace=False)
    return [(int(c % n), int(c // n)) for c in chosen]


def make_rocksample(n: int = 11, k: int = 11) -> GenerativeModel:
    if n < 1 or k < 1 or k > min(n * n - 1, 62):
        raise ValueError(f"invalid RockSample size (n={n}, k={k})")
    rocks = rock_positions(n, k)
    ip = np.array([n, k, *[x for x, _ in rocks], *[y for _, y in rocks]])
    return GenerativeModel(f"rocksample-{n}-{k}", dp.ROCKSAMPLE, k + 5, True, 4, ip,
                           np.array([ROCKSAMPLE_HALF_EFFICIENCY]), (-10.0, 10.0), 100, has_preferred=True,
                           params={"n": n, "k": k, "rocks": rocks})


def make_pocman() -> GenerativeModel:
    fx = load_fixture("pocman")
    prm = fx.params
    glyph_code = {"#": pm.C_WALL, ".": pm.C_FOOD, "_": pm.C_FREE, "o": pm.C_PILL, "P": pm.C_FREE, "G": pm.C_FREE}
    codes = [glyph_code[ch] for row in fx.rows for ch in row]
    slots, nitems = [], 0
    for code in codes:
        if code in (pm.C_FOOD, pm.C_PILL):
            slots.append(nitems)
            nitems += 1
        else:
            slots.append(-1)
    ghosts = fx.cells("G")
    if not 1 <= len(ghosts) <= pm.MAX_GHOSTS:
        raise ValueError("PocMan maze needs between 1 and 8 ghost starts")
    header = [0] * pm.HEADER
    header[pm.H_NROW], header[pm.H_NCOL] = fx.nrow, fx.ncol
    header[pm.H_NGHOSTS], header[pm.H_NITEMS] = len(ghosts), nitems
    header[pm.H_PAC_START] = fx.cells("P")[0]
    header[pm.H_POWER_STEPS] = int(prm["power_steps"])
    header[pm.H_CHASE_RANGE] = int(prm["chase_range"])
    header[pm.H_SMELL] = int(prm["smell_range"])
    header[pm.H_HEAR] = int(prm["hear_range"])
    header[pm.H_GHOST_START:pm.H_GHOST_START + len(ghosts)] = ghosts
    ip = np.array(header + codes + slots)
    fp = np.array([prm["food_prob"], prm["chase_prob"], prm["flee_slip"]])
    lo = pm.DEATH_REWARD
    hi = pm.STEP_REWARD + pm.FOOD_REWARD + pm.GHOST_REWARD
    return GenerativeModel("pocman", dp.POCMAN, 4, True, pm.state_size(ip), ip, fp, (lo, hi), 90,
                           has_preferred=True, params=dict(prm))


def make_chain(reward: float = 1.0, horizon: int = 100) -> GenerativeModel:
    """Single-action deterministic chain paying ``reward`` every step."""
    return GenerativeModel("chain", dp.CHAIN, 1, False, 1, np.zeros(1), np.array([reward]),
                           (0.0, max(reward, 1e-12)), horizon, start=np.array([0]))


def make_bernoulli_bandit(probs=(0.9, 0.1)) -> GenerativeModel:
    """One-state MDP whose actions pay Bernoulli rewards; a one-step episode is a bandit pull."""
    probs = tuple(float(q) for q in probs)
    return GenerativeModel("bernoulli-bandit", dp.BANDIT, len(probs), False, 1, np.array([len(probs)]),
                           np.array(probs), (0.0, 1.0), 1, start=np.array([0]), params={"probs": probs})


_REGISTRY = {
    "frozenlake": make_frozenlake,
    "nchain": make_nchain,
    "riverswim": make_riverswim,
    "sixarms": make_sixarms,
    "taxi": make_taxi,
    "pocman": make_pocman,
    "chain": make_chain,
}


def env_names() -> list[str]:
    return sorted(_REGISTRY) + ["rocksample-<n>-<k>"]


def make_env(name: str) -> GenerativeModel:
    """Build an environment by CLI name, e.g. ``nchain`` or ``rocksample-11-11``."""
    key = name.lower().replace("_", "-")
    if key.startswith("rocksample"):
        parts = key.split("-")[1:]
        if len(parts) not in (0, 2):
            raise ValueError(f"rocksample takes the form rocksample-<n>-<k>, got {name!r}")
        return make_rocksample(*map(int, parts)) if parts else make_rocksample()
    if key not in _REGISTRY:
        raise ValueError(f"unknown environment {name!r}; choose from {', '.join(env_names())}")
    return _REGISTRY[key]()
