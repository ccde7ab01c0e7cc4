"""Non-stationary Gaussian bandit lab.

Thompson sampling over K Gaussian arms with the power-mean estimate of the
optimal value at the root, used to check empirically that

* sub-optimal arms are pulled O(log n) times,
* the power-mean estimate is asymptotically unbiased for the best mean,
* its tail probabilities decay with n.

Per-pull rewards of arm k are drawn from N(m_t, V_k). The per-pull means
m_t are chosen so that the expected empirical mean after n pulls is
exactly ``mu_k + c / n^q`` (the drift family), which makes the sampling
posterior N(mean_k, V_k / T_k) consistent with the stated arm model.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numba import njit

from .posterior import power_mean


@dataclass(frozen=True)
class ArmSpec:
    """One arm: asymptotic mean, variance scale and optional drift ``c / n^q``."""

    mu: float
    variance_scale: float = 1.0
    drift_c: float = 0.0
    drift_q: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError(f"arm mean must lie in [0, 1], got {self.mu}")
        if not self.variance_scale > 0:
            raise ValueError(f"variance_scale must be positive, got {self.variance_scale}")
        if not self.drift_q > 0:
            raise ValueError("drift exponent q must be positive so the drift vanishes")

    def expected_mean(self, n: int) -> float:
        """E[empirical mean after n pulls] = mu + c / n^q."""
        return self.mu + self.drift_c / n**self.drift_q


@dataclass
class BanditState:
    pull_counts: np.ndarray
    reward_sums: np.ndarray
    total_steps: int = 0

    @classmethod
    def empty(cls, k: int) -> "BanditState":
        return cls(np.zeros(k, dtype=np.int64), np.zeros(k))

    @property
    def means(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.pull_counts > 0, self.reward_sums / np.maximum(self.pull_counts, 1), np.nan)


@dataclass
class BanditTrace:
    checkpoints: list = field(default_factory=list)  # (n, pull counts, power-mean estimate)
    gaps: np.ndarray = None

    @property
    def horizons(self) -> list[int]:
        return [c[0] for c in self.checkpoints]


def _arrays(specs: Sequence[ArmSpec]):
    mu = np.array([s.mu for s in specs], dtype=np.float64)
    var = np.array([s.variance_scale for s in specs], dtype=np.float64)
    dc = np.array([s.drift_c for s in specs], dtype=np.float64)
    dq = np.array([s.drift_q for s in specs], dtype=np.float64)
    return mu, var, dc, dq


def gaps(specs: Sequence[ArmSpec]) -> np.ndarray:
    mu = np.array([s.mu for s in specs])
    return mu.max() - mu


@njit(cache=True)
def _argmax_random_tie(scores, rng):
    best = scores[0]
    count = 1
    for i in range(1, scores.size):
        if scores[i] > best:
            best = scores[i]
            count = 1
        elif scores[i] == best:
            count += 1
    if count == 1:
        for i in range(scores.size):
            if scores[i] == best:
                return i
    pick = int(rng.random() * count)
    for i in range(scores.size):
        if scores[i] == best:
            if pick == 0:
                return i
            pick -= 1
    return -1


@njit(cache=True)
def _ts_pick(counts, sums, var, rng, scores):
    for k in range(counts.size):
        scores[k] = sums[k] / counts[k] + math.sqrt(var[k] / counts[k]) * rng.standard_normal()
    return _argmax_random_tie(scores, rng)


@njit(cache=True)
def _pull_mean(mu, dc, dq, t):
    # per-pull mean making E[mean of the first t pulls] = mu + dc / t^dq
    if dc == 0.0:
        return mu
    prev = 0.0 if t == 1 else dc * (t - 1.0) ** (1.0 - dq)
    return mu + dc * t ** (1.0 - dq) - prev


@njit(cache=True)
def _clamped_power_mean(counts, sums, total, p):
    top = 0.0
    k = counts.size
    vals = np.empty(k)
    for i in range(k):
        v = sums[i] / counts[i]
        vals[i] = min(max(v, 0.0), 1.0)
        top = max(top, vals[i])
    if p == 1.0:
        acc = 0.0
        for i in range(k):
            acc += (counts[i] / total) * vals[i]
        return acc
    if top == 0.0:
        return 0.0
    acc = 0.0
    for i in range(k):
        acc += (counts[i] / total) * (vals[i] / top) ** p
    return top * acc ** (1.0 / p)


@njit(cache=True, nogil=True)
def _run(mu, var, dc, dq, horizon, p, checkpoints, rng, out_counts, out_est, out_sums):
    k = mu.size
    counts = np.zeros(k, dtype=np.int64)
    sums = np.zeros(k)
    scores = np.empty(k)
    c = 0
    for n in range(horizon):
        if n < k:
            arm = n
        else:
            arm = _ts_pick(counts, sums, var, rng, scores)
        counts[arm] += 1
        m = _pull_mean(mu[arm], dc[arm], dq[arm], counts[arm])
        sums[arm] += m + math.sqrt(var[arm]) * rng.standard_normal()
        while c < checkpoints.size and checkpoints[c] == n + 1:
            out_counts[c, :] = counts
            out_sums[c, :] = sums
            out_est[c] = _clamped_power_mean(counts, sums, n + 1.0, p)
            c += 1


def ts_select(state: BanditState, specs: Sequence[ArmSpec], rng: np.random.Generator) -> int:
    """Thompson sampling: one draw per arm from N(empirical mean, V_k / T_k), highest draw wins."""
    if np.any(state.pull_counts == 0):
        raise RuntimeError("every arm must be pulled once before Thompson sampling")
    var = np.array([s.variance_scale for s in specs], dtype=np.float64)
    return int(_ts_pick(state.pull_counts, state.reward_sums, var, rng, np.empty(len(specs))))


def root_power_estimate(state: BanditState, p: float) -> float:
    """Visit-weighted power mean of the arms' empirical means, clamped into [0, 1]."""
    n = int(state.pull_counts.sum())
    if n == 0 or np.any(state.pull_counts == 0):
        raise ValueError("every arm needs at least one pull")
    means = np.clip(state.reward_sums / state.pull_counts, 0.0, 1.0)
    return power_mean(means, state.pull_counts / n, p)


def simulate_bandit(specs: Sequence[ArmSpec], horizon: int, p: float, seed,
                    checkpoint_schedule: Sequence[int] | None = None) -> BanditTrace:
    """Play Thompson sampling for ``horizon`` steps after a one-pull-per-arm warm start."""
    k = len(specs)
    if horizon < k:
        raise ValueError(f"horizon {horizon} shorter than the {k}-pull warm start")
    if p < 1:
        raise ValueError("p must be >= 1")
    sched = np.array(sorted(set(checkpoint_schedule or [horizon])), dtype=np.int64)
    if sched[0] < k or sched[-1] > horizon:
        raise ValueError("checkpoints must lie in [K, horizon]")
    counts, sums, est = _simulate_arrays(specs, horizon, p, seed, sched)
    trace = BanditTrace(gaps=gaps(specs))
    for i, n in enumerate(sched):
        trace.checkpoints.append((int(n), counts[i].copy(), float(est[i])))
    return trace


def _simulate_arrays(specs, horizon, p, seed, sched):
    mu, var, dc, dq = _arrays(specs)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    counts = np.zeros((sched.size, mu.size), dtype=np.int64)
    sums = np.zeros((sched.size, mu.size))
    est = np.zeros(sched.size)
    _run(mu, var, dc, dq, int(horizon), float(p), sched, rng, counts, est, sums)
    return counts, sums, est


@dataclass
class RepResults:
    horizons: np.ndarray
    pulls: np.ndarray      # (reps, horizons, arms)
    estimates: np.ndarray  # (reps, horizons)
    mu_star: float


def run_reps(specs: Sequence[ArmSpec], horizons: Sequence[int], reps: int, p: float, seed: int,
             jobs: int = 1) -> RepResults:
    """Independent reps, each with its own spawned stream; merged by rep index."""
    sched = np.array(sorted(set(int(h) for h in horizons)), dtype=np.int64)
    streams = np.random.SeedSequence(seed).spawn(reps)

    def one(i):
        return _simulate_arrays(specs, int(sched[-1]), p, np.random.default_rng(streams[i]), sched)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, range(reps)))
    else:
        results = [one(i) for i in range(reps)]
    pulls = np.stack([r[0] for r in results])
    est = np.stack([r[2] for r in results])
    return RepResults(sched, pulls, est, max(s.mu for s in specs))


@dataclass
class LinearFit:
    slope: float
    intercept: float
    r_squared: float


@dataclass
class RegretReport:
    horizons: list[int]
    mean_pulls: dict[int, list[float]]  # sub-optimal arm -> mean pulls per horizon
    fits: dict[int, LinearFit]
    total: LinearFit                     # fit of the summed sub-optimal pulls

    @property
    def slope(self):
        return self.total.slope

    @property
    def intercept(self):
        return self.total.intercept

    @property
    def r_squared(self):
        return self.total.r_squared


def fit_log(horizons, values) -> LinearFit:
    """Ordinary least squares of ``values`` against ``log(horizons)``."""
    x = np.log(np.asarray(horizons, dtype=np.float64))
    y = np.asarray(values, dtype=np.float64)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return LinearFit(float(slope), float(intercept), r2)


def check_log_regret(specs, horizons, reps, p=1.0, seed=0, jobs=1, results: RepResults | None = None) -> RegretReport:
    res = results or run_reps(specs, horizons, reps, p, seed, jobs)
    mu = np.array([s.mu for s in specs])
    sub = [k for k in range(len(specs)) if mu[k] < mu.max()]
    mean = res.pulls.mean(axis=0)  # (horizons, arms)
    per_arm = {k: mean[:, k].tolist() for k in sub}
    fits = {k: fit_log(res.horizons, mean[:, k]) for k in sub}
    total = mean[:, sub].sum(axis=1) if sub else np.zeros(len(res.horizons))
    return RegretReport(res.horizons.tolist(), per_arm, fits, fit_log(res.horizons, total))


@dataclass
class TailReport:
    horizons: list[int]
    epsilon: float
    tail: list[float]


@dataclass
class BiasReport:
    horizons: list[int]
    bias: list[float]
    drift_residual: list[float]  # |delta*_n| evaluated at the optimal arm's mean pull count


def check_concentration(specs, horizons, reps, p, epsilon, seed=0, jobs=1,
                        results: RepResults | None = None) -> TailReport:
    res = results or run_reps(specs, horizons, reps, p, seed, jobs)
    dev = np.abs(res.estimates - res.mu_star)
    return TailReport(res.horizons.tolist(), epsilon, (dev >= epsilon).mean(axis=0).tolist())


def check_bias(specs, horizons, reps, p, seed=0, jobs=1, results: RepResults | None = None) -> BiasReport:
    res = results or run_reps(specs, horizons, reps, p, seed, jobs)
    bias = np.abs(res.estimates.mean(axis=0) - res.mu_star)
    best = int(np.argmax([s.mu for s in specs]))
    star = specs[best]
    pulls_star = res.pulls[:, :, best].mean(axis=0)
    residual = [abs(star.expected_mean(max(float(t), 1.0)) - star.mu) for t in pulls_star]
    return BiasReport(res.horizons.tolist(), bias.tolist(), residual)


def report_rows(specs, res: RepResults, p: float):
    """Rows for the bandit CSV: rep, horizon, arm, pulls, estimate_p, abs_bias."""
    rows = []
    for r in range(res.pulls.shape[0]):
        for h, n in enumerate(res.horizons):
            est = float(res.estimates[r, h])
            for k in range(len(specs)):
                rows.append((r, int(n), k, int(res.pulls[r, h, k]), est, abs(est - res.mu_star)))
    return rows
