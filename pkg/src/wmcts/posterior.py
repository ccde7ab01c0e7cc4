"""Wasserstein barycenters of value posteriors under an alpha-divergence cost.

Two posterior families are supported: Gaussians (mean, std) and equally
weighted particle sets. For both, the L1-Wasserstein barycenter with
alpha-divergence ground cost reduces to a component-wise power mean with
order ``p = 1 - alpha``. The closed forms live in :func:`gaussian_barycenter`
and :func:`particle_barycenter`; :func:`barycenter_oracle` recovers the
Gaussian one by brute-force grid minimisation and exists to test it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import erfinv

WEIGHT_TOL = 1e-12
QUANTILE_EPS = 1e-4
QUADRATURE_POINTS = 1024
ORACLE_GRID = 200


@dataclass(frozen=True)
class GaussianPosterior:
    mean: float
    std: float

    def __post_init__(self):
        if not (math.isfinite(self.mean) and math.isfinite(self.std)):
            raise ValueError(f"non-finite posterior ({self.mean}, {self.std})")
        if self.std < 0:
            raise ValueError(f"std must be non-negative, got {self.std}")


@dataclass(frozen=True)
class ParticlePosterior:
    """Equally weighted particles, kept sorted so that index i is the i-th quantile."""

    particles: tuple[float, ...]

    def __post_init__(self):
        values = tuple(sorted(float(x) for x in self.particles))
        if not values:
            raise ValueError("a particle posterior needs at least one particle")
        if not all(math.isfinite(x) for x in values):
            raise ValueError("particles must be finite")
        object.__setattr__(self, "particles", values)

    def __len__(self):
        return len(self.particles)


def power_from_alpha(alpha: float) -> float:
    return 1.0 - alpha


def check_weights(weights, n: int) -> np.ndarray:
    """Validate a weight vector of length ``n``: non-negative and summing to one."""
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size != n:
        raise ValueError(f"expected {n} weights, got shape {w.shape}")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and non-negative")
    if abs(w.sum() - 1.0) > WEIGHT_TOL:
        raise ValueError(f"weights sum to {w.sum()!r}, not 1")
    return w


def power_mean(values, weights, p: float) -> float:
    """Weighted power mean ``(sum_i w_i v_i^p)^(1/p)`` for non-negative values.

    The maximum is factored out before exponentiation so that orders in the
    hundreds (or far beyond) neither overflow nor underflow. The result is
    clipped into ``[min(values), max(values)]`` to absorb rounding (for
    ``p = 1`` that guard is the only difference from ``np.dot(w, v)``).
    """
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("empty aggregate")
    w = check_weights(weights, v.size)
    if np.any(v < 0):
        raise ValueError("power mean requires non-negative inputs")
    if not p >= 1:
        raise ValueError(f"power mean order must be >= 1, got {p}")
    top = v.max()
    if p == 1:
        out = float(np.dot(w, v))
    elif top == 0.0:
        return 0.0
    else:
        out = top * float(np.dot(w, (v / top) ** p)) ** (1.0 / p)
    return float(min(max(out, v.min()), top))


def gaussian_barycenter(posteriors: Sequence[GaussianPosterior], weights, p: float) -> GaussianPosterior:
    means = [g.mean for g in posteriors]
    stds = [g.std for g in posteriors]
    return GaussianPosterior(power_mean(means, weights, p), power_mean(stds, weights, p))


def particle_barycenter(posteriors: Sequence[ParticlePosterior], weights, p: float) -> ParticlePosterior:
    """Quantile-aligned barycenter: particle i is the power mean of every input's particle i."""
    if not posteriors:
        raise ValueError("empty aggregate")
    m = len(posteriors[0])
    if any(len(q) != m for q in posteriors):
        raise ValueError("particle count mismatch")
    w = check_weights(weights, len(posteriors))
    stacked = np.array([q.particles for q in posteriors])
    return ParticlePosterior(tuple(power_mean(stacked[:, i], w, p) for i in range(m)))


def alpha_function(x: float, alpha: float) -> float:
    """Generator ``f_alpha(x) = ((x^a - 1) - a (x - 1)) / (a (a - 1))`` of the alpha-divergence.

    At ``alpha = 0`` and ``alpha = 1`` the removable singularities are
    replaced by their limits, the reverse-KL and KL generators.
    """
    if not x > 0:
        raise ValueError(f"alpha-function is defined for x > 0, got {x}")
    return float(_alpha_function(np.float64(x), alpha))


def _alpha_function(x, alpha: float):
    # vectorised core; callers validate x > 0
    if abs(alpha) < 1e-10:
        return x - 1.0 - np.log(x)
    if abs(alpha - 1.0) < 1e-10:
        return x * np.log(x) - (x - 1.0)
    return ((x**alpha - 1.0) - alpha * (x - 1.0)) / (alpha * (alpha - 1.0))


def alpha_divergence(x, y, alpha: float):
    """Pointwise Csiszar divergence ``y f_alpha(x / y)`` between positive masses."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("α-divergence requires positive support")
    return y * _alpha_function(x / y, alpha)


def gaussian_quantile(g: GaussianPosterior, t: float) -> float:
    """Inverse CDF ``sqrt(2) sigma erfinv(2t - 1) + mu``."""
    if not 0.0 < t < 1.0:
        raise ValueError(f"quantile level must lie in (0, 1), got {t}")
    return math.sqrt(2.0) * g.std * float(erfinv(2.0 * t - 1.0)) + g.mean


def quantile_nodes(quadrature_points: int = QUADRATURE_POINTS, eps: float = QUANTILE_EPS) -> np.ndarray:
    """Midpoints of an equal partition of ``[eps, 1 - eps]``."""
    if quadrature_points < 16:
        raise ValueError("need at least 16 quadrature points")
    h = (1.0 - 2.0 * eps) / quadrature_points
    return eps + h * (np.arange(quadrature_points) + 0.5)


def w1_alpha_distance(mu: GaussianPosterior, nu: GaussianPosterior, alpha: float,
                      quadrature_points: int = QUADRATURE_POINTS) -> float:
    """L1-Wasserstein cost between two Gaussians with alpha-divergence ground cost.

    The cost is evaluated on the quantile coupling after splitting each
    quantile function ``m + s z(t)`` into its location and its centred
    spread: the location term is ``D(m_mu || m_nu)`` and the spread term is
    the quantile integral of ``D(s_mu |z(t)| || s_nu |z(t)|)`` over
    ``[eps, 1 - eps]`` (midpoint rule). Both terms must see positive
    arguments, so means and stds have to be strictly positive.
    """
    location, spread = _w1_alpha_terms(np.array([mu.mean]), np.array([mu.std]), nu, alpha,
                                       quantile_nodes(quadrature_points))
    return float(location[0] + spread[0])


def _w1_alpha_terms(means: np.ndarray, stds: np.ndarray, target: GaussianPosterior, alpha: float,
                    t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Location term per candidate mean and spread term per candidate std."""
    if target.mean <= 0 or target.std <= 0 or np.any(means <= 0) or np.any(stds <= 0):
        raise ValueError("α-divergence requires positive support")
    z = np.abs(np.sqrt(2.0) * erfinv(2.0 * t - 1.0))
    z = z[z > 0]  # the median node of an odd rule carries zero mass
    location = alpha_divergence(means, target.mean, alpha)
    # midpoint rule: node spacing times the sum of node values
    h = t[1] - t[0]
    spread = h * alpha_divergence(stds[:, None] * z[None, :], target.std * z[None, :], alpha).sum(axis=1)
    return location, spread


def barycenter_oracle(posteriors: Sequence[GaussianPosterior], weights, alpha: float,
                      mean_grid=None, std_grid=None) -> GaussianPosterior:
    """Brute-force minimiser of ``sum_i w_i W1(candidate, posterior_i)`` over a grid.

    ``mean_grid`` and ``std_grid`` are ``(low, high, points)`` triples or
    explicit arrays; by default a 200 x 200 grid spans the component-wise
    range of the inputs. Only meant as an independent check of
    :func:`gaussian_barycenter`.
    """
    if not posteriors:
        raise ValueError("empty aggregate")
    w = check_weights(weights, len(posteriors))
    means = _grid(mean_grid, [g.mean for g in posteriors])
    stds = _grid(std_grid, [g.std for g in posteriors])
    t = quantile_nodes()
    objective = np.zeros((means.size, stds.size))
    for wi, g in zip(w, posteriors):
        location, spread = _w1_alpha_terms(means, stds, g, alpha, t)
        objective += wi * (location[:, None] + spread[None, :])
    i, j = np.unravel_index(np.argmin(objective), objective.shape)
    return GaussianPosterior(float(means[i]), float(stds[j]))


def _grid(spec, values) -> np.ndarray:
    if spec is None:
        lo, hi = min(values), max(values)
        grid = np.linspace(lo, hi, ORACLE_GRID) if hi > lo else np.array([lo])
    elif isinstance(spec, tuple) and len(spec) == 3:
        grid = np.linspace(spec[0], spec[1], int(spec[2]))
    else:
        grid = np.asarray(spec, dtype=np.float64)
    if grid.size == 0:
        raise ValueError("empty grid")
    return grid
