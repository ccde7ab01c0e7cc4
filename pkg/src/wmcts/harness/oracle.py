"""Random-instance comparison of the closed-form Gaussian barycenter against the grid oracle."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..posterior import GaussianPosterior, barycenter_oracle, gaussian_barycenter, power_from_alpha

GRID_STEP = 0.005


@dataclass(frozen=True)
class OracleCase:
    alpha: float
    closed_form: GaussianPosterior
    oracle: GaussianPosterior
    step: float

    @property
    def grid_steps_off(self) -> float:
        """Largest component-wise gap, measured in grid steps."""
        gap = max(abs(self.closed_form.mean - self.oracle.mean), abs(self.closed_form.std - self.oracle.std))
        return gap / self.step

    @property
    def ok(self) -> bool:
        return self.grid_steps_off <= 1.0 + 1e-9


def _axis(values, step: float) -> np.ndarray:
    lo, hi = min(values), max(values)
    return lo + step * np.arange(int(np.floor((hi - lo) / step + 1e-9)) + 1)


def oracle_suite(instances: int = 20, alphas=(0.0, -0.5, -1.0), seed: int = 0, step: float = GRID_STEP,
                 components: int = 3) -> list[OracleCase]:
    """``instances`` random mixtures per alpha, each solved both ways on a grid of spacing ``step``."""
    rng = np.random.default_rng(seed)
    out = []
    for alpha in alphas:
        p = power_from_alpha(alpha)
        for _ in range(instances):
            k = int(rng.integers(2, components + 1))
            means = rng.uniform(0.1, 1.0, k)
            stds = rng.uniform(0.1, 1.0, k)
            w = rng.dirichlet(np.ones(k))
            posts = [GaussianPosterior(float(m), float(s)) for m, s in zip(means, stds)]
            closed = gaussian_barycenter(posts, w, p)
            found = barycenter_oracle(posts, w, alpha, mean_grid=_axis(means, step), std_grid=_axis(stds, step))
            out.append(OracleCase(float(alpha), closed, found, step))
    return out
