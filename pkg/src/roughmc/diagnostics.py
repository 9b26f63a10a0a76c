"""Sample-quality and variance-reduction statistics.

Moment checks compare sample absolute moments of simulated fBm batches
against the exact values

    E|B_t^H|^q = 2^(q/2) / sqrt(pi) * Gamma((q+1)/2) * |t|^(qH),

and the estimator studies summarize batches of repeated price estimates
through the variance-reduction factor, the coefficient of variation, and the
absolute relative error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fbm import PathBatch, simulate
from .rng import GridSpec, SeedSpec


@dataclass(frozen=True)
class MomentReport:
    q: int
    t: float
    sample_value: float
    theoretical_value: float

    @property
    def abs_error(self) -> float:
        return abs(self.sample_value - self.theoretical_value)


def theoretical_abs_moment(q: int, t: float, hurst: float) -> float:
    """Exact q-th absolute moment of fBm at time t."""
    if q < 0:
        raise ValueError(f"q must be >= 0, got {q}")
    if t < 0.0:
        raise ValueError(f"t must be >= 0, got {t}")
    if q == 0:
        # Gamma(1/2)/sqrt(pi) is exactly 1; bypass its rounding error.
        return 1.0
    const = 2.0 ** (q / 2.0) / math.sqrt(math.pi) * math.gamma((q + 1) / 2.0)
    return const * t ** (q * hurst)


def sample_abs_moment(batch: PathBatch, q: int, at_index: int) -> float:
    """Sample estimate (1/P) sum_j |Y_{at_index}^j|^q."""
    if not 0 <= at_index <= batch.grid.steps:
        raise ValueError(f"at_index out of range 0..{batch.grid.steps}")
    if q < 0:
        raise ValueError(f"q must be >= 0, got {q}")
    return float(np.mean(np.abs(batch.paths[:, at_index]) ** q))


def moment_report(batch: PathBatch, q: int, at_index: int) -> MomentReport:
    t = at_index * batch.grid.dt
    return MomentReport(
        q=q,
        t=t,
        sample_value=sample_abs_moment(batch, q, at_index),
        theoretical_value=theoretical_abs_moment(q, t, batch.hurst),
    )


def moment_error_table(
    scheme: str,
    hurst: float,
    q_values: list[int],
    n_batches: int,
    n_paths: int,
    steps: int,
    seed: SeedSpec,
) -> list[dict]:
    """Mean and variance, across batches, of the end-value moment errors.

    Each batch simulates `n_paths` unit-horizon paths; batch b draws from the
    stream block starting at ``seed.stream_id + 2 * n_paths * b``.  Returns
    one row per q with keys q, mean_abs_err, var_abs_err; the error variance
    is None for a single batch.
    """
    if n_batches < 1:
        raise ValueError("need at least 1 batch")
    grid = GridSpec(1.0, steps)
    errors = np.empty((n_batches, len(q_values)))
    for b in range(n_batches):
        batch = simulate(scheme, grid, hurst, n_paths, seed.shifted(2 * n_paths * b))
        end = np.abs(batch.paths[:, -1])
        for i, q in enumerate(q_values):
            sample = float(np.mean(end**q))
            errors[b, i] = abs(sample - theoretical_abs_moment(q, 1.0, hurst))
    return [
        {
            "q": q,
            "mean_abs_err": float(errors[:, i].mean()),
            "var_abs_err": float(errors[:, i].var(ddof=1)) if n_batches > 1 else None,
        }
        for i, q in enumerate(q_values)
    ]


def variance_reduction_factor(
    turbo_prices: np.ndarray, std_prices: np.ndarray
) -> float | None:
    """Var(turbo) / Var(standard) across batches; below 1 means reduction.

    Returns None when the standard-estimator variance is zero.
    """
    turbo_prices = np.asarray(turbo_prices, dtype=float)
    std_prices = np.asarray(std_prices, dtype=float)
    if turbo_prices.size < 2 or std_prices.size < 2:
        raise ValueError("need at least 2 batch estimates per estimator")
    denom = float(std_prices.var(ddof=1))
    if denom == 0.0:
        return None
    return float(turbo_prices.var(ddof=1)) / denom


def coefficient_of_variation(prices: np.ndarray) -> float | None:
    """Sample standard deviation over sample mean of batch estimates.

    Negative means (a mixed-estimator malfunction) yield a negative value,
    reported as-is.  Returns None for a zero mean.
    """
    prices = np.asarray(prices, dtype=float)
    if prices.size < 2:
        raise ValueError("need at least 2 batch estimates")
    mean = float(prices.mean())
    if mean == 0.0:
        return None
    return float(prices.std(ddof=1)) / mean


def abs_relative_error(turbo_mean: float, std_mean: float) -> float:
    """|turbo - standard| / standard, the bias proxy between mean estimates."""
    if std_mean == 0.0:
        raise ValueError("std_mean must be nonzero")
    return abs(turbo_mean - std_mean) / std_mean
