"""Deterministic random-number streams and time-grid arithmetic.

Every stochastic routine in the package draws from a counter-based Philox
generator keyed by ``(master_seed, stream_id)``.  One stream is assigned per
simulated path, so results are bit-reproducible regardless of batch splits,
thread counts, or evaluation order.  Normals are produced by applying the
inverse normal CDF to the raw uniform counters, which keeps every stream
stable under partial consumption (the first k draws of a stream never depend
on how many draws are requested).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.random import Philox
from scipy.special import ndtri

_UINT64_MAX = 2**64 - 1
# Map a 53-bit counter to the open interval (0, 1); ndtri is finite there.
_TWO_M53 = 2.0**-53


@dataclass(frozen=True)
class GridSpec:
    """Equidistant partition of [0, horizon] into `steps` intervals.

    The step size is always derived as ``horizon / steps``; grid point i sits
    at ``i * dt``.
    """

    horizon: float
    steps: int

    def __post_init__(self) -> None:
        if not self.horizon > 0.0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")

    @property
    def dt(self) -> float:
        return self.horizon / self.steps

    @property
    def steps_per_unit(self) -> float:
        """Number of grid steps per unit of time (the `n` of the step-variance formulas)."""
        return self.steps / self.horizon

    def times(self) -> np.ndarray:
        """Grid points t_i = i * dt, i = 0..steps."""
        return np.arange(self.steps + 1) * self.dt


@dataclass(frozen=True)
class SeedSpec:
    """Key of one random stream: a 64-bit master seed plus a substream index."""

    master_seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.master_seed <= _UINT64_MAX:
            raise ValueError("master_seed must fit in an unsigned 64-bit integer")
        if not 0 <= self.stream_id <= _UINT64_MAX:
            raise ValueError("stream_id must fit in an unsigned 64-bit integer")

    def shifted(self, offset: int) -> "SeedSpec":
        """Substream with the same master seed and stream_id moved by `offset`."""
        return SeedSpec(self.master_seed, self.stream_id + offset)


@dataclass(frozen=True)
class BivariateNormalSpec:
    """Covariance of a zero-mean bivariate normal: Var[W1], Var[W2], Cov[W1, W2]."""

    var1: float
    var2: float
    cov: float

    def __post_init__(self) -> None:
        if not (self.var1 > 0.0 and self.var2 > 0.0):
            raise ValueError("variances must be positive")
        # Allow the degenerate (perfectly correlated) boundary up to rounding.
        if self.cov**2 > self.var1 * self.var2 * (1.0 + 1e-12):
            raise ValueError("cov^2 exceeds var1*var2: covariance matrix is not PSD")


def _uniforms(seed: SeedSpec, count: int) -> np.ndarray:
    key = np.array([seed.master_seed, seed.stream_id], dtype=np.uint64)
    raw = Philox(key=key).random_raw(count)
    return ((raw >> np.uint64(11)) + 0.5) * _TWO_M53


def standard_normals(seed: SeedSpec, count: int) -> np.ndarray:
    """`count` i.i.d. N(0,1) draws, deterministic in (master_seed, stream_id)."""
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    if count == 0:
        return np.empty(0)
    return ndtri(_uniforms(seed, count))


def path_normals(seed: SeedSpec, n_paths: int, count: int) -> np.ndarray:
    """(n_paths, count) normals; row j comes from the stream `seed.stream_id + j`.

    Row j is bit-identical to ``standard_normals(seed.shifted(j), count)``, so
    any batch split or parallel schedule reproduces the same matrix.
    """
    if n_paths < 0 or count < 0:
        raise ValueError("n_paths and count must be >= 0")
    raw = np.empty((n_paths, count), dtype=np.uint64)
    for j in range(n_paths):
        key = np.array([seed.master_seed, seed.stream_id + j], dtype=np.uint64)
        raw[j] = Philox(key=key).random_raw(count)
    u = ((raw >> np.uint64(11)) + 0.5) * _TWO_M53
    return ndtri(u)


def bivariate_normals(
    seed: SeedSpec, count: int, spec: BivariateNormalSpec
) -> tuple[np.ndarray, np.ndarray]:
    """Paired draws (W1, W2) with the covariance given by `spec`.

    Generated from 2*count standard normals of one stream through the 2x2
    Cholesky factor of the covariance matrix, W1 first.
    """
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    z = standard_normals(seed, 2 * count)
    z1, z2 = z[:count], z[count:]
    a = math.sqrt(spec.var1)
    b = spec.cov / a
    c = math.sqrt(max(spec.var2 - b * b, 0.0))
    return a * z1, b * z1 + c * z2


def hybrid_sigma(grid: GridSpec, hurst: float) -> BivariateNormalSpec:
    """Joint covariance of (Wiener increment, one-step kernel integral) per grid step.

    For a step of length 1/n the plain increment has variance 1/n, the
    integral of (t - s)^(H - 1/2) over the step against dW has variance
    1 / (2 H n^(2H)), and their covariance is 1 / ((H + 1/2) n^(H + 1/2)).
    `n` is the number of steps per unit time.
    """
    if not 0.0 < hurst < 1.0:
        raise ValueError(f"hurst must be in (0, 1), got {hurst}")
    n = grid.steps_per_unit
    var1 = 1.0 / n
    cov = 1.0 / ((hurst + 0.5) * n ** (hurst + 0.5))
    var2 = 1.0 / (2.0 * hurst * n ** (2.0 * hurst))
    return BivariateNormalSpec(var1=var1, var2=var2, cov=cov)
