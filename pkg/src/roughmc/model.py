"""Exponential-Volterra volatility model and log-Euler asset paths.

The instantaneous variance follows

    v_t = sigma0 * exp(xi * Y_t - 0.5 * alpha * xi^2 * t^(2H)),

where Y is the Riemann-Liouville fBm of :mod:`roughmc.fbm`.  alpha = 0 gives
the non-stationary RFSV dynamics, alpha = 1 the rBergomi dynamics, interior
values interpolate.  The log price is advanced with a forward Euler step

    dX_i = (r - v_{i-1}/2) dt + sqrt(v_{i-1}) dZ_i,
    dZ_i = rho dW_i + sqrt(1 - rho^2) dW~_i,

with dW the driving increments carried by the path batch and dW~ an
independent Wiener process on dedicated substreams.  Alongside the asset
paths the transform accumulates the two per-path quantities the mixed
estimator of :mod:`roughmc.pricing` consumes: the integrated variance
(left-point rule over the full horizon) and the terminal value of the
spot-correlated price component

    d ln S1_i = (r - rho^2 v_{i-1} / 2) dt + rho sqrt(v_{i-1}) dW_i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fbm import PathBatch
from .rng import GridSpec, SeedSpec, path_normals


@dataclass(frozen=True)
class ModelParams:
    """Model coefficients plus market data.

    sigma0 is the initial instantaneous variance level, xi the vol-of-vol,
    rho the leverage correlation, alpha the interpolation weight between the
    RFSV (0) and rBergomi (1) drift corrections.
    """

    sigma0: float
    xi: float
    rho: float
    hurst: float
    alpha: float
    r: float = 0.0
    spot: float = 1.0

    def __post_init__(self) -> None:
        if self.sigma0 <= 0.0:
            raise ValueError(f"sigma0 must be positive, got {self.sigma0}")
        if self.xi <= 0.0:
            raise ValueError(f"xi must be positive, got {self.xi}")
        if not -1.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must be in [-1, 1], got {self.rho}")
        if not 0.0 < self.hurst < 1.0:
            raise ValueError(f"hurst must be in (0, 1), got {self.hurst}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.r < 0.0:
            raise ValueError(f"r must be >= 0, got {self.r}")
        if self.spot <= 0.0:
            raise ValueError(f"spot must be positive, got {self.spot}")


@dataclass(frozen=True)
class ModelBatch:
    """Variance, log-price and price paths plus the mixed-estimator inputs."""

    grid: GridSpec
    params: ModelParams
    variance_paths: np.ndarray
    log_price_paths: np.ndarray
    price_paths: np.ndarray
    integrated_variance: np.ndarray
    terminal_s1: np.ndarray

    @property
    def n_paths(self) -> int:
        return self.price_paths.shape[0]

    @property
    def terminal_prices(self) -> np.ndarray:
        return self.price_paths[:, -1]


def variance_path(batch: PathBatch, params: ModelParams) -> np.ndarray:
    """Instantaneous-variance paths v_i = sigma0 exp(xi Y_i - alpha xi^2 t_i^(2H) / 2)."""
    if batch.hurst != params.hurst:
        raise ValueError(
            f"batch hurst {batch.hurst} does not match params hurst {params.hurst}"
        )
    t = batch.grid.times()
    drift = 0.5 * params.alpha * params.xi**2 * t ** (2.0 * params.hurst)
    return params.sigma0 * np.exp(params.xi * batch.paths - drift[None, :])


def theoretical_vol_moment(q: int, t: float, params: ModelParams) -> float:
    """q-th moment of the variance process, sigma0^q exp(xi^2 q (q - alpha) t^(2H) / 2)."""
    if q < 0:
        raise ValueError(f"q must be >= 0, got {q}")
    if t < 0.0:
        raise ValueError(f"t must be >= 0, got {t}")
    expo = 0.5 * params.xi**2 * q * (q - params.alpha) * t ** (2.0 * params.hurst)
    return params.sigma0**q * math.exp(expo)


def euler_paths(batch: PathBatch, params: ModelParams) -> ModelBatch:
    """Forward-Euler asset paths driven by a simulated fBm batch.

    The orthogonal Wiener leg of path j draws from stream
    ``batch.seed.stream_id + P + j``, so it never collides with the fBm
    streams of the same batch and is reproducible under any batch split.
    """
    grid = batch.grid
    n, p = grid.steps, batch.n_paths
    dt = grid.dt
    dw = batch.wiener_increments
    dw_perp = math.sqrt(dt) * path_normals(batch.seed.shifted(p), p, n)

    # Overflow is handled by the explicit finiteness check below.
    with np.errstate(over="ignore", invalid="ignore"):
        v = variance_path(batch, params)
        vol = np.sqrt(v[:, :-1])
        dz = params.rho * dw + math.sqrt(1.0 - params.rho**2) * dw_perp
        dx = (params.r - 0.5 * v[:, :-1]) * dt + vol * dz

        log_paths = np.full((p, n + 1), math.log(params.spot))
        np.cumsum(dx, axis=1, out=log_paths[:, 1:])
        log_paths[:, 1:] += math.log(params.spot)
    if not np.all(np.isfinite(log_paths)):
        raise FloatingPointError(
            "non-finite log-price values; parameters blow up at this grid resolution"
        )

    integrated_variance = v[:, :-1].sum(axis=1) * dt
    dlogs1 = (params.r - 0.5 * params.rho**2 * v[:, :-1]) * dt + params.rho * vol * dw
    terminal_s1 = params.spot * np.exp(dlogs1.sum(axis=1))

    return ModelBatch(
        grid=grid,
        params=params,
        variance_paths=v,
        log_price_paths=log_paths,
        price_paths=np.exp(log_paths),
        integrated_variance=integrated_variance,
        terminal_s1=terminal_s1,
    )
