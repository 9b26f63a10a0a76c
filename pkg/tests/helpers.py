"""Independent oracles and shared fixtures for the test suite.

The oracles here intentionally avoid the library code paths they check:
convolutions are computed with explicit O(n^2) sums and the Black-Scholes
value with numerical quadrature of the lognormal payoff.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad

from roughmc.model import ModelParams

# Index-calibrated coefficients used across estimator tests.
SPX = ModelParams(
    sigma0=0.235**2, xi=1.9, rho=-0.9, hurst=0.07, alpha=1.0, r=0.0, spot=100.0
)

# Coefficients for which the mixed estimator is known to misbehave deep OTM.
MALFUNCTION = ModelParams(
    sigma0=0.62, xi=0.18, rho=-0.05, hurst=0.22, alpha=1.0, r=0.0, spot=100.0
)

LADDER = tuple(float(k) for k in range(80, 151, 10))


def naive_convolve(kernel_vec: np.ndarray, increments: np.ndarray) -> np.ndarray:
    """Direct O(n^2) evaluation of sum_{k=1..i} kernel[k] * increments[i-k]."""
    increments = np.atleast_2d(increments)
    n = increments.shape[1]
    out = np.zeros((increments.shape[0], n))
    for i in range(1, n + 1):
        ks = np.arange(1, i + 1)
        out[:, i - 1] = increments[:, i - ks] @ kernel_vec[ks]
    return out


def bs_call_quadrature(
    spot: float, strike: float, total_variance: float, rate: float, tau: float
) -> float:
    """Call value by quadrature over the terminal lognormal density.

    S_T = spot * exp(rate * tau - w/2 + sqrt(w) Z) with Z standard normal.
    """
    if total_variance == 0.0:
        return max(spot - strike * math.exp(-rate * tau), 0.0)
    sq = math.sqrt(total_variance)

    def integrand(z: float) -> float:
        st = spot * math.exp(rate * tau - 0.5 * total_variance + sq * z)
        payoff = max(st - strike, 0.0)
        return payoff * math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)

    value, _ = quad(integrand, -12.0, 12.0, limit=400)
    return math.exp(-rate * tau) * value
