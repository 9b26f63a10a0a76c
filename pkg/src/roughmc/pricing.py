"""European call pricing: plain Monte-Carlo, mixed estimator, safeguard filter.

The mixed ("turbocharged") estimator of McCrickerd & Pakkanen (2018) replaces
the raw payoff average by

    C~ = mean(X_i + w^ Y_i) - w^ E[Y],

where X_i prices the call conditionally on the volatility filtration through
the Black-Scholes formula with total variance (1 - rho^2) * IV_i, Y_i is a
timer-style control evaluated at total variance rho^2 (Q^ - IV_i) with
Q^ = max_i IV_i, and w^ is minus the regression coefficient of X on Y.  E[Y]
is the time-zero value of the control, BS(spot, K, rho^2 Q^, r, T).

The estimator misbehaves for some parameter regions (notably rho close to or
above zero), producing negative, above-spot, or non-monotone estimates for
deep out-of-the-money strikes.  ``modified_turbo_price`` filters such
estimates against three criteria and falls back to the plain Monte-Carlo
values from the same path batch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .model import ModelBatch, ModelParams

STANDARD = "standard"
TURBO = "turbo"
MODIFIED_TURBO = "modified_turbo"


@dataclass(frozen=True)
class PricingRequest:
    """Strike ladder and maturity of a European call sheet."""

    strikes: tuple[float, ...]
    maturity: float
    valuation_time: float = 0.0

    def __post_init__(self) -> None:
        strikes = tuple(float(k) for k in self.strikes)
        object.__setattr__(self, "strikes", strikes)
        if len(strikes) == 0:
            raise ValueError("at least one strike is required")
        if any(k < 0 for k in strikes):
            raise ValueError("strikes must be >= 0")
        if any(b <= a for a, b in zip(strikes, strikes[1:])):
            raise ValueError("strikes must be strictly ascending")
        if self.maturity <= 0.0:
            raise ValueError(f"maturity must be positive, got {self.maturity}")
        if self.valuation_time != 0.0:
            raise ValueError("only valuation at time 0 is supported")


@dataclass(frozen=True)
class PriceEstimate:
    strike: float
    price: float
    std_error: float
    estimator: str
    omega_hat: float | None = None
    q_hat: float | None = None
    safeguard_replaced: bool = False


def black_scholes_call(
    spot: float | np.ndarray,
    strike: float,
    total_variance: float | np.ndarray,
    rate: float = 0.0,
    time_to_maturity: float = 1.0,
) -> float | np.ndarray:
    """Black-Scholes call value parameterized by total variance.

    C = spot * Phi(d1) - strike * exp(-rate * tau) * Phi(d2) with
    d1 = (ln(spot/strike) + rate * tau + w/2) / sqrt(w) and d2 = d1 - sqrt(w).
    At w = 0 the discounted intrinsic value max(spot - strike e^(-r tau), 0)
    is returned.  Vectorized over spot and total_variance.
    """
    spot_arr = np.asarray(spot, dtype=float)
    w = np.asarray(total_variance, dtype=float)
    if np.any(spot_arr <= 0.0):
        raise ValueError("spot must be positive")
    if strike <= 0.0:
        raise ValueError(f"strike must be positive, got {strike}")
    if np.any(w < 0.0):
        raise ValueError("total_variance must be >= 0")
    disc_strike = strike * math.exp(-rate * time_to_maturity)
    intrinsic = np.maximum(spot_arr - disc_strike, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        sqrt_w = np.sqrt(w)
        d1 = (np.log(spot_arr / strike) + rate * time_to_maturity + 0.5 * w) / sqrt_w
        d2 = d1 - sqrt_w
        value = spot_arr * ndtr(d1) - disc_strike * ndtr(d2)
    out = np.where(w > 0.0, value, intrinsic)
    return float(out) if out.ndim == 0 else out


def _check_maturity(model: ModelBatch, req: PricingRequest) -> None:
    if not math.isclose(model.grid.horizon, req.maturity, rel_tol=1e-12):
        raise ValueError(
            f"batch horizon {model.grid.horizon} does not match maturity {req.maturity}"
        )


def mc_price(
    model: ModelBatch, req: PricingRequest, rate: float
) -> list[PriceEstimate]:
    """Discounted mean payoff per strike with its Monte-Carlo standard error."""
    _check_maturity(model, req)
    terminal = model.terminal_prices
    p = terminal.shape[0]
    if p == 0:
        raise ValueError("empty path batch")
    disc = math.exp(-rate * req.maturity)
    out = []
    for k in req.strikes:
        payoff = np.maximum(terminal - k, 0.0)
        se = disc * payoff.std(ddof=1) / math.sqrt(p) if p > 1 else 0.0
        out.append(
            PriceEstimate(strike=k, price=disc * payoff.mean(), std_error=se,
                          estimator=STANDARD)
        )
    return out


def turbo_components(
    model: ModelBatch, req: PricingRequest, params: ModelParams
) -> tuple[np.ndarray, np.ndarray, float]:
    """Per-path conditional prices (X, Y) for every strike, plus the cap Q^.

    X[k] prices strike k from the spot-correlated component with the
    orthogonal share of the integrated variance; Y[k] is the control evaluated
    at rho^2 (Q^ - IV).  Shapes are (n_strikes, P).
    """
    _check_maturity(model, req)
    if any(k <= 0 for k in req.strikes):
        raise ValueError("mixed-estimator pricing requires strikes > 0")
    iv = model.integrated_variance
    s1 = model.terminal_s1
    q_hat = float(iv.max())
    rho2 = params.rho**2
    w_x = (1.0 - rho2) * iv
    # max() guarantees q_hat - iv >= 0; clip only sweeps out rounding noise.
    w_y = rho2 * np.maximum(q_hat - iv, 0.0)
    t = req.maturity
    x = np.empty((len(req.strikes), iv.shape[0]))
    y = np.empty_like(x)
    for i, k in enumerate(req.strikes):
        x[i] = black_scholes_call(s1, k, w_x, params.r, t)
        y[i] = black_scholes_call(s1, k, w_y, params.r, t)
    return x, y, q_hat


def turbo_price(
    model: ModelBatch,
    req: PricingRequest,
    params: ModelParams,
    omega_override: float | None = None,
) -> list[PriceEstimate]:
    """Mixed-estimator prices per strike.

    A strike whose control is degenerate (zero variance of Y, e.g. rho = 0)
    falls back to the plain Monte-Carlo estimate and is labeled ``standard``.
    ``omega_override`` pins the regression coefficient, which is only useful
    for testing (0 reduces the estimator to the conditional Black-Scholes
    mean).
    """
    if model.n_paths < 2:
        raise ValueError("the mixed estimator needs at least 2 paths")
    x, y, q_hat = turbo_components(model, req, params)
    fallback = mc_price(model, req, params.r)
    p = model.n_paths
    out = []
    for i, k in enumerate(req.strikes):
        xc = x[i] - x[i].mean()
        yc = y[i] - y[i].mean()
        denom = float(yc @ yc)
        if denom == 0.0 and omega_override is None:
            out.append(fallback[i])
            continue
        omega = -float(xc @ yc) / denom if omega_override is None else omega_override
        ey = black_scholes_call(params.spot, k, params.rho**2 * q_hat,
                                params.r, req.maturity)
        mixed = x[i] + omega * y[i]
        price = float(mixed.mean()) - omega * ey
        se = float(mixed.std(ddof=1)) / math.sqrt(p)
        out.append(
            PriceEstimate(strike=k, price=price, std_error=se, estimator=TURBO,
                          omega_hat=omega, q_hat=q_hat)
        )
    return out


def apply_safeguard(
    turbo_prices: np.ndarray, fallback_prices: np.ndarray, spot: float
) -> tuple[np.ndarray, np.ndarray]:
    """Replace suspicious prices of an ascending-strike ladder.

    A price is suspicious when it is negative, exceeds the spot, or sits at
    or above the first ascent of the ladder (every later strike included).
    Suspicious entries take the fallback value.  If the splice itself breaks
    the descending order at a kept turbo value, the replacement is extended
    until the ladder is consistent; the result is finally clamped to
    [0, spot] so the bound guarantees are total even for degenerate fallback
    values.  Returns the composite prices and the replacement flags.
    """
    t_prices = np.asarray(turbo_prices, dtype=float)
    f_prices = np.asarray(fallback_prices, dtype=float)
    flags = (t_prices < 0.0) | (t_prices > spot)
    ascent = np.nonzero(np.diff(t_prices) > 0.0)[0]
    if ascent.size:
        flags[ascent[0] + 1 :] = True

    composite = np.where(flags, f_prices, t_prices)
    for _ in range(len(composite)):
        changed = False
        for j in np.nonzero(np.diff(composite) > 0.0)[0]:
            # An ascent at a kept turbo value taints it (and everything above).
            if not flags[j]:
                flags[j:] = True
            elif not flags[j + 1]:
                flags[j + 1 :] = True
            else:
                continue
            changed = True
            break
        if not changed:
            break
        composite = np.where(flags, f_prices, t_prices)
    return np.clip(composite, 0.0, spot), flags


def modified_turbo_price(
    model: ModelBatch, req: PricingRequest, params: ModelParams
) -> list[PriceEstimate]:
    """Mixed-estimator prices with suspicious entries replaced.

    Runs :func:`apply_safeguard` over the mixed-estimator ladder with the
    plain Monte-Carlo estimates from the same batch as fallback.
    """
    turbo = turbo_price(model, req, params)
    fallback = mc_price(model, req, params.r)
    composite, flags = apply_safeguard(
        np.array([e.price for e in turbo]),
        np.array([e.price for e in fallback]),
        params.spot,
    )
    out = []
    for i, k in enumerate(req.strikes):
        src = fallback[i] if flags[i] else turbo[i]
        out.append(
            PriceEstimate(
                strike=k,
                price=float(composite[i]),
                std_error=src.std_error,
                estimator=MODIFIED_TURBO,
                omega_hat=turbo[i].omega_hat,
                q_hat=turbo[i].q_hat,
                safeguard_replaced=bool(flags[i]),
            )
        )
    return out
