"""Experiment runners behind the command-line interface.

Each runner consumes a validated :class:`ExperimentConfig`, executes one of
the study types (path dump, moment-quality table, price sheet,
variance-reduction study, runtime benchmark) and serializes the result to a
delimited report, optionally rendering a figure next to it.  Batch work is
parallelized over a thread pool; results are assembled in task order, so the
output bytes do not depend on the worker count.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.random import Generator, Philox

from . import diagnostics, dumps, pricing
from .fbm import simulate
from .model import ModelParams, euler_paths
from .rng import GridSpec, SeedSpec

DEFAULT_STRIKES = tuple(float(k) for k in range(80, 151, 10))

# Parameter intervals of the variance-reduction sweep.
SWEEP_INTERVALS = {
    "sigma0": (0.0, 1.0),   # half-open: (0, 1]
    "xi": (0.0, 3.0),       # half-open: (0, 3]
    "rho": (-1.0, 1.0),
    "hurst": (0.0, 0.5),    # half-open: (0, 0.5]
    "r": (0.0, 0.05),
    "horizon": (0.25, 1.5),
}


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    schemes: tuple[str, ...] = ("hybrid",)
    hursts: tuple[float, ...] = (0.07,)
    alpha: float = 1.0
    sigma0: float = 0.235**2
    xi: float = 1.9
    rho: float = -0.9
    r: float = 0.0
    spot: float = 100.0
    horizon: float = 1.0
    steps_per_year: tuple[int, ...] = (1008,)
    n_paths: tuple[int, ...] = (1000,)
    batches: int = 30
    strikes: tuple[float, ...] = DEFAULT_STRIKES
    seed: int = 42
    out: str = ""
    workers: int = 1
    figdir: str | None = None
    sweep: int = 0
    sweep_seed: int = 0
    reps: int = 3
    dump_format: str = "csv"
    curves_out: str | None = None
    q_max: int = 6

    def single(self, name: str) -> float | int | str:
        values = getattr(self, name)
        if len(values) != 1:
            raise ValueError(f"command {self.command!r} needs exactly one value for {name}")
        return values[0]

    def grid(self, horizon: float | None = None) -> GridSpec:
        t = self.horizon if horizon is None else horizon
        return GridSpec(t, max(1, round(self.single("steps_per_year") * t)))

    def model_params(self) -> ModelParams:
        return ModelParams(
            sigma0=self.sigma0,
            xi=self.xi,
            rho=self.rho,
            hurst=float(self.single("hursts")),
            alpha=self.alpha,
            r=self.r,
            spot=self.spot,
        )


def batch_seed(master_seed: int, batch_index: int, n_paths: int) -> SeedSpec:
    """Stream block of one batch: fBm paths and the orthogonal Wiener leg of
    batch b occupy streams [2*P*b, 2*P*(b+1))."""
    return SeedSpec(master_seed, 2 * n_paths * batch_index)


def sample_parameter_combos(
    count: int,
    seed: int,
    rho_low: float = -1.0,
    rho_high: float = 1.0,
) -> list[tuple[ModelParams, float]]:
    """Uniform parameter draws for the variance-reduction sweep.

    Returns (params, horizon) pairs with the spot normalized to 1.  The rho
    bounds allow stratified subsamples (for example only positive leverage).
    """
    rng = Generator(Philox(key=np.array([seed, 0x5357454550], dtype=np.uint64)))
    combos = []
    for _ in range(count):
        u = rng.random(7)
        lo, hi = SWEEP_INTERVALS["sigma0"]
        sigma0 = hi - u[0] * (hi - lo) * (1.0 - 1e-12)
        lo, hi = SWEEP_INTERVALS["xi"]
        xi = hi - u[1] * (hi - lo) * (1.0 - 1e-12)
        rho = rho_low + u[2] * (rho_high - rho_low)
        lo, hi = SWEEP_INTERVALS["hurst"]
        hurst = hi - u[3] * (hi - lo) * (1.0 - 1e-12)
        lo, hi = SWEEP_INTERVALS["r"]
        r = lo + u[4] * (hi - lo)
        lo, hi = SWEEP_INTERVALS["horizon"]
        horizon = lo + u[5] * (hi - lo)
        alpha = float(u[6] < 0.5)
        combos.append(
            (
                ModelParams(sigma0=sigma0, xi=xi, rho=rho, hurst=hurst,
                            alpha=alpha, r=r, spot=1.0),
                horizon,
            )
        )
    return combos


def _map(workers: int, fn, tasks: list):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def _maybe_figure(config: ExperimentConfig, render) -> None:
    if config.figdir is None:
        return
    from . import plots

    Path(config.figdir).mkdir(parents=True, exist_ok=True)
    render(plots, Path(config.figdir) / f"{config.command}.png")


def run_simulate(config: ExperimentConfig) -> list[str]:
    """Simulate one batch of fBm paths and dump it (CSV or binary)."""
    scheme = str(config.single("schemes"))
    hurst = float(config.single("hursts"))
    p = int(config.single("n_paths"))
    batch = simulate(scheme, config.grid(), hurst, p, SeedSpec(config.seed, 0))
    written = [config.out]
    if config.dump_format == "binary":
        dumps.write_paths_binary(batch, config.out)
    else:
        dumps.write_paths_csv(batch, config.out)
    if config.curves_out is not None:
        model = euler_paths(batch, config.model_params())
        dumps.write_model_curves_csv(
            config.curves_out, batch.grid.times(), model.variance_paths,
            model.price_paths,
        )
        written.append(config.curves_out)
    _maybe_figure(config, lambda plots, out: plots.plot_paths(batch, out))
    return written


def run_moments(config: ExperimentConfig) -> list[str]:
    """Moment-error table per (scheme, H): mean/variance of end-value errors."""
    p = int(config.single("n_paths"))
    steps = config.grid(1.0).steps
    q_values = list(range(config.q_max + 1))
    cells = [(scheme, hurst) for scheme in config.schemes for hurst in config.hursts]

    def one_cell(cell):
        scheme, hurst = cell
        return diagnostics.moment_error_table(
            scheme, hurst, q_values, config.batches, p, steps,
            SeedSpec(config.seed, 0),
        )

    tables = _map(config.workers, one_cell, cells)
    rows = []
    for (scheme, hurst), table in zip(cells, tables):
        for entry in table:
            rows.append((hurst, scheme, entry["q"], entry["mean_abs_err"],
                         entry["var_abs_err"]))
    dumps.write_csv(config.out, dumps.MOMENTS_CSV_HEADER, rows)
    _maybe_figure(config, lambda plots, out: plots.plot_moments(rows, out))
    return [config.out]


def _price_rows(estimates: list[pricing.PriceEstimate]) -> list[tuple]:
    return [
        (e.strike, e.estimator, e.price, e.std_error, e.omega_hat, e.q_hat,
         e.safeguard_replaced)
        for e in estimates
    ]


def run_price(config: ExperimentConfig) -> list[str]:
    """Price the strike ladder from a single batch with all three estimators."""
    scheme = str(config.single("schemes"))
    params = config.model_params()
    p = int(config.single("n_paths"))
    req = pricing.PricingRequest(config.strikes, config.horizon)
    batch = simulate(scheme, config.grid(), params.hurst, p, SeedSpec(config.seed, 0))
    model = euler_paths(batch, params)
    estimates = (
        pricing.mc_price(model, req, params.r)
        + pricing.turbo_price(model, req, params)
        + pricing.modified_turbo_price(model, req, params)
    )
    dumps.write_csv(config.out, dumps.PRICES_CSV_HEADER, _price_rows(estimates))
    _maybe_figure(config, lambda plots, out: plots.plot_prices(estimates, out))
    return [config.out]


def varred_prices(
    params: ModelParams,
    horizon: float,
    scheme: str,
    steps: int,
    n_paths: int,
    n_batches: int,
    strikes: tuple[float, ...],
    seed: int,
    seed_block: int = 0,
    workers: int = 1,
) -> dict[str, np.ndarray]:
    """Batchwise price estimates for the three estimators.

    Returns arrays of shape (n_batches, n_strikes) keyed by estimator name.
    `seed_block` offsets the stream blocks so that several parameter combos
    can share one master seed without stream collisions.
    """
    req = pricing.PricingRequest(strikes, horizon)
    grid = GridSpec(horizon, steps)

    def one_batch(b: int):
        base = batch_seed(seed, seed_block + b, n_paths)
        batch = simulate(scheme, grid, params.hurst, n_paths, base)
        model = euler_paths(batch, params)
        return (
            [e.price for e in pricing.mc_price(model, req, params.r)],
            [e.price for e in pricing.turbo_price(model, req, params)],
            [e.price for e in pricing.modified_turbo_price(model, req, params)],
        )

    results = _map(workers, one_batch, list(range(n_batches)))
    return {
        pricing.STANDARD: np.array([r[0] for r in results]),
        pricing.TURBO: np.array([r[1] for r in results]),
        pricing.MODIFIED_TURBO: np.array([r[2] for r in results]),
    }


def varred_stats_rows(
    combo_id: int,
    scheme: str,
    params: ModelParams,
    horizon: float,
    strikes: tuple[float, ...],
    prices: dict[str, np.ndarray],
) -> list[tuple]:
    rows = []
    for i, k in enumerate(strikes):
        std = prices[pricing.STANDARD][:, i]
        turbo = prices[pricing.TURBO][:, i]
        mod = prices[pricing.MODIFIED_TURBO][:, i]
        std_mean = float(std.mean())
        rows.append(
            (
                combo_id, scheme, params.alpha, params.sigma0, params.xi,
                params.rho, params.hurst, params.r, horizon, k,
                diagnostics.variance_reduction_factor(turbo, std),
                diagnostics.variance_reduction_factor(mod, std),
                diagnostics.coefficient_of_variation(std),
                diagnostics.coefficient_of_variation(turbo),
                diagnostics.coefficient_of_variation(mod),
                diagnostics.abs_relative_error(float(turbo.mean()), std_mean)
                if std_mean != 0.0
                else None,
            )
        )
    return rows


def run_varred(config: ExperimentConfig) -> list[str]:
    """Variance-reduction study, either one explicit combo or a random sweep.

    In sweep mode the spot is normalized to 1 and the default strike ladder
    0.5, 0.6, ..., 1.6 is used unless strikes were given explicitly.
    """
    scheme = str(config.single("schemes"))
    p = int(config.single("n_paths"))
    n_per_year = int(config.single("steps_per_year"))
    if config.sweep > 0:
        combos = sample_parameter_combos(config.sweep, config.sweep_seed)
        strikes = config.strikes
        if strikes == DEFAULT_STRIKES:
            strikes = tuple(round(0.5 + 0.1 * i, 1) for i in range(12))
    else:
        combos = [(config.model_params(), config.horizon)]
        strikes = config.strikes

    rows = []
    for combo_id, (params, horizon) in enumerate(combos):
        steps = max(1, round(n_per_year * horizon))
        prices = varred_prices(
            params, horizon, scheme, steps, p, config.batches, strikes,
            config.seed, seed_block=combo_id * config.batches,
            workers=config.workers,
        )
        rows.extend(
            varred_stats_rows(combo_id, scheme, params, horizon, strikes, prices)
        )
    dumps.write_csv(config.out, dumps.VARRED_CSV_HEADER, rows)
    _maybe_figure(config, lambda plots, out: plots.plot_varred(rows, out))
    return [config.out]


def run_bench(config: ExperimentConfig) -> list[str]:
    """Wall-clock medians of path simulation over a (scheme, P, n, H) grid.

    One warm-up run per cell is discarded; the median of `reps` repetitions
    is reported.  Cells run serially regardless of the worker setting so the
    timings measure scheme cost only.
    """
    rows = []
    for scheme in config.schemes:
        for p in config.n_paths:
            for steps in config.steps_per_year:
                for hurst in config.hursts:
                    grid = GridSpec(1.0, int(steps))
                    seed = SeedSpec(config.seed, 0)
                    simulate(scheme, grid, hurst, int(p), seed)
                    times = []
                    for _ in range(max(3, config.reps)):
                        t0 = time.perf_counter()
                        simulate(scheme, grid, hurst, int(p), seed)
                        times.append(time.perf_counter() - t0)
                    rows.append((scheme, int(p), int(steps), hurst,
                                 float(np.median(times))))
    dumps.write_csv(config.out, dumps.BENCH_CSV_HEADER, rows)
    _maybe_figure(config, lambda plots, out: plots.plot_bench(rows, out))
    return [config.out]


RUNNERS = {
    "simulate": run_simulate,
    "moments": run_moments,
    "price": run_price,
    "varred": run_varred,
    "bench": run_bench,
}


def run(config: ExperimentConfig) -> list[str]:
    try:
        runner = RUNNERS[config.command]
    except KeyError:
        raise ValueError(f"unknown command {config.command!r}") from None
    return runner(config)
