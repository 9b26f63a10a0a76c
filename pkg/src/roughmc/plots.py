"""Figure rendering for the report path.

Every experiment command can render one PNG next to its delimited output.
Figures are informal diagnostics, not part of the golden regression surface.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .fbm import PathBatch
from .pricing import PriceEstimate


def _save(fig, outfile: str | Path) -> None:
    fig.tight_layout()
    fig.savefig(outfile, dpi=120)
    plt.close(fig)


def plot_paths(batch: PathBatch, outfile: str | Path, max_paths: int = 20) -> None:
    fig, ax = plt.subplots(figsize=(8, 4.5))
    t = batch.grid.times()
    for row in batch.paths[: min(max_paths, batch.n_paths)]:
        ax.plot(t, row, lw=0.8, alpha=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel("Y_t")
    ax.set_title(f"{batch.scheme} paths, H={batch.hurst:g}")
    _save(fig, outfile)


def plot_moments(rows, outfile: str | Path) -> None:
    """rows: (H, scheme, q, mean_abs_err, var_abs_err) tuples."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    keys = sorted({(r[0], r[1]) for r in rows})
    for hurst, scheme in keys:
        sub = [(r[2], r[3]) for r in rows if (r[0], r[1]) == (hurst, scheme)]
        sub.sort()
        ax.plot([q for q, _ in sub], [e for _, e in sub], marker="o",
                label=f"{scheme}, H={hurst:g}")
    ax.set_yscale("log")
    ax.set_xlabel("q")
    ax.set_ylabel("mean |error| of end-value moment")
    ax.legend(fontsize=8)
    _save(fig, outfile)


def plot_prices(estimates: list[PriceEstimate], outfile: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(8, 4.5))
    by_est: dict[str, list[PriceEstimate]] = {}
    for e in estimates:
        by_est.setdefault(e.estimator, []).append(e)
    for name, ests in by_est.items():
        ests.sort(key=lambda e: e.strike)
        ax.errorbar(
            [e.strike for e in ests],
            [e.price for e in ests],
            yerr=[e.std_error for e in ests],
            marker="o", capsize=3, label=name,
        )
    ax.set_xlabel("strike")
    ax.set_ylabel("price")
    ax.legend()
    _save(fig, outfile)


def plot_varred(rows, outfile: str | Path) -> None:
    """rows: tuples in the varred CSV column order."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    rho = [r[5] for r in rows if r[10] is not None]
    factor = [r[10] for r in rows if r[10] is not None]
    ax.scatter(rho, factor, s=12, alpha=0.7)
    ax.axhline(1.0, color="red", lw=1, ls="--")
    ax.set_yscale("log")
    ax.set_xlabel("rho")
    ax.set_ylabel("variance reduction factor")
    _save(fig, outfile)


def plot_bench(rows, outfile: str | Path) -> None:
    """rows: (scheme, P, n, H, wall_time) tuples."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    keys = sorted({(r[0], r[2], r[3]) for r in rows})
    for scheme, steps, hurst in keys:
        sub = sorted((r[1], r[4]) for r in rows if (r[0], r[2], r[3]) == (scheme, steps, hurst))
        ax.plot([p for p, _ in sub], [w for _, w in sub], marker="o",
                label=f"{scheme}, n={steps}, H={hurst:g}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("paths")
    ax.set_ylabel("median wall time [s]")
    ax.legend(fontsize=8)
    _save(fig, outfile)
