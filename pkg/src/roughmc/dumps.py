"""On-disk formats: delimited reports and the binary path-matrix dump.

All CSV numbers are written with 17 significant digits so that a parse and
re-emit round trip is byte-identical and golden-file regressions stay stable.
Missing statistics (for example an undefined coefficient of variation) are
written as empty fields.

The binary dump stores one path batch as a 64-byte header of eight 8-byte
fields

    magic (b"RMCPATH1"), version (u64), P (u64), n (u64),
    H (f64), horizon (f64), scheme id (u64), master seed (u64)

followed by the (P, n+1) path matrix as float64 in column-major order.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .fbm import SCHEMES, PathBatch

MAGIC = b"RMCPATH1"
BINARY_VERSION = 1

PATHS_CSV_HEADER = "path_id,t,index,value"
PRICES_CSV_HEADER = "strike,estimator,price,std_error,omega_hat,q_hat,replaced"
MOMENTS_CSV_HEADER = "H,scheme,q,mean_abs_err,var_abs_err"
VARRED_CSV_HEADER = (
    "combo_id,scheme,alpha,sigma0,xi,rho,H,r,T,strike,"
    "var_reduction_factor,var_reduction_factor_modified,"
    "cov_standard,cov_turbo,cov_modified_turbo,abs_rel_error"
)
BENCH_CSV_HEADER = "scheme,P,n,H,wall_time"
CURVES_CSV_HEADER = "t,mean_variance,std_variance,mean_price,std_price"


def fmt(value) -> str:
    """One CSV field: 17-significant-digit floats, empty string for None."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(path: str | Path, header: str, rows) -> None:
    lines = [header]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path: str | Path) -> tuple[str, list[list[str]]]:
    """Header line and raw field rows; the inverse of :func:`write_csv`."""
    text = Path(path).read_text()
    lines = text.splitlines()
    return lines[0], [line.split(",") for line in lines[1:]]


def write_paths_csv(batch: PathBatch, path: str | Path) -> None:
    """Long-format dump of a path batch: one row per (path, grid point)."""
    dt = batch.grid.dt
    rows = []
    for j in range(batch.n_paths):
        for i in range(batch.grid.steps + 1):
            rows.append((j, i * dt, i, batch.paths[j, i]))
    write_csv(path, PATHS_CSV_HEADER, rows)


def write_paths_binary(batch: PathBatch, path: str | Path) -> None:
    header = MAGIC + struct.pack(
        "<QQQddQQ",
        BINARY_VERSION,
        batch.n_paths,
        batch.grid.steps,
        batch.hurst,
        batch.grid.horizon,
        SCHEMES.index(batch.scheme),
        batch.seed.master_seed,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.asfortranarray(batch.paths).tobytes(order="F"))


def read_paths_binary(path: str | Path) -> tuple[dict, np.ndarray]:
    """Header fields and the (P, n+1) path matrix of a binary dump."""
    raw = Path(path).read_bytes()
    if raw[:8] != MAGIC:
        raise ValueError(f"not a path dump: bad magic in {path}")
    version, p, n, hurst, horizon, scheme_id, seed = struct.unpack(
        "<QQQddQQ", raw[8:64]
    )
    if version != BINARY_VERSION:
        raise ValueError(f"unsupported dump version {version}")
    matrix = np.frombuffer(raw[64:], dtype=np.float64).reshape((p, n + 1), order="F")
    header = {
        "version": version,
        "n_paths": p,
        "steps": n,
        "hurst": hurst,
        "horizon": horizon,
        "scheme": SCHEMES[scheme_id],
        "master_seed": seed,
    }
    return header, matrix



def write_model_curves_csv(
    path: str | Path,
    times: np.ndarray,
    variance_paths: np.ndarray,
    price_paths: np.ndarray,
) -> None:
    """Pointwise mean/std curves of the variance and price processes."""
    rows = zip(
        times,
        variance_paths.mean(axis=0),
        variance_paths.std(axis=0, ddof=1),
        price_paths.mean(axis=0),
        price_paths.std(axis=0, ddof=1),
    )
    write_csv(path, CURVES_CSV_HEADER, rows)
