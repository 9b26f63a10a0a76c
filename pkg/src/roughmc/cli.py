"""Command-line entry point.

One executable drives every experiment through ``--command``; all numeric
settings can come from flags or from a flat key=value config file, with flags
taking precedence.  Any validation or I/O failure exits nonzero with a
message on stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .experiments import ExperimentConfig, run
from .fbm import SCHEMES

COMMANDS = ("simulate", "moments", "price", "varred", "bench")

_DEFAULTS = ExperimentConfig(command="price")


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}")


def _scheme_list(text: str) -> tuple[str, ...]:
    schemes = tuple(tok.strip() for tok in text.split(","))
    for s in schemes:
        if s not in SCHEMES:
            raise argparse.ArgumentTypeError(
                f"unknown scheme {s!r}; choose from {', '.join(SCHEMES)}"
            )
    return schemes


# name -> (config field, parser); config-file keys use the same names.
_OPTIONS = {
    "command": ("command", str),
    "scheme": ("schemes", _scheme_list),
    "H": ("hursts", _float_list),
    "alpha": ("alpha", float),
    "sigma0": ("sigma0", float),
    "xi": ("xi", float),
    "rho": ("rho", float),
    "r": ("r", float),
    "S0": ("spot", float),
    "T": ("horizon", float),
    "n": ("steps_per_year", _int_list),
    "P": ("n_paths", _int_list),
    "batches": ("batches", int),
    "strikes": ("strikes", _float_list),
    "seed": ("seed", int),
    "out": ("out", str),
    "workers": ("workers", int),
    "figdir": ("figdir", str),
    "sweep": ("sweep", int),
    "sweep-seed": ("sweep_seed", int),
    "reps": ("reps", int),
    "dump-format": ("dump_format", str),
    "curves-out": ("curves_out", str),
    "q-max": ("q_max", int),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roughmc",
        description="Monte-Carlo experiments for rough Volterra volatility models",
    )
    parser.add_argument("--config", type=str, default=None,
                        help="flat key=value file; flags override its entries")
    parser.add_argument("--command", choices=COMMANDS, default=None)
    parser.add_argument("--scheme", dest="schemes", type=_scheme_list, default=None,
                        help="comma-separated subset of: " + ", ".join(SCHEMES))
    parser.add_argument("--H", dest="hursts", type=_float_list, default=None,
                        help="Hurst index (comma list for moments/bench)")
    parser.add_argument("--alpha", type=float, default=None)
    parser.add_argument("--sigma0", type=float, default=None)
    parser.add_argument("--xi", type=float, default=None)
    parser.add_argument("--rho", type=float, default=None)
    parser.add_argument("--r", type=float, default=None)
    parser.add_argument("--S0", dest="spot", type=float, default=None)
    parser.add_argument("--T", dest="horizon", type=float, default=None)
    parser.add_argument("--n", dest="steps_per_year", type=_int_list, default=None,
                        help="grid steps per unit of time (comma list for bench)")
    parser.add_argument("--P", dest="n_paths", type=_int_list, default=None,
                        help="paths per batch (comma list for bench)")
    parser.add_argument("--batches", type=int, default=None)
    parser.add_argument("--strikes", type=_float_list, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", type=str, default=None)
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--figdir", type=str, default=None,
                        help="render a figure for the command into this directory")
    parser.add_argument("--sweep", type=int, default=None,
                        help="varred: number of random parameter combos")
    parser.add_argument("--sweep-seed", dest="sweep_seed", type=int, default=None)
    parser.add_argument("--reps", type=int, default=None,
                        help="bench: timed repetitions per cell (median reported)")
    parser.add_argument("--dump-format", dest="dump_format",
                        choices=("csv", "binary"), default=None)
    parser.add_argument("--curves-out", dest="curves_out", type=str, default=None)
    parser.add_argument("--q-max", dest="q_max", type=int, default=None)
    return parser


def _read_config_file(path: str) -> dict:
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValueError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {stripped!r}")
        key, _, raw = stripped.partition("=")
        key, raw = key.strip(), raw.strip()
        if key not in _OPTIONS:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
        field_name, convert = _OPTIONS[key]
        try:
            values[field_name] = convert(raw)
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise ValueError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return values


def _validate(config: ExperimentConfig) -> ExperimentConfig:
    if config.command not in COMMANDS:
        raise ValueError(f"--command is required (one of {', '.join(COMMANDS)})")
    for h in config.hursts:
        if not 0.0 < h < 1.0:
            raise ValueError(f"--H {h:g}: Hurst index must be in (0, 1)")
    if not 0.0 <= config.alpha <= 1.0:
        raise ValueError(f"--alpha {config.alpha:g}: must be in [0, 1]")
    if not -1.0 <= config.rho <= 1.0:
        raise ValueError(f"--rho {config.rho:g}: must be in [-1, 1]")
    if config.sigma0 <= 0.0:
        raise ValueError(f"--sigma0 {config.sigma0:g}: must be positive")
    if config.xi <= 0.0:
        raise ValueError(f"--xi {config.xi:g}: must be positive")
    if config.r < 0.0:
        raise ValueError(f"--r {config.r:g}: must be >= 0")
    if config.spot <= 0.0:
        raise ValueError(f"--S0 {config.spot:g}: must be positive")
    if config.horizon <= 0.0:
        raise ValueError(f"--T {config.horizon:g}: must be positive")
    for n in config.steps_per_year:
        if n < 1:
            raise ValueError(f"--n {n}: must be >= 1")
    for p in config.n_paths:
        if p < 1:
            raise ValueError(f"--P {p}: must be >= 1")
    if config.batches < 1:
        raise ValueError(f"--batches {config.batches}: must be >= 1")
    if not 0 <= config.seed < 2**64:
        raise ValueError(f"--seed {config.seed}: must fit in 64 bits")
    if config.workers < 1:
        raise ValueError(f"--workers {config.workers}: must be >= 1")
    if config.sweep < 0:
        raise ValueError(f"--sweep {config.sweep}: must be >= 0")
    if config.q_max < 0:
        raise ValueError(f"--q-max {config.q_max}: must be >= 0")
    if config.dump_format not in ("csv", "binary"):
        raise ValueError(f"--dump-format {config.dump_format}: must be csv or binary")
    if any(b <= a for a, b in zip(config.strikes, config.strikes[1:])):
        raise ValueError("--strikes: must be strictly ascending")
    if any(k < 0 for k in config.strikes):
        raise ValueError("--strikes: must be >= 0")
    if not config.out:
        raise ValueError("--out is required")
    return config


def parse_config(argv: list[str] | None = None) -> ExperimentConfig:
    """Merge CLI flags over config-file entries over defaults, then validate."""
    args = _build_parser().parse_args(argv)
    values: dict = {}
    if args.config is not None:
        values.update(_read_config_file(args.config))
    for field_name, _ in _OPTIONS.values():
        cli_value = getattr(args, field_name, None)
        if cli_value is not None:
            values[field_name] = cli_value
    merged = {
        field_name: values.get(field_name, getattr(_DEFAULTS, field_name))
        for field_name, _ in _OPTIONS.values()
    }
    if "command" not in values:
        raise ValueError(f"--command is required (one of {', '.join(COMMANDS)})")
    return _validate(ExperimentConfig(**merged))


def main(argv: list[str] | None = None) -> int:
    try:
        config = parse_config(argv)
        written = run(config)
    except (ValueError, OSError, FloatingPointError) as exc:
        print(f"roughmc: error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
