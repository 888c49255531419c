"""Command-line front end.

Subcommands:
    price   - price one configuration with any method
    greeks  - Chebyshev price and spot deltas
    table1  - benchmark spread prices across the correlation grid
    sweep   - CSV grids for the price, delta and conditional-fit figures

Every subcommand accepts ``--config <file>`` (TOML or JSON with RunConfig
keys, optionally grouped in tables); flags given on the command line
override file values, which override the built-in defaults.

Exit codes: 0 success, 2 invalid arguments, 3 numerical failure.
"""

import argparse
import json
import logging
import sys
import tomllib
from pathlib import Path
from typing import Any, TextIO

from pydantic import ValidationError

from app.config import get_settings
from app.schemas.pricing import RunConfig
from app.services.export.csv_export import TABLE1_HEADER, format_value, table1_records, write_csv
from app.services.export.sweeps import SWEEPS, SweepOptions, run_sweep
from app.services.pricing.errors import NumericalFailureError, PricingError
from app.services.pricing.model import PriceResult
from app.services.pricing_service import run_greeks, run_price, table1_rows

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3


class ConfigFileError(ValueError):
    """Unreadable or malformed --config file."""


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Read a TOML or JSON key-value file; nested tables are flattened."""
    path = Path(path)
    try:
        if path.suffix == ".toml":
            with path.open("rb") as fh:
                data = tomllib.load(fh)
        elif path.suffix == ".json":
            data = json.loads(path.read_text())
        else:
            raise ConfigFileError(f"Unsupported config format '{path.suffix}' (use .toml or .json)")
    except (OSError, tomllib.TOMLDecodeError, json.JSONDecodeError) as exc:
        raise ConfigFileError(f"Cannot read config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigFileError(f"Config file {path} must hold a key-value mapping")

    flat: dict[str, Any] = {}
    for key, value in data.items():
        if isinstance(value, dict):
            flat.update(value)
        else:
            flat[key] = value
    return {key.replace("-", "_"): value for key, value in flat.items()}


def _add_run_flags(parser: argparse.ArgumentParser, *, with_method: bool) -> None:
    # SUPPRESS keeps unset flags out of the namespace so file values survive.
    opt = {"default": argparse.SUPPRESS}
    market = parser.add_argument_group("market")
    for flag in ("s1", "s2", "sigma1", "sigma2", "rho", "r"):
        market.add_argument(f"--{flag}", type=float, **opt)
    contract = parser.add_argument_group("contract")
    for flag in ("w1", "w2", "strike", "maturity"):
        contract.add_argument(f"--{flag}", type=float, **opt)

    if with_method:
        parser.add_argument(
            "--method",
            choices=["chebyshev", "bernstein", "taylor1", "taylor2", "mc", "quad"],
            **opt,
        )
        parser.add_argument("--paths", type=int, **opt)
        parser.add_argument("--seed", type=int, **opt)
        parser.add_argument("--y-star", dest="y_star", type=float, **opt)
    parser.add_argument("--order", type=int, **opt)
    parser.add_argument("--quad-points", dest="quad_points", type=int, **opt)
    parser.add_argument("--window-a", dest="window_a", type=float, **opt)
    parser.add_argument("--window-b", dest="window_b", type=float, **opt)
    parser.add_argument("--flat-ext", dest="flat_ext", action="store_true", **opt)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None, help="TOML or JSON file with run settings")
    parser.add_argument("--output", choices=["human", "csv"], default=argparse.SUPPRESS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="basket-pricer",
        description="Two-asset basket and spread option pricing under bivariate Black-Scholes.",
    )
    parser.add_argument("--log-level", default=None, help="Override BASKET_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    price = sub.add_parser("price", help="Price one configuration")
    _add_common(price)
    _add_run_flags(price, with_method=True)

    greeks = sub.add_parser("greeks", help="Chebyshev spot deltas")
    _add_common(greeks)
    _add_run_flags(greeks, with_method=False)

    table = sub.add_parser("table1", help="Benchmark prices across correlations")
    _add_common(table)
    table.add_argument("--paths", type=int, default=argparse.SUPPRESS)
    table.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    table.add_argument(
        "--no-mc", dest="no_mc", action="store_true", help="Skip the Monte Carlo column"
    )

    sweep = sub.add_parser("sweep", help="CSV grids for the figures")
    sweep.add_argument("kind", choices=sorted(SWEEPS))
    _add_common(sweep)
    _add_run_flags(sweep, with_method=False)
    return parser


def _merge(args: argparse.Namespace, skip: tuple[str, ...]) -> dict[str, Any]:
    """File values overlaid by explicitly passed flags."""
    values = load_config_file(args.config) if args.config else {}
    for key, value in vars(args).items():
        if key not in skip:
            values[key] = value
    return values


def _print_price(result: PriceResult, output: str, out: TextIO) -> None:
    if output == "csv":
        write_csv(
            ("method", "value", "std_error"),
            [(result.method, result.value, result.std_error)],
            out,
        )
        return
    line = f"{result.method}: {format_value(result.value)}"
    if result.std_error is not None:
        line += f" (std error {format_value(result.std_error)})"
    print(line, file=out)
    print(f"elapsed: {result.elapsed_seconds:.4f}s", file=out)


def cmd_price(config: RunConfig, out: TextIO | None = None) -> PriceResult:
    out = out or sys.stdout
    result = run_price(config)
    _print_price(result, config.output, out)
    return result


def cmd_greeks(config: RunConfig, out: TextIO | None = None) -> None:
    out = out or sys.stdout
    greeks = run_greeks(config)
    if config.output == "csv":
        write_csv(
            ("price", "delta_s1", "delta_s2"),
            [(greeks.price, greeks.delta_s1, greeks.delta_s2)],
            out,
        )
        return
    print(f"price: {format_value(greeks.price)}", file=out)
    print(f"delta_s1: {format_value(greeks.delta_s1)}", file=out)
    print(f"delta_s2: {format_value(greeks.delta_s2)}", file=out)


def cmd_table1(
    *,
    include_mc: bool = True,
    paths: int | None = None,
    seed: int | None = None,
    output: str = "csv",
    out: TextIO | None = None,
) -> None:
    out = out or sys.stdout
    rows = table1_rows(include_mc=include_mc, paths=paths, seed=seed)
    if output == "csv":
        write_csv(TABLE1_HEADER, table1_records(rows), out)
        return
    for row in rows:
        mc = "-" if row.mc is None else f"{row.mc:.6f} +/- {row.mc_std_error:.1e}"
        line = f"rho={row.rho:+.1f}  mc={mc}  taylor2={row.taylor2:.6f}  cheb15={row.cheb15:.6f}"
        if row.cheb_seconds is not None:
            line += f"  cheb {row.cheb_seconds * 1e3:.1f}ms"
        if row.mc_seconds is not None:
            line += f"  mc {row.mc_seconds:.2f}s"
        print(line, file=out)


def cmd_sweep(kind: str, config: RunConfig, out: TextIO | None = None) -> None:
    out = out or sys.stdout
    options = SweepOptions(
        order=config.order,
        quad_points=config.quad_points,
        window_a=config.window_a,
        window_b=config.window_b,
        tail="flat" if config.flat_ext else "truncate",
    )
    header, rows = run_sweep(kind, config.market(), config.contract(), options)
    write_csv(header, rows, out)


def _dispatch(args: argparse.Namespace, out: TextIO | None) -> None:
    if args.command == "table1":
        values = _merge(args, skip=("command", "config", "log_level", "no_mc"))
        extra = set(values) - {"paths", "seed", "output"}
        if extra:
            raise ConfigFileError(f"Keys not valid for table1: {sorted(extra)}")
        cmd_table1(
            include_mc=not args.no_mc,
            paths=values.get("paths"),
            seed=values.get("seed"),
            output=values.get("output", "csv"),
            out=out,
        )
        return

    values = _merge(args, skip=("command", "config", "log_level", "kind"))
    if args.command == "sweep":
        values.setdefault("output", "csv")
        config = RunConfig(**values)
        cmd_sweep(args.kind, config, out)
    elif args.command == "greeks":
        cmd_greeks(RunConfig(**values), out)
    else:
        cmd_price(RunConfig(**values), out)


def main(argv: list[str] | None = None, out: TextIO | None = None) -> int:
    """Entry point; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    settings = get_settings()
    logging.basicConfig(level=(args.log_level or settings.log_level).upper())

    try:
        _dispatch(args, out)
    except NumericalFailureError as exc:
        logger.error("Numerical failure: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValidationError, ConfigFileError, PricingError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
