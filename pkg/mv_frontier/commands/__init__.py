"""
mv-frontier command line.

Usage:
    mv-frontier validate --model M.json
    mv-frontier estimate --returns R.csv [--ddof 1] [--no-header]
    mv-frontier minvar --model M.json
    mv-frontier tangency --model M.json --rf 0.015
    mv-frontier target --model M.json --mu0 0.1 [--rf 0.015]
    mv-frontier frontier --model M.json --lo 0.05 --hi 0.15 --k 50 [--rf 0.015] [--format csv]
    mv-frontier separate --model M.json --funds F.json --coeffs 0.2,0.3,0.5
    mv-frontier capm --rf 0.015 --mus 0.0854 --beta 0.5 [--observed 0.06]
    mv-frontier oracle-check --model M.json --objective minvar [--samples N] [--seed 42]

Results go to stdout as JSON (or CSV for `frontier --format csv`). Exit codes:
0 success, 1 usage error, 2 validation error, 3 degenerate math.
"""

import argparse
import contextlib
import importlib
import json
import math
import sys
from collections.abc import Sequence

from rich import box
from rich.console import Console
from rich.table import Table

from mv_frontier import __version__, hooks
from mv_frontier.config import SpdMode, get_tolerances, tolerance_names
from mv_frontier.exceptions import MvFrontierError, UsageError
from mv_frontier.utils import set_log_level


class CommandParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message, usage=self.format_usage())


# ========= GRAMMAR =========
def _float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _tolerance(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep or name not in tolerance_names():
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE with NAME in {', '.join(tolerance_names())}")
    try:
        return name, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance {name} needs a number, got {value!r}")


def _common_options() -> argparse.ArgumentParser:
    common = CommandParser(add_help=False)
    source = common.add_mutually_exclusive_group()
    source.add_argument("--model", metavar="PATH", help="model JSON: labels, mu, sigma, optional rf")
    source.add_argument("--returns", metavar="PATH", help="CSV of per-period returns (rows = periods)")
    common.add_argument("--no-header", action="store_true", help="returns CSV has no header row")
    common.add_argument("--ddof", type=int, choices=(0, 1), default=1, help="covariance delta degrees of freedom")
    common.add_argument("--spd-mode", choices=[m.value for m in SpdMode], default=SpdMode.EIGEN.value)
    common.add_argument("--tol", type=_tolerance, action="append", default=[], metavar="NAME=VALUE")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--pretty", action="store_true", help="human-readable tables instead of JSON")
    common.add_argument("--log-level", choices=("debug", "info", "warning", "error"))
    return common


def build_parser() -> CommandParser:
    common = _common_options()
    parser = CommandParser(prog="mv-frontier", description=hooks.app_description)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=CommandParser)

    sub.add_parser("validate", parents=[common], help="check and factorize a model")
    estimate = sub.add_parser("estimate", parents=[common], help="estimate a model from a returns CSV")
    estimate.add_argument("--rf", type=float)
    sub.add_parser("minvar", parents=[common], help="global minimum variance portfolio")

    tangency = sub.add_parser("tangency", parents=[common], help="maximal Sharpe portfolio and tangent line")
    tangency.add_argument("--rf", type=float)

    target = sub.add_parser("target", parents=[common], help="minimum variance for a target return")
    target.add_argument("--mu0", type=float, required=True)
    target.add_argument("--rf", type=float)

    frontier = sub.add_parser("frontier", parents=[common], help="frontier coefficients and samples")
    frontier.add_argument("--lo", type=float, required=True)
    frontier.add_argument("--hi", type=float, required=True)
    frontier.add_argument("--k", type=int, required=True)
    frontier.add_argument("--rf", type=float)
    frontier.add_argument("--include-inefficient", action="store_true")

    separate = sub.add_parser("separate", parents=[common], help="combine efficient funds")
    separate.add_argument("--funds", required=True, metavar="PATH")
    separate.add_argument("--coeffs", type=_float_list, required=True)

    capm = sub.add_parser("capm", parents=[common], help="CAPM expected return and SML classification")
    capm.add_argument("--rf", type=float, required=True)
    capm.add_argument("--mus", type=float, required=True, help="expected return of the systemic portfolio")
    capm.add_argument("--beta", type=float)
    capm.add_argument("--cov", type=float, help="covariance of the asset with the systemic portfolio")
    capm.add_argument("--var", type=float, help="variance of the systemic portfolio")
    capm.add_argument("--observed", type=float)

    oracle = sub.add_parser("oracle-check", parents=[common], help="brute-force check of a closed form")
    oracle.add_argument("--objective", choices=("minvar", "sharpe", "target"), required=True)
    oracle.add_argument("--rf", type=float)
    oracle.add_argument("--mu0", type=float)
    oracle.add_argument("--samples", type=int, default=100_000)
    oracle.add_argument("--spread", type=float, default=1.0)
    oracle.add_argument("--workers", type=int, default=1)
    return parser


def get_handler(command: str):
    """Resolve a subcommand through hooks.cli_commands."""
    module, _, attr = hooks.cli_commands[command].rpartition(".")
    return getattr(importlib.import_module(module), attr)


# ========= OUTPUT =========
def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [_jsonable(v) for v in value]
    return value


def render_pretty(payload: dict, console: Console) -> None:
    labels = payload.get("labels")
    weights = payload.get("weights")
    by_asset = bool(labels and weights and len(labels) == len(weights))

    scalars = Table(box=box.SIMPLE, show_header=False)
    scalars.add_column("field", style="bold")
    scalars.add_column("value")
    nested = {}
    for key, value in payload.items():
        if isinstance(value, dict):
            nested[key] = value
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            nested[key] = {str(i): row for i, row in enumerate(value)}
        elif not (by_asset and key in ("labels", "weights")):
            scalars.add_row(key, str(value))
    console.print(scalars)

    if by_asset:
        table = Table(title="weights", box=box.SIMPLE)
        table.add_column("asset")
        table.add_column("weight", justify="right")
        for label, w in zip(labels, weights):
            table.add_row(label, f"{w:.6f}")
        console.print(table)

    for key, value in nested.items():
        console.rule(key)
        render_pretty(value, console)


def emit(result, args, out) -> None:
    if isinstance(result, str):
        out.write(result)
    elif args.pretty:
        render_pretty(_jsonable(result), Console(file=out))
    else:
        out.write(json.dumps(_jsonable(result), indent=2) + "\n")


# ========= ENTRY POINTS =========
def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()

    try:
        with contextlib.redirect_stdout(stdout):
            args = parser.parse_args(argv)
        if args.log_level:
            set_log_level(args.log_level)
        tolerances = get_tolerances(**dict(args.tol))
        result = get_handler(args.command)(args, tolerances)
    except SystemExit as e:
        # --help / --version, already written to stdout
        return int(e.code or 0)
    except UsageError as e:
        stderr.write(e.details.get("usage") or parser.format_usage())
        stderr.write(f"{parser.prog}: error: {e.message}\n")
        return e.exit_code
    except MvFrontierError as e:
        stdout.write(json.dumps(_jsonable(e.as_dict()), indent=2) + "\n")
        return e.exit_code

    emit(result, args, stdout)
    return 0


def main() -> None:
    sys.exit(run())
