"""Command-line entry point: ``hwm price | sweep | density``.

Parameters come from built-in defaults, then an optional flat JSON config
file (``--config``), then command-line flags, in increasing priority. Every
output embeds the fully resolved parameter set.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from typing import Optional, Sequence

import numpy as np

from .analytic import CORRECTIONS, continuous_price, discrete_price
from .maxdist import max_cdf, max_pdf
from .montecarlo import BudgetExceeded, SimulationSpec, mc_price
from .quadrature import QuadratureSpec, oracle_price
from .types import (
    Compounding,
    ContractState,
    ContractTerms,
    FieldError,
    MarketParams,
    MaxDistParams,
    ValidationError,
    validate,
)

log = logging.getLogger("hwm")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3

METHODS = ("continuous", "discrete", "quadrature", "mc")
SWEEP_COLUMNS = (
    "n_observations",
    "delta_t",
    "epsilon",
    "analytic_discrete",
    "analytic_continuous",
    "mc_value",
    "mc_stderr",
)
DENSITY_COLUMNS = ("h", "pdf", "cdf")

DEFAULTS = {
    "r": 0.05,
    "y": 0.0,
    "v": 0.10,
    "gamma": 0.08,
    "T": 10.0,
    "N": 12,
    "S": 1.0,
    "SH": None,  # defaults to max(S, S0)
    "th": 0.0,
    "S0": 1.0,
    "notional": 1.0,
    "method": "continuous",
    "seed": 42,
    "paths": 100_000,
    "substeps": 1,
    "antithetic": False,
    "threads": None,
    "compounding": "continuous",
    "correction": "bgk",
    "rel_tol": 1e-11,
    "abs_tol": 1e-13,
    "max_subdivisions": 500,
    "h_max": 1.0,
    "h_points": 101,
    "format": None,
    "out": None,
}


class UsageError(Exception):
    pass


def fmt(x) -> str:
    """Full-precision decimal representation (17 significant digits)."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _parse_list(text, kind):
    if isinstance(text, (list, tuple)):
        return [kind(t) for t in text]
    return [kind(t) for t in str(text).split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    add = common.add_argument
    S = argparse.SUPPRESS
    add("--config", help="flat JSON object with any of the flag names as keys")
    add("--r", type=float, default=S, help="risk-free rate")
    add("--y", type=float, default=S, help="dividend yield")
    add("--v", type=float, default=S, help="volatility")
    add("--gamma", type=float, default=S, help="guarantee rate")
    add("--T", type=float, default=S, help="maturity in years")
    add("--N", default=S, help="observation count (sweep: comma-separated list)")
    add("--S", type=float, default=S, help="current spot")
    add("--SH", type=float, default=S, help="high-water mark")
    add("--th", type=float, default=S, help="accrual time of the high-water mark")
    add("--S0", type=float, default=S, help="issue spot")
    add("--notional", type=float, default=S)
    add("--method", default=S, help="comma-separated subset of " + ",".join(METHODS))
    add("--seed", type=int, default=S)
    add("--paths", type=int, default=S, help="Monte-Carlo paths")
    add("--substeps", type=int, default=S, help="simulation steps per observation")
    add("--antithetic", action="store_true", default=S)
    add("--threads", type=int, default=S)
    add("--compounding", choices=[c.value for c in Compounding], default=S)
    add("--correction", choices=sorted(CORRECTIONS), default=S, help="discrete-monitoring shift constant")
    add("--rel-tol", dest="rel_tol", type=float, default=S)
    add("--abs-tol", dest="abs_tol", type=float, default=S)
    add("--h-max", dest="h_max", type=float, default=S, help="density grid upper end")
    add("--h-points", dest="h_points", type=int, default=S, help="density grid size")
    add("--out", default=S, help="output file (default stdout)")
    add("--format", choices=("csv", "json"), default=S)

    parser = argparse.ArgumentParser(prog="hwm", description="High-water-mark variable annuity pricer")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("price", parents=[common], help="price one contract")
    sub.add_parser("sweep", parents=[common], help="analytic vs Monte-Carlo value across observation counts")
    sub.add_parser("density", parents=[common], help="running-maximum pdf and cdf on a grid")
    return parser


def resolve(args: argparse.Namespace) -> dict:
    config = dict(DEFAULTS)
    if getattr(args, "config", None):
        with open(args.config) as f:
            loaded = json.load(f)
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold one JSON object")
        unknown = sorted(set(loaded) - set(DEFAULTS))
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        config.update(loaded)
    for key, value in vars(args).items():
        if key in DEFAULTS:
            config[key] = value
    if config["SH"] is None:
        config["SH"] = max(float(config["S"]), float(config["S0"]))
    return config


def _model(config: dict, n_observations: int):
    market = MarketParams(r=float(config["r"]), v=float(config["v"]), y=float(config["y"]))
    try:
        compounding = Compounding(config["compounding"])
    except ValueError:
        raise ValidationError([FieldError("compounding", f"unknown compounding {config['compounding']!r}")])
    terms = ContractTerms(
        gamma=float(config["gamma"]),
        maturity=float(config["T"]),
        n_observations=n_observations,
        notional=float(config["notional"]),
        compounding=compounding,
    )
    state = ContractState(
        spot=float(config["S"]),
        high_water=float(config["SH"] if config["SH"] is not None else max(config["S"], config["S0"])),
        accrual_time=float(config["th"]),
        issue_spot=float(config["S0"]),
    )
    validate(market, terms, state)
    return market, terms, state


def _sim_spec(config: dict) -> SimulationSpec:
    try:
        return SimulationSpec(
            n_paths=int(config["paths"]),
            seed=int(config["seed"]),
            substeps=int(config["substeps"]),
            antithetic=bool(config["antithetic"]),
            n_threads=config["threads"],
        )
    except ValueError as exc:
        raise ValidationError([FieldError("simulation", str(exc))]) from None


def _quad_spec(config: dict) -> QuadratureSpec:
    try:
        return QuadratureSpec(
            rel_tol=float(config["rel_tol"]),
            abs_tol=float(config["abs_tol"]),
            max_subdivisions=int(config["max_subdivisions"]),
        )
    except ValueError as exc:
        raise ValidationError([FieldError("quadrature", str(exc))]) from None


def _single_n(config: dict) -> int:
    values = _parse_list(config["N"], int)
    if len(values) != 1:
        raise UsageError("price takes a single --N")
    return values[0]


def cmd_price(config: dict) -> str:
    methods = _parse_list(config["method"], str)
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise UsageError(f"unknown method(s) {bad}; choose from {', '.join(METHODS)}")
    market, terms, state = _model(config, _single_n(config))
    results = []
    for method in methods:
        if method == "continuous":
            res = continuous_price(state, market, terms)
        elif method == "discrete":
            res = discrete_price(state, market, terms, correction=config["correction"])
        elif method == "quadrature":
            res = oracle_price(state, market, terms, _quad_spec(config))
        else:
            res = mc_price(state, market, terms, _sim_spec(config)).to_result()
        out = res.to_dict()
        out["params"] = config
        results.append(out)
    if config["format"] == "csv":
        buf = io.StringIO()
        buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["method", "value", "std_error", "epsilon", "warning"])
        for r in results:
            w.writerow([r["method"], fmt(r["value"]), fmt(r.get("std_error")), fmt(r["epsilon"]), r.get("warning", "")])
        return buf.getvalue()
    payload = results[0] if len(results) == 1 else results
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def sweep_rows(config: dict, n_list: Sequence[int]) -> list[dict]:
    if not n_list:
        raise UsageError("sweep needs a nonempty --N list")
    spec = _sim_spec(config)
    rows = []
    for n in n_list:
        market, terms, state = _model(config, n)
        cont = continuous_price(state, market, terms)
        disc = discrete_price(state, market, terms, correction=config["correction"])
        mc = mc_price(state, market, terms, spec)
        rows.append(
            {
                "n_observations": n,
                "delta_t": terms.delta_t,
                "epsilon": disc.epsilon_used,
                "analytic_discrete": disc.value,
                "analytic_continuous": cont.value,
                "mc_value": mc.value,
                "mc_stderr": mc.std_error,
            }
        )
        log.info("N=%d discrete=%.6f mc=%.6f +/- %.2g", n, disc.value, mc.value, mc.std_error)
    return rows


def density_rows(config: dict) -> list[dict]:
    market, terms, _ = _model(config, 1)
    p = MaxDistParams.from_market(market, terms.gamma, terms.maturity)
    n = int(config["h_points"])
    h_max = float(config["h_max"])
    if n < 1 or not h_max >= 0:
        raise ValidationError([FieldError("h_grid", "need h_points >= 1 and h_max >= 0")])
    grid = np.linspace(0.0, h_max, n)
    pdf, cdf = max_pdf(grid, p), max_cdf(grid, p)
    return [{"h": h, "pdf": f, "cdf": c} for h, f, c in zip(grid, pdf, cdf)]


def render_table(rows: list[dict], columns: Sequence[str], config: dict, fmt_name: Optional[str]) -> str:
    if fmt_name == "json":
        return json.dumps({"params": config, "rows": rows}, indent=2, sort_keys=True, default=float) + "\n"
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row[c]) for c in columns])
    return buf.getvalue()


def run(argv: Optional[Sequence[str]] = None) -> tuple[str, dict]:
    """Execute a command line and return ``(output, resolved_config)`` without writing."""
    args = build_parser().parse_args(argv)
    config = resolve(args)
    if args.command == "price":
        config["N"] = _single_n(config)
        config["format"] = config["format"] or "json"
        return cmd_price(config), config
    config["format"] = config["format"] or "csv"
    if args.command == "sweep":
        config["N"] = _parse_list(config["N"], int)
        rows = sweep_rows(config, config["N"])
        return render_table(rows, SWEEP_COLUMNS, config, config["format"]), config
    return render_table(density_rows(config), DENSITY_COLUMNS, config, config["format"]), config


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        output, config = run(argv)
        if config["out"]:
            with open(config["out"], "w") as f:
                f.write(output)
        else:
            sys.stdout.write(output)
    except (ValidationError, BudgetExceeded, UsageError) as exc:
        for e in getattr(exc, "errors", None) or [exc]:
            print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except ArithmeticError as exc:
        # NonConvergence, SingularParameterization, overflow
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK
