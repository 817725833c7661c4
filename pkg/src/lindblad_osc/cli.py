"""``lindblad-osc`` command line: validate | series | grid | timescales.

Exit codes: 0 ok, 1 a physical constraint fails, 2 usage or config error.
CSV output uses LF line endings and 17 significant digits so identical
configurations give byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Sequence, TextIO

from .config import PRESETS, ConfigError, RunConfig, dump_config, parse_config
from .core import (
    ConstraintCheck,
    LindbladError,
    Scenario,
    check_fundamental_constraints,
    check_initial_positivity,
    check_positivity_functional,
    check_thermal_validity,
    initial_covariance,
    thermal_diffusion,
)
from .dynamics import propagate_exact_many
from .regimes import (
    CLASSICAL_COTH,
    EQUILIBRIUM_FACTOR,
    classify_regime,
    decoherence_time_high_temperature,
    decoherence_time_zero_temperature,
    timescales,
)
from .uncertainty import heisenberg_closed_form, heisenberg_uncertainty, schrodinger_closed_form, uncertainty_of_state

EXIT_OK, EXIT_CONSTRAINT, EXIT_USAGE = 0, 1, 2
THREADS_ENV = "LINDBLAD_OSC_THREADS"

SERIES_COLUMNS = (
    "t",
    "sigma_qq",
    "sigma_pp",
    "sigma_pq",
    "U_exact",
    "sigma_exact",
    "U_closed",
    "sigma_closed",
    "r_t",
    "regime",
)
GRID_COLUMNS = ("t", "axis_value", "U", "sigma")

# flag name -> config key
_FLAG_KEYS = {
    "omega": "omega",
    "lambda": "lambda",
    "mu": "mu",
    "delta": "delta",
    "r": "r",
    "coth_eps": "coth_eps",
    "T": "T",
    "tau": "tau",
    "hbar": "hbar",
    "m": "m",
    "k": "k",
    "t_start": "t_start",
    "t_end": "t_end",
    "n_points": "n_points",
    "sweep": "sweep",
    "sweep_min": "sweep_min",
    "sweep_max": "sweep_max",
    "sweep_n": "sweep_n",
}


def fmt(x: float | None) -> str:
    if x is None:
        return ""
    return format(x, ".17g")


def _writer(stream: TextIO) -> "csv._writer":
    return csv.writer(stream, lineterminator="\n")


# validate


def validity_checks(cfg: RunConfig) -> list[ConstraintCheck]:
    """Every constraint of the model for ``cfg``, with margins."""
    try:
        params = cfg.params()
        bath = cfg.bath(params)
        initial = cfg.initial()
    except LindbladError as exc:
        return [ConstraintCheck("parameter domain", False, math.nan, str(exc))]

    checks = [ConstraintCheck("underdamped: omega > |mu|", True, params.omega - abs(params.mu))]
    checks += list(check_thermal_validity(params, bath))
    if params.zero_coupling:
        return checks

    d = thermal_diffusion(params, bath, check=False)
    checks += list(check_fundamental_constraints(d, params.lam, params.hbar))
    x0 = initial_covariance(initial, params)
    checks += list(check_positivity_functional(x0, d, params.lam, params.hbar, params, bath))
    checks.append(check_initial_positivity(params, bath, initial))
    return checks


def cmd_validate(cfg: RunConfig, out: TextIO) -> int:
    checks = validity_checks(cfg)
    for c in checks:
        out.write(f"{c}\n")
    ok = all(c.passed for c in checks)
    out.write("all constraints satisfied\n" if ok else f"{sum(not c.passed for c in checks)} constraint(s) violated\n")
    return EXIT_OK if ok else EXIT_CONSTRAINT


# series


def series_rows(s: Scenario, times: Sequence[float]) -> list[list[str]]:
    hbar = s.params.hbar
    states = propagate_exact_many(s.x0, s.params, s.diffusion, times)
    rows = []
    for t, x in zip(times, states):
        point = uncertainty_of_state(x, hbar, t)
        U_closed = heisenberg_closed_form(s, t) if s.initial.r == 0.0 else None
        rows.append(
            [
                fmt(t),
                fmt(x.sigma_qq),
                fmt(x.sigma_pp),
                fmt(x.sigma_pq),
                fmt(point.U),
                fmt(point.sigma),
                fmt(U_closed),
                fmt(schrodinger_closed_form(s, t)),
                fmt(point.r_t),
                classify_regime(s, t).name,
            ]
        )
    return rows


def cmd_series(cfg: RunConfig, out: TextIO) -> int:
    s = cfg.scenario()
    w = _writer(out)
    w.writerow(SERIES_COLUMNS)
    w.writerows(series_rows(s, cfg.times()))
    return EXIT_OK


# grid


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(THREADS_ENV, f"could not parse {raw!r} as an integer") from None
    if n < 0:
        raise ConfigError(THREADS_ENV, "must be >= 0")
    return n or (os.cpu_count() or 1)


def grid_scenarios(cfg: RunConfig) -> list[tuple[float, Scenario | None]]:
    """Scenario for every sweep value; None where the point is not a valid scenario."""
    out = []
    for v in cfg.axis_values():
        try:
            out.append((v, cfg.with_axis(v).scenario()))
        except LindbladError:
            out.append((v, None))
    return out


def _grid_row_block(t: float, cells: list[tuple[float, Scenario | None]]) -> list[list[str]]:
    rows = []
    for v, s in cells:
        if s is None:
            rows.append([fmt(t), fmt(v), "nan", "nan"])
        else:
            rows.append([fmt(t), fmt(v), fmt(heisenberg_uncertainty(s, t)), fmt(schrodinger_closed_form(s, t))])
    return rows


def cmd_grid(cfg: RunConfig, out: TextIO, threads: int | None = None) -> int:
    cells = grid_scenarios(cfg)
    times = cfg.times()
    n_threads = _thread_count() if threads is None else threads
    w = _writer(out)
    w.writerow(GRID_COLUMNS)
    block: Callable[[float], list[list[str]]] = lambda t: _grid_row_block(t, cells)
    if n_threads <= 1:
        for t in times:
            w.writerows(block(t))
    else:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            for rows in pool.map(block, times):
                w.writerows(rows)
    invalid = sum(s is None for _, s in cells) * len(times)
    out.write(f"# invalid_points={invalid}\n")
    if invalid:
        print(
            f"warning: {invalid} grid points violate the model constraints and were written as nan",
            file=sys.stderr,
        )
    return EXIT_OK


# timescales


def cmd_timescales(cfg: RunConfig, out: TextIO) -> int:
    s = cfg.scenario()
    ts = timescales(s)
    out.write(f"t_d = {ts.t_d:.10g}  ({ts.t_d_kind})\n")
    out.write(f"t_rel = {ts.t_rel:.10g}\n")
    out.write(f"t_d/t_rel = {ts.ratio:.10g}\n")
    tau = cfg.reduced_temperature()
    if tau > 0:
        t_hi = decoherence_time_high_temperature(s.params, s.initial, tau)
        out.write(f"t_d_high_temperature = {t_hi:.10g}  (tau = {tau:.10g})\n")
    if s.params.mu == 0.0:
        t_zero = decoherence_time_zero_temperature(s.params, s.initial)
        out.write(f"t_d_zero_temperature = {t_zero:.10g}  (quantum-fluctuation growth time)\n")
    eq = EQUILIBRIUM_FACTOR * ts.t_rel
    final = "ClassicalMB" if s.bath.coth_eps >= CLASSICAL_COTH else "QuantumStatisticalEquilibrium"
    out.write(f"regime boundaries (equilibrium after {EQUILIBRIUM_FACTOR:g} t_rel, classical from coth_eps {CLASSICAL_COTH:g}):\n")
    out.write(f"  QuantumDominated: t < {ts.t_d:.10g}\n")
    if ts.t_d < eq:
        out.write(f"  ThermalNonEquilibrium: {ts.t_d:.10g} <= t < {eq:.10g}\n")
    if math.isfinite(max(eq, ts.t_d)):
        out.write(f"  {final}: t >= {max(eq, ts.t_d):.10g}\n")
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "series": cmd_series,
    "grid": cmd_grid,
    "timescales": cmd_timescales,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key=value configuration file")
    common.add_argument("--preset", choices=sorted(PRESETS), help="start from a named parameter set")
    common.add_argument("--out", metavar="PATH", help="output file (default stdout)")
    common.add_argument("--dump-config", action="store_true", help="print the resolved configuration and exit")
    for flag, key in _FLAG_KEYS.items():
        common.add_argument("--" + flag.replace("_", "-"), dest=flag, metavar="VALUE", help=f"override {key}")

    parser = argparse.ArgumentParser(
        prog="lindblad-osc",
        description="Uncertainty functions of the damped quantum oscillator in the Lindblad theory.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check every constraint and print margins")
    sub.add_parser("series", parents=[common], help="time series CSV of covariances and uncertainties")
    sub.add_parser("grid", parents=[common], help="long-format CSV over time and one swept parameter")
    sub.add_parser("timescales", parents=[common], help="decoherence and relaxation times")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = PRESETS[args.preset] if args.preset else RunConfig()
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError("config", f"cannot read {args.config}: {exc.strerror}") from None
        cfg = parse_config(text, cfg)
    overrides = [(key, getattr(args, flag)) for flag, key in _FLAG_KEYS.items() if getattr(args, flag) is not None]
    cfg = cfg.update(overrides)
    if args.out is not None:
        cfg = cfg.set("out", args.out)
    return cfg.validate()


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    buf = io.StringIO()
    if args.dump_config:
        buf.write(dump_config(cfg))
        code = EXIT_OK
    else:
        if args.command in ("series", "grid", "timescales"):
            checks = validity_checks(cfg)
            if not all(c.passed for c in checks):
                for c in checks:
                    if not c.passed:
                        print(c, file=sys.stderr)
                print("error: scenario violates the model constraints (run 'validate')", file=sys.stderr)
                if args.command != "grid":
                    return EXIT_CONSTRAINT
        try:
            code = COMMANDS[args.command](cfg, buf)
        except ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        except LindbladError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONSTRAINT

    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return code


if __name__ == "__main__":
    raise SystemExit(main())
