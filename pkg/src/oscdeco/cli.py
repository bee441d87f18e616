"""Command-line front end: ``oscdeco {simulate,sweep,grid,verify}``.

Exit codes: 0 success, 1 verification tolerance exceeded, 2 validation
failure, 3 I/O failure, 4 oracle truncation breach.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .decoherence import (
    classify_fluctuation_regime,
    decoherence_report,
    decoherence_time_thermal,
    delta_qd_from_sigma,
    delta_qd_infinity,
    relaxation_time,
)
from .density import CoordinateGrid, DensityMatrixGrid, evaluate_rho, steady_state_rho
from .evolution import IntegratorConfig, integrate, sigma_closed_form
from .fock import TruncationBreach, build_basis, integrate_oracle, project_initial_state
from .model import ConstraintError, initial_covariance, thermal_coefficients, validate_constraints

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_BREACH = 4

TRAJECTORY_COLUMNS = ("t", "mean_q", "mean_p", "var_q", "var_p", "cov_qp", "sigma", "sigma_closed_form", "delta_qd")
SWEEP_COLUMNS = ("value", "delta_qd_inf", "t_deco", "t_rel", "sigma_inf", "regime", "status")
GRID_COLUMNS = ("q", "q_prime", "re_rho", "im_rho")
VERIFY_COLUMNS = ("t", "sigma_gaussian", "sigma_oracle", "abs_diff")
SWEEP_AXES = ("coth_eps", "delta", "r", "lambda")


def fmt(v) -> str:
    if isinstance(v, str):
        return v
    v = float(v)
    if math.isnan(v):
        return ""
    return f"{v:.16e}"


def write_csv(path: Path, columns, rows, header_comment: bool = True) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if header_comment:
            stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
            fh.write(f"# oscdeco {__version__} generated {stamp}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def read_csv(path) -> list[dict[str, str]]:
    with open(path, encoding="utf-8", newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def read_rho_grid(path) -> DensityMatrixGrid:
    """Rebuild a density-matrix grid from an exported ``rho_grid.csv``."""
    rows = read_csv(path)
    q = np.array(sorted({float(r["q"]) for r in rows}))
    n = len(q)
    values = np.empty((n, n), dtype=complex)
    for k, r in enumerate(rows):
        i, j = divmod(k, n)
        values[i, j] = float(r["re_rho"]) + 1j * float(r["im_rho"])
    return DensityMatrixGrid(CoordinateGrid(float(q[0]), float(q[-1]), n), values, math.nan)


# --- commands ----------------------------------------------------------------


def _gate(cfg: RunConfig):
    params, bath = cfg.params(), cfg.bath()
    if not cfg.skip_validation:
        report = validate_constraints(params, bath)
        if not report.passed:
            raise ConstraintError(report)
    return params, bath


def run_simulate(cfg: RunConfig, out_dir: Path, header_comment: bool = True) -> dict[str, Path]:
    params, bath = _gate(cfg)
    validate = not cfg.skip_validation
    spec = cfg.spec()
    traj = integrate(spec, params, bath, cfg.integrator(), validate=validate)
    closed = sigma_closed_form(spec, params, bath, traj.times, validate=validate)
    sigma = traj.sigma
    dqd = delta_qd_from_sigma(sigma, params.hbar)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = (
        (t, *traj.moments[i], sigma[i], closed[i], dqd[i]) for i, t in enumerate(traj.times)
    )
    paths = {"trajectory": out_dir / "trajectory.csv", "report": out_dir / "report.txt"}
    write_csv(paths["trajectory"], TRAJECTORY_COLUMNS, rows, header_comment)

    lines = ["# constraint checks", validate_constraints(params, bath).format(), "", "# decoherence"]
    if validate:
        lines.append(decoherence_report(traj, spec).format())
    else:
        lines.append("closed-system test mode: timescales undefined\n")
    paths["report"].write_text("\n".join(lines), encoding="utf-8")
    return paths


def sweep_row(cfg: RunConfig, axis: str, value: float) -> tuple:
    try:
        if axis == "coth_eps":
            cfg = cfg.with_updates(coth_eps=value, temperature=None)
        elif axis == "lambda":
            cfg = cfg.with_updates(lam=value)
        else:
            cfg = cfg.with_updates(**{axis: value})
        params, bath = cfg.params(), cfg.bath()
        spec = cfg.spec()
        if not validate_constraints(params, bath).passed:
            raise ConstraintError(validate_constraints(params, bath))
    except ValueError:
        return (value, math.nan, math.nan, math.nan, math.nan, "", "constraint-violated")
    sigma_inf = params.hbar**2 * bath.coth_eps**2 / 4.0
    regime = classify_fluctuation_regime(params, bath, sigma_inf).label
    return (
        value,
        delta_qd_infinity(bath),
        decoherence_time_thermal(params, bath, spec),
        relaxation_time(params),
        sigma_inf,
        regime,
        "ok",
    )


def run_sweep(cfg: RunConfig, axis: str, values, out_dir: Path, header_comment: bool = True) -> Path:
    if axis not in SWEEP_AXES:
        raise ConfigError(f"sweep axis must be one of {SWEEP_AXES}, got {axis!r}")
    rows = [sweep_row(cfg, axis, float(v)) for v in values]
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "sweep.csv"
    write_csv(path, SWEEP_COLUMNS, rows, header_comment)
    return path


def state_at(cfg: RunConfig, t: float):
    """Gaussian state at time t, integrating with a step adjusted to land on t."""
    params, bath = _gate(cfg)
    spec = cfg.spec()
    if t == 0:
        return initial_covariance(spec, params)
    n = max(1, round(t / cfg.dt))
    icfg = IntegratorConfig(dt=t / n, t_end=t, sample_stride=n)
    return integrate(spec, params, bath, icfg, validate=not cfg.skip_validation)[-1]


def run_grid(cfg: RunConfig, time: str, out_dir: Path, header_comment: bool = True) -> Path:
    grid = cfg.grid()
    if time == "steady":
        params, bath = _gate(cfg)
        rho = steady_state_rho(params, bath, grid)
    else:
        try:
            t = float(time)
        except ValueError:
            raise ConfigError(f"--time must be a number or 'steady', got {time!r}") from None
        if not (math.isfinite(t) and t >= 0):
            raise ConfigError(f"--time must be >= 0, got {time!r}")
        rho = evaluate_rho(state_at(cfg, t), grid, cfg.hbar)
    q = grid.points
    n = len(q)
    rows = ((q[i], q[j], rho.values[i, j].real, rho.values[i, j].imag) for i in range(n) for j in range(n))
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "rho_grid.csv"
    write_csv(path, GRID_COLUMNS, rows, header_comment)
    return path


def run_verify(cfg: RunConfig, out_dir: Path, header_comment: bool = True):
    """Oracle vs closed form; returns (path, max_abs_diff, oracle run)."""
    if not cfg.oracle_enabled:
        raise ConfigError("verify needs oracle.enabled = true")
    params, bath = _gate(cfg)
    validate = not cfg.skip_validation
    spec = cfg.spec()
    coeffs = thermal_coefficients(params, bath, check=validate)
    basis = build_basis(params, cfg.oracle_n)
    rho0 = project_initial_state(spec, params, basis, cfg.oracle_initial_threshold)
    run = integrate_oracle(rho0, basis, params, coeffs, cfg.integrator(), cfg.oracle_breach_threshold)
    gauss = sigma_closed_form(spec, params, bath, run.times, validate=validate)
    diff = np.abs(gauss - run.sigma)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "verify.csv"
    rows = zip(run.times, gauss, run.sigma, diff)
    write_csv(path, VERIFY_COLUMNS, rows, header_comment)
    return path, float(diff.max()), run


# --- argument handling -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oscdeco", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, help="key = value config file (baseline if omitted)")
        p.add_argument("--out", type=Path, help="output directory (overrides output.dir)")
        p.add_argument("--no-header-comment", action="store_true", help="omit the timestamped CSV comment line")

    common(sub.add_parser("simulate", help="integrate moments and write trajectory.csv + report.txt"))
    p = sub.add_parser("sweep", help="asymptotic metrics over one parameter axis")
    common(p)
    p.add_argument("--axis", required=True, choices=SWEEP_AXES)
    p.add_argument("--values", required=True, help="comma-separated list of values")
    p = sub.add_parser("grid", help="export rho(q, q') on the configured grid")
    common(p)
    p.add_argument("--time", required=True, help="time value or 'steady'")
    common(sub.add_parser("verify", help="compare Gaussian sigma(t) with the Fock-basis oracle"))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        out_dir = args.out if args.out is not None else Path(cfg.output_dir)
        header = not args.no_header_comment
        if args.command == "simulate":
            paths = run_simulate(cfg, out_dir, header)
            print(paths["report"].read_text(encoding="utf-8"), end="")
        elif args.command == "sweep":
            try:
                values = [float(v) for v in args.values.split(",") if v.strip()]
            except ValueError:
                raise ConfigError(f"--values must be numbers, got {args.values!r}") from None
            print(run_sweep(cfg, args.axis, values, out_dir, header))
        elif args.command == "grid":
            print(run_grid(cfg, args.time, out_dir, header))
        elif args.command == "verify":
            path, max_diff, run = run_verify(cfg, out_dir, header)
            ok = max_diff <= cfg.oracle_tolerance
            print(f"max |sigma_gaussian - sigma_oracle| = {max_diff:.3e} (bound {cfg.oracle_tolerance:.1e})")
            print(f"trace drift = {run.trace_drift:.3e}; min eigenvalue = {run.min_eigenvalue:.3e}")
            print(f"{'PASS' if ok else 'FAIL'} -> {path}")
            return EXIT_OK if ok else EXIT_TOLERANCE
    except TruncationBreach as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BREACH
    except ConstraintError as exc:
        print("error: constraint validation failed", file=sys.stderr)
        for c in exc.report.checks:
            if not c.passed:
                print(f"  {c.describe()}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
