"""Command-line entry point ``carreau-film``.

Exit codes: 0 success, 1 solver non-convergence (or a failed verify
criterion), 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import output
from .config import dump_config, load_config
from .constitutive import FluidParams
from .errors import CarreauFilmError, ConfigError, NumericalError
from .mobility import mobility, profile_integral
from .reconstruction import cell_driving, divergence_check, filtration_velocity, reconstruct_velocity
from .reynolds import cell_net_outflow, residual_norm, solve_pressure
from .verify import VerifyHooks, run_all

EXIT_OK, EXIT_NOT_CONVERGED, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3


def _apply_overrides(cfg, args):
    solver = cfg.solver
    changes = {}
    if args.tol is not None:
        changes["picard_tol"] = args.tol
    if args.max_iters is not None:
        changes["max_iters"] = args.max_iters
    if changes:
        try:
            solver = dataclasses.replace(solver, **changes)
        except CarreauFilmError as exc:
            raise ConfigError("solver", str(exc)) from None
    outputs = cfg.outputs
    if args.out_dir is not None:
        outputs = dataclasses.replace(outputs, directory=str(Path(args.out_dir).resolve()))
    return dataclasses.replace(cfg, solver=solver, outputs=outputs)


def run_solve(cfg, echo=print):
    """Solve a case and write the requested artifacts; returns an exit code."""
    timings = {}
    t0 = time.perf_counter()
    grid = cfg.grid
    gap, forcing = cfg.build_fields()
    timings["setup"] = time.perf_counter() - t0

    pressure, report = solve_pressure(gap, forcing, cfg.fluid, grid, cfg.solver, cfg.quadrature)
    timings["solve"] = report.wall_time

    t1 = time.perf_counter()
    flux = filtration_velocity(pressure, gap, forcing, cfg.fluid, cfg.quadrature)
    velocity = None
    if cfg.outputs.vtk_velocity:
        velocity = reconstruct_velocity(pressure, gap, forcing, cfg.fluid, cfg.n3, cfg.quadrature)
    timings["reconstruct"] = time.perf_counter() - t1

    out = Path(cfg.outputs.directory)
    out.mkdir(parents=True, exist_ok=True)
    t2 = time.perf_counter()
    written = []
    if cfg.outputs.pressure_csv:
        output.write_pressure_csv(out / "pressure.csv", grid, gap, pressure)
        written.append("pressure.csv")
    if cfg.outputs.flux_csv:
        output.write_flux_csv(out / "flux.csv", grid, gap, pressure, flux)
        written.append("flux.csv")
    if cfg.outputs.vtk:
        output.write_vtk_fields(out / "fields.vtk", grid, gap, pressure, flux, title=cfg.name)
        written.append("fields.vtk")
    if velocity is not None:
        output.write_vtk_velocity(out / "velocity.vtk", grid, velocity, title=cfg.name)
        written.append("velocity.vtk")
    timings["write"] = time.perf_counter() - t2

    net = cell_net_outflow(flux.faces, grid)
    summary = {
        "name": cfg.name,
        "grid": [grid.nx, grid.ny],
        "solver": report.as_dict(),
        "divergence_residual": divergence_check(flux, grid),
        "residual_norm": residual_norm(pressure, gap, forcing, cfg.fluid, grid, cfg.quadrature),
        "global_net_outflow": float(net.sum()),
        "pressure_mean": pressure.mean(),
        "max_flux": float(np.abs(flux.horizontal).max()),
        "timings": timings,
        "artifacts": written,
    }
    code = EXIT_OK if report.converged else EXIT_NOT_CONVERGED
    summary["exit_code"] = code
    if cfg.outputs.report:
        output.write_report(out / "report.json", summary)
    echo(f"{cfg.name}: {report.message}; outputs in {out}")
    return code


def _cmd_solve(args):
    cfg = _apply_overrides(load_config(args.config), args)
    if args.dump_config:
        dump_config(cfg, args.dump_config)
    return run_solve(cfg)


def _cmd_verify(args):
    hooks = VerifyHooks(
        psi_tol=args.hook_psi_tol if args.hook_psi_tol is not None else 1e-12,
        psi_lam=args.hook_psi_lam,
    )
    numbers = [int(n) for n in args.only.split(",")] if args.only else None
    results = run_all(numbers, hooks, echo=print)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    if args.json:
        Path(args.json).write_text(json.dumps([dataclasses.asdict(r) for r in results], indent=2, default=str) + "\n")
    return EXIT_OK if passed == len(results) else EXIT_NOT_CONVERGED


def _values(lo, hi, n, log):
    if n == 1 or lo == hi:
        return np.array([float(lo)])
    if log:
        if not lo > 0:
            raise ConfigError("s_range", "logarithmic spacing needs a positive lower bound")
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


def dump_mobility_table(params, h_range, s_range, resolution, log_s=False, fh=None):
    """Write ``M(h, s)`` as CSV: one row per ``h``, one column per ``s``.

    A degenerate range (``min == max``) yields a single row or column.
    """
    if resolution < 1:
        raise ConfigError("resolution", "must be at least 1")
    h_lo, h_hi = h_range
    s_lo, s_hi = s_range
    if not 0 < h_lo <= h_hi:
        raise ConfigError("h_range", "need 0 < h_min <= h_max")
    if not 0 <= s_lo <= s_hi:
        raise ConfigError("s_range", "need 0 <= s_min <= s_max")
    h_vals = _values(h_lo, h_hi, resolution, False)
    s_vals = _values(s_lo, s_hi, resolution, log_s)
    hh, ss = np.meshgrid(h_vals, s_vals, indexing="ij")
    table = np.asarray(mobility(hh, ss, params)).reshape(hh.shape)
    output.write_mobility_table(fh or sys.stdout, params, h_vals, s_vals, table)
    return h_vals, s_vals, table


def _cmd_table(args):
    try:
        params = FluidParams(args.eta0, args.lam, args.r, args.eta_inf)
    except CarreauFilmError as exc:
        raise ConfigError("fluid", str(exc)) from None
    if args.output:
        with open(args.output, "w") as fh:
            dump_mobility_table(params, args.h_range, args.s_range, args.resolution, args.log_s, fh)
    else:
        dump_mobility_table(params, args.h_range, args.s_range, args.resolution, args.log_s)
    return EXIT_OK


def _cmd_profile(args):
    cfg = _apply_overrides(load_config(args.config), args)
    try:
        x, y = (float(v) for v in args.at.split(","))
    except ValueError:
        raise ConfigError("--at", f"expected 'x,y', got {args.at!r}") from None
    grid = cfg.grid
    if not (0 <= x <= grid.lx and 0 <= y <= grid.ly):
        raise ConfigError("--at", f"point ({x}, {y}) lies outside the domain")
    gap, forcing = cfg.build_fields()
    pressure, report = solve_pressure(gap, forcing, cfg.fluid, grid, cfg.solver, cfg.quadrature)
    n3 = args.n3 or cfg.n3
    if n3 < 3:
        raise ConfigError("--n3", "need at least 3 depth samples")
    i = min(int(x / grid.dx), grid.nx - 1)
    j = min(int(y / grid.dy), grid.ny - 1)
    g = cell_driving(pressure, forcing, grid)[i, j]
    h = gap.cell[i, j]
    y3 = h * np.linspace(0.0, 1.0, n3)
    y3[-1] = h
    u = np.outer(np.atleast_1d(profile_integral(h, y3, float(np.hypot(*g)), cfg.fluid, cfg.quadrature)), g) + 0.0
    lines = [f"# cell ({i}, {j}) center ({grid.x_centers[i]:.17g}, {grid.y_centers[j]:.17g}) "
             f"h={gap.cell[i, j]:.17g} converged={report.converged}", "y3,ux,uy"]
    for k in range(n3):
        lines.append(f"{y3[k]:.17g},{u[k, 0]:.17g},{u[k, 1]:.17g}")
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def _add_overrides(p):
    p.add_argument("--tol", type=float, help="override solver.picard_tol")
    p.add_argument("--max-iters", type=int, help="override solver.max_iters")
    p.add_argument("--out-dir", help="override outputs.directory")


def build_parser():
    parser = argparse.ArgumentParser(prog="carreau-film", description="Thin-film Carreau flow solver")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a case file and write outputs")
    p.add_argument("config")
    _add_overrides(p)
    p.add_argument("--dump-config", metavar="PATH", help="write the resolved configuration as JSON")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("verify", help="run the acceptance checks")
    p.add_argument("--only", help="comma-separated criterion numbers")
    p.add_argument("--json", metavar="PATH", help="also write results as JSON")
    p.add_argument("--hook-psi-tol", type=float, help=argparse.SUPPRESS)
    p.add_argument("--hook-psi-lam", type=float, help=argparse.SUPPRESS)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("mobility-table", help="tabulate M(h, s) as CSV")
    p.add_argument("--eta0", type=float, required=True)
    p.add_argument("--lam", type=float, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--eta-inf", type=float, default=0.0)
    p.add_argument("--h-range", type=float, nargs=2, default=(0.5, 2.0), metavar=("MIN", "MAX"))
    p.add_argument("--s-range", type=float, nargs=2, default=(0.0, 10.0), metavar=("MIN", "MAX"))
    p.add_argument("--resolution", type=int, default=8)
    p.add_argument("--log-s", action="store_true", help="geometric spacing in s")
    p.add_argument("--output", help="CSV path (default stdout)")
    p.set_defaults(func=_cmd_table)

    p = sub.add_parser("profile", help="print the velocity profile at one point")
    p.add_argument("config")
    p.add_argument("--at", required=True, metavar="X,Y")
    p.add_argument("--n3", type=int)
    p.add_argument("--output")
    _add_overrides(p)
    p.set_defaults(func=_cmd_profile)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except CarreauFilmError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
