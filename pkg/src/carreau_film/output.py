"""CSV, legacy ASCII VTK and JSON report writers.

Floats are written with 17 significant digits so values round-trip
bit-exactly; output is deterministic for identical inputs.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

FLOAT_FMT = "%.17g"


def _fmt(v):
    return FLOAT_FMT % v


def write_csv(path, header, columns):
    """Write equal-length columns to ``path`` with a single header row."""
    cols = [np.asarray(c, dtype=float).ravel() for c in columns]
    table = np.column_stack(cols)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\r\n")
        np.savetxt(fh, table, fmt=FLOAT_FMT, delimiter=",", newline="\r\n")


def _cell_columns(grid, gap, pressure):
    x, y = grid.cell_coords()
    return [x, y, gap.cell, pressure.values]


def write_pressure_csv(path, grid, gap, pressure):
    write_csv(path, ["x", "y", "h", "p"], _cell_columns(grid, gap, pressure))


def write_flux_csv(path, grid, gap, pressure, flux):
    cols = _cell_columns(grid, gap, pressure) + [flux.cell[..., 0], flux.cell[..., 1]]
    write_csv(path, ["x", "y", "h", "p", "Vx", "Vy"], cols)


def _vtk_values(fh, arr, per_line=3):
    # callers pass data already ordered with x varying fastest
    rows = np.asarray(arr, dtype=float).reshape(-1, per_line)
    fh.write("\n".join(" ".join(_fmt(v) for v in row) for row in rows) + "\n")


def write_vtk_fields(path, grid, gap, pressure, flux, title="carreau film fields"):
    """STRUCTURED_POINTS file with ``h``, ``p`` and ``V`` as cell data."""
    nx, ny = grid.shape
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(title[:255] + "\n")
        fh.write("ASCII\nDATASET STRUCTURED_POINTS\n")
        fh.write(f"DIMENSIONS {nx + 1} {ny + 1} 1\n")
        fh.write("ORIGIN 0 0 0\n")
        fh.write(f"SPACING {_fmt(grid.dx)} {_fmt(grid.dy)} 1\n")
        fh.write(f"CELL_DATA {nx * ny}\n")
        for name, arr in (("h", gap.cell), ("p", pressure.values)):
            fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            _vtk_values(fh, arr.T.ravel(), per_line=1)
        vec = np.zeros((ny, nx, 3))
        vec[..., :2] = np.transpose(flux.cell[..., :2], (1, 0, 2))
        fh.write("VECTORS V double\n")
        _vtk_values(fh, vec.reshape(-1, 3))


def write_vtk_velocity(path, grid, velocity, title="carreau film velocity"):
    """STRUCTURED_GRID of the depth samples with the velocity as point data.

    Point ``(i, j, k)`` sits at ``(x_i, y_j, y3_k(i, j))``, so each vertical
    column follows the local film thickness.
    """
    nx, ny = grid.shape
    n3 = velocity.n3
    x, y = grid.cell_coords()
    # order (k, j, i) so that i varies fastest
    xs = np.broadcast_to(x.T[None], (n3, ny, nx))
    ys = np.broadcast_to(y.T[None], (n3, ny, nx))
    zs = np.transpose(velocity.y3, (2, 1, 0))
    uu = np.transpose(velocity.u, (2, 1, 0, 3))
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(title[:255] + "\n")
        fh.write("ASCII\nDATASET STRUCTURED_GRID\n")
        fh.write(f"DIMENSIONS {nx} {ny} {n3}\n")
        fh.write(f"POINTS {nx * ny * n3} double\n")
        _vtk_values(fh, np.stack([xs, ys, zs], axis=-1).reshape(-1, 3))
        fh.write(f"POINT_DATA {nx * ny * n3}\n")
        fh.write("VECTORS u double\n")
        _vtk_values(fh, uu.reshape(-1, 3))


def write_report(path, report: dict):
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=True, default=float) + "\n")


def write_mobility_table(fh, params, h_values, s_values, table):
    """Rows are thickness values, columns driving magnitudes.

    The first line is a comment naming the fluid parameters.
    """
    fh.write(
        f"# mobility M(h,s) eta0={_fmt(params.eta0)} lam={_fmt(params.lam)} "
        f"r={_fmt(params.r)} eta_inf={_fmt(params.eta_inf)}\n"
    )
    fh.write("h\\s," + ",".join(_fmt(s) for s in s_values) + "\n")
    for h, row in zip(h_values, table):
        fh.write(_fmt(h) + "," + ",".join(_fmt(v) for v in row) + "\n")
