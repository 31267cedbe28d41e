"""Rectangular cell-centered grid and the fields living on it.

Arrays use ``(nx, ny)`` "ij" layout: the first index runs along ``x``.
x-faces have shape ``(nx + 1, ny)`` and y-faces ``(nx, ny + 1)``; the first
and last faces along each direction lie on the domain boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError

# Gauss nodes used for face line averages of analytic forcing
_LINE_NODES, _LINE_WEIGHTS = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class Grid2D:
    lx: float
    ly: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.lx > 0.0 and self.ly > 0.0):
            raise InvalidParameterError(f"domain lengths must be positive, got {self.lx}, {self.ly}")
        if int(self.nx) != self.nx or int(self.ny) != self.ny or self.nx < 2 or self.ny < 2:
            raise InvalidParameterError(f"need integer nx, ny >= 2, got {self.nx}, {self.ny}")
        object.__setattr__(self, "nx", int(self.nx))
        object.__setattr__(self, "ny", int(self.ny))
        object.__setattr__(self, "lx", float(self.lx))
        object.__setattr__(self, "ly", float(self.ly))

    @property
    def shape(self):
        return (self.nx, self.ny)

    @property
    def dx(self):
        return self.lx / self.nx

    @property
    def dy(self):
        return self.ly / self.ny

    @property
    def x_centers(self):
        return (np.arange(self.nx) + 0.5) * self.dx

    @property
    def y_centers(self):
        return (np.arange(self.ny) + 0.5) * self.dy

    @property
    def x_faces(self):
        return np.arange(self.nx + 1) * self.dx

    @property
    def y_faces(self):
        return np.arange(self.ny + 1) * self.dy

    def cell_coords(self):
        return np.meshgrid(self.x_centers, self.y_centers, indexing="ij")

    def xface_coords(self):
        return np.meshgrid(self.x_faces, self.y_centers, indexing="ij")

    def yface_coords(self):
        return np.meshgrid(self.x_centers, self.y_faces, indexing="ij")

    def check_cells(self, arr, name="field"):
        arr = np.asarray(arr, dtype=float)
        if arr.shape != self.shape:
            raise InvalidParameterError(f"{name} has shape {arr.shape}, grid expects {self.shape}")
        return arr


def _faces_from_cells(cells):
    """Arithmetic face means; boundary faces copy the adjacent cell."""
    xf = np.empty((cells.shape[0] + 1, cells.shape[1]))
    xf[1:-1] = 0.5 * (cells[1:] + cells[:-1])
    xf[0], xf[-1] = cells[0], cells[-1]
    yf = np.empty((cells.shape[0], cells.shape[1] + 1))
    yf[:, 1:-1] = 0.5 * (cells[:, 1:] + cells[:, :-1])
    yf[:, 0], yf[:, -1] = cells[:, 0], cells[:, -1]
    return xf, yf


def _evaluate(func, x, y):
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    return np.broadcast_to(np.asarray(func(x, y), dtype=float), x.shape).copy()


@dataclass(frozen=True)
class GapField:
    """Film thickness at cell centers and faces."""

    cell: np.ndarray
    xface: np.ndarray
    yface: np.ndarray
    provenance: str = "table"

    def __post_init__(self):
        for name in ("cell", "xface", "yface"):
            arr = getattr(self, name)
            if not np.all(np.isfinite(arr)) or not np.all(arr > 0.0):
                raise InvalidParameterError(
                    f"thickness must satisfy 0 < h_min <= h everywhere; {name} has "
                    f"min {np.min(arr):g}"
                )

    @classmethod
    def from_function(cls, func, grid: Grid2D, provenance="analytic"):
        """Evaluate ``func(x, y)`` at cell centers and at faces."""
        return cls(
            _evaluate(func, *grid.cell_coords()),
            _evaluate(func, *grid.xface_coords()),
            _evaluate(func, *grid.yface_coords()),
            provenance,
        )

    @classmethod
    def from_cells(cls, values, grid: Grid2D, provenance="table"):
        cells = grid.check_cells(values, "gap table").copy()
        if not np.all(np.isfinite(cells)) or not np.all(cells > 0.0):
            raise InvalidParameterError(
                f"thickness must satisfy 0 < h_min <= h everywhere; table min is {np.min(cells):g}"
            )
        return cls(cells, *_faces_from_cells(cells), provenance)

    @classmethod
    def constant(cls, h, grid: Grid2D):
        return cls.from_function(lambda x, y: np.full_like(x, float(h)), grid, f"constant {h}")

    @property
    def h_min(self):
        return float(min(self.cell.min(), self.xface.min(), self.yface.min()))

    @property
    def h_max(self):
        return float(max(self.cell.max(), self.xface.max(), self.yface.max()))


@dataclass(frozen=True)
class ForcingField:
    """Horizontal body force.

    ``fx``, ``fy`` are cell-center values.  ``fx_face`` (on x-faces) and
    ``fy_face`` (on y-faces) are the face-normal components used by the flux
    scheme.  For analytic forcing they are averages along the segment joining
    the two adjacent cell centers, so a gradient ``f' = grad(phi)`` yields
    exactly the two-point difference of ``phi``.
    """

    fx: np.ndarray
    fy: np.ndarray
    fx_face: np.ndarray
    fy_face: np.ndarray
    provenance: str = "table"

    def __post_init__(self):
        for name in ("fx", "fy", "fx_face", "fy_face"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise InvalidParameterError(f"forcing component {name} must be finite everywhere")

    @classmethod
    def from_function(cls, fx_func, fy_func, grid: Grid2D, provenance="analytic"):
        xc, yc = grid.cell_coords()
        fx = _evaluate(fx_func, xc, yc)
        fy = _evaluate(fy_func, xc, yc)
        t = 0.5 * (_LINE_NODES + 1.0)
        w = 0.5 * _LINE_WEIGHTS

        xf, yx = grid.xface_coords()
        fx_face = _evaluate(fx_func, xf, yx)
        xs = grid.x_centers
        seg = xs[:-1, None] + np.outer(np.diff(xs), t)  # (nx-1, nodes)
        vals = _evaluate(fx_func, seg[:, None, :], grid.y_centers[None, :, None])
        fx_face[1:-1] = vals @ w

        xy, yf = grid.yface_coords()
        fy_face = _evaluate(fy_func, xy, yf)
        ys = grid.y_centers
        seg = ys[:-1, None] + np.outer(np.diff(ys), t)
        vals = _evaluate(fy_func, grid.x_centers[:, None, None], seg[None, :, :])
        fy_face[:, 1:-1] = vals @ w
        return cls(fx, fy, fx_face, fy_face, provenance)

    @classmethod
    def from_cells(cls, fx, fy, grid: Grid2D, provenance="table"):
        fx = grid.check_cells(fx, "fx table").copy()
        fy = grid.check_cells(fy, "fy table").copy()
        return cls(fx, fy, _faces_from_cells(fx)[0], _faces_from_cells(fy)[1], provenance)

    @classmethod
    def constant(cls, a, b, grid: Grid2D):
        return cls.from_function(
            lambda x, y: np.full_like(x, float(a)), lambda x, y: np.full_like(x, float(b)), grid,
            f"constant ({a}, {b})",
        )

    @classmethod
    def zero(cls, grid: Grid2D):
        return cls.constant(0.0, 0.0, grid)

    @property
    def scale(self):
        return float(max(np.abs(self.fx_face).max(), np.abs(self.fy_face).max()))


@dataclass
class PressureField:
    values: np.ndarray
    grid: Grid2D = field(repr=False)

    def __post_init__(self):
        self.values = self.grid.check_cells(self.values, "pressure")

    @classmethod
    def zeros(cls, grid: Grid2D):
        return cls(np.zeros(grid.shape), grid)

    @classmethod
    def from_function(cls, func, grid: Grid2D):
        return cls(_evaluate(func, *grid.cell_coords()), grid)

    def mean(self):
        # uniform cells: area weighting reduces to the plain mean
        return float(self.values.mean())

    def zero_mean(self):
        return PressureField(self.values - self.values.mean(), self.grid)
