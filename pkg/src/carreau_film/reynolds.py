"""Finite-volume solver for the nonlinear Reynolds problem.

Find a zero-mean pressure ``p`` on a rectangle such that the flux
``V = g M(h, |g|)`` with ``g = 2 (f' - grad p)`` is divergence-free and has
zero normal component on the boundary.

Unknowns live at cell centers.  The face-normal part of ``g`` uses two-point
pressure differences; the tangential part at a face is the mean of the four
neighbouring face-normal values of the other family.  Boundary faces carry
``g_n = 0`` so they transmit no flux.  The nonlinearity is handled by damped
Picard iteration: freeze the face mobilities, solve the linear diffusion
problem with preconditioned CG, relax.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as spla

from .constitutive import FluidParams
from .errors import InvalidParameterError, SingularSystemError
from .fields import ForcingField, GapField, Grid2D, PressureField
from .mobility import DEFAULT_QUAD, mobility
from .quadrature import QuadratureSpec


@dataclass(frozen=True)
class SolverConfig:
    picard_tol: float = 1e-8
    max_iters: int = 200
    relaxation: float = 0.7
    linear_tol: float = 1e-10

    def __post_init__(self):
        if not self.picard_tol > 0.0:
            raise InvalidParameterError(f"picard_tol must be positive, got {self.picard_tol}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise InvalidParameterError(f"max_iters must be an integer >= 1, got {self.max_iters}")
        if not 0.0 < self.relaxation <= 1.0:
            raise InvalidParameterError(f"relaxation must lie in (0, 1], got {self.relaxation}")
        if not self.linear_tol > 0.0:
            raise InvalidParameterError(f"linear_tol must be positive, got {self.linear_tol}")


@dataclass
class SolverReport:
    iterations: int = 0
    residual_history: list = field(default_factory=list)
    update_history: list = field(default_factory=list)
    converged: bool = False
    wall_time: float = 0.0
    final_residual: float = float("nan")
    message: str = ""

    def as_dict(self):
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "final_residual": self.final_residual,
            "residual_history": list(self.residual_history),
            "update_history": list(self.update_history),
            "wall_time": self.wall_time,
            "message": self.message,
        }


@dataclass(frozen=True)
class FaceDriving:
    """Driving field ``g`` sampled on faces.

    ``x_normal``/``x_tangential`` live on x-faces ``(nx + 1, ny)`` and hold the
    x and y components there; ``y_normal``/``y_tangential`` live on y-faces
    ``(nx, ny + 1)`` and hold the y and x components.
    """

    x_normal: np.ndarray
    x_tangential: np.ndarray
    y_normal: np.ndarray
    y_tangential: np.ndarray

    @property
    def x_magnitude(self):
        return np.hypot(self.x_normal, self.x_tangential)

    @property
    def y_magnitude(self):
        return np.hypot(self.y_normal, self.y_tangential)


@dataclass(frozen=True)
class FaceFlux:
    """Normal flux per unit face length; boundary entries are exactly zero."""

    x: np.ndarray
    y: np.ndarray
    x_mobility: np.ndarray = field(repr=False, default=None)
    y_mobility: np.ndarray = field(repr=False, default=None)

    @property
    def scale(self):
        return float(max(np.abs(self.x).max(), np.abs(self.y).max()))


def _pressure_values(p, grid):
    if isinstance(p, PressureField):
        if p.grid.shape != grid.shape:
            raise InvalidParameterError("pressure field does not conform to the grid")
        return p.values
    return grid.check_cells(p, "pressure")


def _check_forcing(f: ForcingField, grid: Grid2D):
    nx, ny = grid.shape
    if f.fx_face.shape != (nx + 1, ny) or f.fy_face.shape != (nx, ny + 1):
        raise InvalidParameterError("forcing field does not conform to the grid")


def _check_gap(gap: GapField, grid: Grid2D):
    nx, ny = grid.shape
    if gap.xface.shape != (nx + 1, ny) or gap.yface.shape != (nx, ny + 1):
        raise InvalidParameterError("gap field does not conform to the grid")


def driving_field(p, f: ForcingField, grid: Grid2D) -> FaceDriving:
    """Face samples of ``g = 2 (f' - grad p)``; boundary normals are zero."""
    pv = _pressure_values(p, grid)
    _check_forcing(f, grid)
    nx, ny = grid.shape
    gx = np.zeros((nx + 1, ny))
    gx[1:-1] = 2.0 * (f.fx_face[1:-1] - np.diff(pv, axis=0) / grid.dx)
    gy = np.zeros((nx, ny + 1))
    gy[:, 1:-1] = 2.0 * (f.fy_face[:, 1:-1] - np.diff(pv, axis=1) / grid.dy)
    return FaceDriving(gx, _face_tangential_x(gy), gy, _face_tangential_y(gx))


def _face_tangential_x(gy):
    """Mean of the four y-face values around each interior x-face."""
    nx = gy.shape[0]
    tx = np.zeros((nx + 1, gy.shape[1] - 1))
    tx[1:-1] = 0.25 * (gy[:-1, :-1] + gy[:-1, 1:] + gy[1:, :-1] + gy[1:, 1:])
    return tx


def _face_tangential_y(gx):
    """Mean of the four x-face values around each interior y-face."""
    ny = gx.shape[1]
    ty = np.zeros((gx.shape[0] - 1, ny + 1))
    ty[:, 1:-1] = 0.25 * (gx[:-1, :-1] + gx[1:, :-1] + gx[:-1, 1:] + gx[1:, 1:])
    return ty


def face_flux(g: FaceDriving, gap: GapField, params: FluidParams,
              quad: QuadratureSpec = DEFAULT_QUAD) -> FaceFlux:
    """Normal flux ``g_n M(h_face, |g_face|)`` on every face."""
    if gap.xface.shape != g.x_normal.shape or gap.yface.shape != g.y_normal.shape:
        raise InvalidParameterError("gap field does not conform to the driving field")
    mx = np.zeros_like(g.x_normal)
    my = np.zeros_like(g.y_normal)
    mx[1:-1] = mobility(gap.xface[1:-1], g.x_magnitude[1:-1], params, quad)
    my[:, 1:-1] = mobility(gap.yface[:, 1:-1], g.y_magnitude[:, 1:-1], params, quad)
    return FaceFlux(g.x_normal * mx, g.y_normal * my, mx, my)


def cell_net_outflow(flux: FaceFlux, grid: Grid2D):
    """Net outward flux of each cell (flux times face length, summed)."""
    return (np.diff(flux.x, axis=0) * grid.dy) + (np.diff(flux.y, axis=1) * grid.dx)


def _normalized_residual(flux: FaceFlux, grid: Grid2D, reference):
    net = np.abs(cell_net_outflow(flux, grid)).max()
    scale = max(
        np.abs(flux.x).max() * grid.dy, np.abs(flux.y).max() * grid.dx, reference
    )
    return 0.0 if scale == 0.0 else float(net / scale)


def _naive_scale(gap, forcing, params, grid, quad):
    """Largest face flux (times length) produced by the forcing alone."""
    flux = face_flux(driving_field(np.zeros(grid.shape), forcing, grid), gap, params, quad)
    return max(np.abs(flux.x).max() * grid.dy, np.abs(flux.y).max() * grid.dx)


def residual_norm(p, gap: GapField, forcing: ForcingField, params: FluidParams, grid: Grid2D,
                  quad: QuadratureSpec = DEFAULT_QUAD):
    """Max cell net outflow, normalized by the largest face flux.

    The normalization is the larger of the flux at ``p`` and the flux the
    forcing would drive at ``p = 0``, so it stays meaningful when the
    converged flux vanishes.
    """
    _check_gap(gap, grid)
    flux = face_flux(driving_field(p, forcing, grid), gap, params, quad)
    return _normalized_residual(flux, grid, _naive_scale(gap, forcing, params, grid, quad))


class _Assembler:
    """Sparse graph-Laplacian assembly for frozen face conductances."""

    def __init__(self, grid: Grid2D):
        nx, ny = grid.shape
        self.grid = grid
        idx = np.arange(nx * ny).reshape(nx, ny)
        self.xl, self.xr = idx[:-1].ravel(), idx[1:].ravel()
        self.yl, self.yr = idx[:, :-1].ravel(), idx[:, 1:].ravel()
        self.rows = np.concatenate([self.xl, self.xr, self.yl, self.yr])
        self.cols = np.concatenate([self.xr, self.xl, self.yr, self.yl])
        self.n = nx * ny

    def matrix(self, cx, cy):
        """``cx``, ``cy``: conductances on interior faces (flattened)."""
        off = -np.concatenate([cx, cx, cy, cy])
        diag = np.zeros(self.n)
        np.add.at(diag, self.xl, cx)
        np.add.at(diag, self.xr, cx)
        np.add.at(diag, self.yl, cy)
        np.add.at(diag, self.yr, cy)
        rows = np.concatenate([self.rows, np.arange(self.n)])
        cols = np.concatenate([self.cols, np.arange(self.n)])
        mat = sparse.csr_matrix((np.concatenate([off, diag]), (rows, cols)), shape=(self.n, self.n))
        return mat, diag


def assemble_diffusion(wx, wy, fx_face, fy_face, grid: Grid2D, assembler=None):
    """Linear system for ``div(w (f - grad p)) = 0`` with no-flux boundaries.

    ``wx`` (x-faces) and ``wy`` (y-faces) are face coefficients; only
    interior faces are used.  Returns ``(matrix, rhs, diagonal)`` with
    ``rhs`` projected onto the range of the (singular) matrix.
    """
    asm = assembler or _Assembler(grid)
    wxi = wx[1:-1].ravel()
    wyi = wy[:, 1:-1].ravel()
    if not (np.all(np.isfinite(wxi)) and np.all(np.isfinite(wyi))
            and np.all(wxi > 0.0) and np.all(wyi > 0.0)):
        raise SingularSystemError("face mobility underflow: conductances must be finite and positive")
    mat, diag = asm.matrix(wxi * grid.dy / grid.dx, wyi * grid.dx / grid.dy)
    # forcing part of the net outflow moves to the right-hand side
    qx = np.zeros_like(wx)
    qx[1:-1] = wx[1:-1] * fx_face[1:-1]
    qy = np.zeros_like(wy)
    qy[:, 1:-1] = wy[:, 1:-1] * fy_face[:, 1:-1]
    rhs = -(np.diff(qx, axis=0) * grid.dy + np.diff(qy, axis=1) * grid.dx).ravel()
    rhs -= rhs.mean()
    return mat, rhs, diag


def solve_zero_mean(mat, rhs, diag, x0, tol):
    """Jacobi-preconditioned CG on the singular Neumann system."""
    if not rhs.any():
        return np.zeros_like(rhs), 0
    precond = sparse.diags(1.0 / diag)
    counter = [0]

    def count(_):
        counter[0] += 1

    sol, info = spla.cg(mat, rhs, x0=x0 - x0.mean(), rtol=tol, atol=0.0,
                        maxiter=max(1000, 10 * rhs.size), M=precond, callback=count)
    if info != 0 or not np.all(np.isfinite(sol)):
        raise SingularSystemError(f"inner CG solve failed (info={info})")
    return sol - sol.mean(), counter[0]


def solve_pressure(gap: GapField, forcing: ForcingField, params: FluidParams, grid: Grid2D,
                   config: SolverConfig = SolverConfig(), quad: QuadratureSpec = DEFAULT_QUAD,
                   p0=None):
    """Damped Picard iteration for the zero-mean pressure.

    Returns
    -------
    PressureField, SolverReport
        On non-convergence the iterate with the smallest residual is returned
        and ``report.converged`` is False.
    """
    t0 = time.perf_counter()
    _check_gap(gap, grid)
    _check_forcing(forcing, grid)
    asm = _Assembler(grid)
    p = np.zeros(grid.shape) if p0 is None else _pressure_values(p0, grid).copy()
    p -= p.mean()
    naive = _naive_scale(gap, forcing, params, grid, quad)
    pressure_floor = 1e-6 * forcing.scale * max(grid.lx, grid.ly)
    report = SolverReport()

    flux = face_flux(driving_field(p, forcing, grid), gap, params, quad)
    best_p, best_res = p.copy(), _normalized_residual(flux, grid, naive)
    omega = config.relaxation
    for it in range(1, config.max_iters + 1):
        mat, rhs, diag = assemble_diffusion(
            2.0 * flux.x_mobility, 2.0 * flux.y_mobility, forcing.fx_face, forcing.fy_face, grid, asm
        )
        p_lin, _ = solve_zero_mean(mat, rhs, diag, p.ravel(), config.linear_tol)
        p_new = (1.0 - omega) * p + omega * p_lin.reshape(grid.shape)
        p_new -= p_new.mean()
        denom = max(np.abs(p_new).max(), pressure_floor)
        update = 0.0 if denom == 0.0 else float(np.abs(p_new - p).max() / denom)
        p = p_new

        flux = face_flux(driving_field(p, forcing, grid), gap, params, quad)
        res = _normalized_residual(flux, grid, naive)
        report.residual_history.append(res)
        report.update_history.append(update)
        report.iterations = it
        if res <= best_res:
            best_p, best_res = p.copy(), res
        if res <= config.picard_tol and update <= config.picard_tol:
            report.converged = True
            best_p, best_res = p, res
            break

    report.final_residual = best_res
    report.message = (
        f"converged in {report.iterations} iterations (residual {best_res:.3e})" if report.converged
        else f"not converged after {report.iterations} iterations (residual {best_res:.3e})"
    )
    report.wall_time = time.perf_counter() - t0
    return PressureField(best_p - best_p.mean(), grid), report
