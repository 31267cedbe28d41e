"""Velocity profiles and filtration velocity from a converged pressure."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .constitutive import FluidParams
from .errors import InvalidParameterError
from .fields import ForcingField, GapField, Grid2D
from .mobility import DEFAULT_QUAD, mobility, profile_integral
from .quadrature import QuadratureSpec
from .reynolds import FaceFlux, cell_net_outflow, driving_field, face_flux


@dataclass(frozen=True)
class VelocityField3D:
    """Velocity on ``n3`` uniform depth samples per cell.

    ``y3`` has shape ``(nx, ny, n3)`` and runs from 0 to the local thickness;
    ``u`` has shape ``(nx, ny, n3, 3)`` with the vertical component zero.
    """

    y3: np.ndarray
    u: np.ndarray

    @property
    def n3(self):
        return self.y3.shape[-1]

    @property
    def horizontal(self):
        return self.u[..., :2]

    def depth_integral(self):
        """Simpson-rule depth integral of the horizontal velocity, ``(nx, ny, 2)``."""
        return simpson(self.horizontal, x=self.y3[..., None], axis=-2)


@dataclass(frozen=True)
class FluxField:
    """Cell filtration velocity ``(nx, ny, 3)`` plus the face-normal fluxes."""

    cell: np.ndarray
    faces: FaceFlux

    @property
    def horizontal(self):
        return self.cell[..., :2]


def cell_driving(p, forcing: ForcingField, grid: Grid2D):
    """``g`` at cell centers, averaged from the face-normal values.

    Boundary faces contribute their (zero) normal value.
    """
    g = driving_field(p, forcing, grid)
    gx = 0.5 * (g.x_normal[:-1] + g.x_normal[1:])
    gy = 0.5 * (g.y_normal[:, :-1] + g.y_normal[:, 1:])
    return np.stack([gx, gy], axis=-1)


def reconstruct_velocity(p, gap: GapField, forcing: ForcingField, params: FluidParams,
                         n3: int = 64, quad: QuadratureSpec = DEFAULT_QUAD,
                         grid: Grid2D | None = None) -> VelocityField3D:
    """Horizontal velocity ``u = g P(h, y3, |g|)`` on uniform depth samples."""
    if int(n3) != n3 or n3 < 3:
        raise InvalidParameterError(f"n3 must be an integer >= 3, got {n3}")
    grid = grid or p.grid
    g = cell_driving(p, forcing, grid)
    h = gap.cell
    y3 = h[..., None] * np.linspace(0.0, 1.0, int(n3))
    y3[..., -1] = h  # top sample sits exactly on the wall
    s = np.broadcast_to(np.hypot(g[..., 0], g[..., 1])[..., None], y3.shape)
    kernel = profile_integral(np.broadcast_to(h[..., None], y3.shape), y3, s, params, quad)
    kernel = np.asarray(kernel).reshape(y3.shape)
    u = np.zeros(y3.shape + (3,))
    u[..., :2] = kernel[..., None] * g[:, :, None, :]
    return VelocityField3D(y3, u)


def filtration_velocity(p, gap: GapField, forcing: ForcingField, params: FluidParams,
                        quad: QuadratureSpec = DEFAULT_QUAD, grid: Grid2D | None = None) -> FluxField:
    """``V = g M(h, |g|)`` at cells, with the matching face fluxes."""
    grid = grid or p.grid
    g = cell_driving(p, forcing, grid)
    m = mobility(gap.cell, np.hypot(g[..., 0], g[..., 1]), params, quad)
    cell = np.zeros(grid.shape + (3,))
    cell[..., :2] = g * np.asarray(m)[..., None]
    faces = face_flux(driving_field(p, forcing, grid), gap, params, quad)
    return FluxField(cell, faces)


def divergence_check(flux: FluxField, grid: Grid2D) -> float:
    """Largest cell net outflow relative to the largest face flux."""
    net = np.abs(cell_net_outflow(flux.faces, grid)).max()
    scale = max(np.abs(flux.faces.x).max() * grid.dy, np.abs(flux.faces.y).max() * grid.dx)
    return 0.0 if scale == 0.0 else float(net / scale)
