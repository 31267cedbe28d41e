"""Standard test cases shared by the verification suite, tests and examples."""

from __future__ import annotations

import numpy as np

from .fields import ForcingField, GapField, Grid2D

TWO_PI = 2.0 * np.pi


def rotational_case(n, lx=1.0, ly=1.0, h=1.0):
    """Rotational forcing ``f' = (-(y - ly/2), x - lx/2)`` on an ``n x n`` grid."""
    grid = Grid2D(lx, ly, n, n)
    forcing = ForcingField.from_function(
        lambda x, y: -(y - 0.5 * ly), lambda x, y: x - 0.5 * lx, grid, provenance="rotational"
    )
    gap = GapField.constant(h, grid) if np.isscalar(h) else GapField.from_function(h, grid)
    return grid, gap, forcing


def gradient_potential(lx=1.0, ly=1.0):
    """``phi = sin(2 pi x / lx) cos(2 pi y / ly)`` and its gradient components."""
    ax, ay = TWO_PI / lx, TWO_PI / ly

    def phi(x, y):
        return np.sin(ax * x) * np.cos(ay * y)

    def dphi_dx(x, y):
        return ax * np.cos(ax * x) * np.cos(ay * y)

    def dphi_dy(x, y):
        return -ay * np.sin(ax * x) * np.sin(ay * y)

    return phi, dphi_dx, dphi_dy


def gradient_case(n, lx=1.0, ly=1.0, gap=None):
    """Conservative forcing ``f' = grad(phi)`` over a wavy film."""
    grid = Grid2D(lx, ly, n, n)
    phi, fx, fy = gradient_potential(lx, ly)
    forcing = ForcingField.from_function(fx, fy, grid, provenance="grad phi")
    if gap is None:
        gap = lambda x, y: 1.0 + 0.25 * np.sin(TWO_PI * x / lx) * np.cos(np.pi * y / ly)  # noqa: E731
    return grid, GapField.from_function(gap, grid), forcing, phi


def cell_average(func, grid: Grid2D, nodes=6):
    """Cell averages of ``func(x, y)`` by tensor Gauss-Legendre quadrature."""
    t, w = np.polynomial.legendre.leggauss(nodes)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    xs = (np.arange(grid.nx)[:, None] + t[None, :]) * grid.dx  # (nx, q)
    ys = (np.arange(grid.ny)[:, None] + t[None, :]) * grid.dy  # (ny, q)
    vals = func(xs[:, None, :, None], ys[None, :, None, :])
    return np.einsum("ijab,a,b->ij", vals, w, w)
