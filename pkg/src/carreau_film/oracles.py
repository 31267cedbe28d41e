"""Reference computations that never call ``psi`` or the mobility integrals.

* :func:`newtonian_pressure` assembles and directly solves the linear
  Reynolds equation ``div(h^3/(12 mu) (f' - grad p)) = 0``.
* :func:`cross_section_bvp` solves the cross-section shear problem by
  shooting on the stress constant, inverting ``eta(z) z = |Gamma|`` by
  bisection.
* :func:`asymptotic_exponents` gives the exact power-law slopes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as spla

from .constitutive import FluidParams, carreau_viscosity
from .errors import InvalidParameterError, NumericalError, SingularSystemError
from .fields import ForcingField, GapField, Grid2D, PressureField


def newtonian_pressure(gap: GapField, forcing: ForcingField, grid: Grid2D, mu: float) -> PressureField:
    """Zero-mean solution of the classical Reynolds equation with no-flux walls.

    The singular Neumann system is bordered with the mean constraint and
    solved directly.
    """
    if not mu > 0.0:
        raise InvalidParameterError(f"viscosity mu must be positive, got {mu}")
    nx, ny = grid.shape
    n = nx * ny
    cx = gap.xface[1:-1] ** 3 / (12.0 * mu)  # (nx-1, ny)
    cy = gap.yface[:, 1:-1] ** 3 / (12.0 * mu)  # (nx, ny-1)

    idx = np.arange(n).reshape(nx, ny)
    # each interior face couples two cells: (left, right, conductance, forcing flux)
    left = np.concatenate([idx[:-1].ravel(), idx[:, :-1].ravel()])
    right = np.concatenate([idx[1:].ravel(), idx[:, 1:].ravel()])
    cond = np.concatenate([(cx * grid.dy / grid.dx).ravel(), (cy * grid.dx / grid.dy).ravel()])
    qf = np.concatenate([
        (cx * forcing.fx_face[1:-1] * grid.dy).ravel(),
        (cy * forcing.fy_face[:, 1:-1] * grid.dx).ravel(),
    ])
    border = np.full(n, n)
    rows = np.concatenate([left, right, left, right, np.arange(n), border])
    cols = np.concatenate([left, right, right, left, border, np.arange(n)])
    vals = np.concatenate([cond, cond, -cond, -cond, np.ones(n), np.ones(n)])
    lap = sparse.coo_matrix((vals, (rows, cols)), shape=(n + 1, n + 1))
    rhs = np.zeros(n + 1)
    np.add.at(rhs, left, -qf)
    np.add.at(rhs, right, qf)
    sol = spla.spsolve(lap.tocsc(), rhs)
    if not np.all(np.isfinite(sol)):
        raise SingularSystemError("Newtonian Reynolds system is singular")
    p = sol[:n].reshape(nx, ny)
    return PressureField(p - p.mean(), grid)


@dataclass(frozen=True)
class ShootingConfig:
    ode_steps: int = 10_000
    newton_tol: float = 1e-12
    max_newton: int = 50

    def __post_init__(self):
        if int(self.ode_steps) != self.ode_steps or self.ode_steps < 100:
            raise InvalidParameterError(f"ode_steps must be an integer >= 100, got {self.ode_steps}")
        if not self.newton_tol > 0.0:
            raise InvalidParameterError(f"newton_tol must be positive, got {self.newton_tol}")
        if int(self.max_newton) != self.max_newton or self.max_newton < 1:
            raise InvalidParameterError(f"max_newton must be an integer >= 1, got {self.max_newton}")


@dataclass(frozen=True)
class BVPProfile:
    """Sampled cross-section profile from the shooting oracle."""

    y3: np.ndarray
    u: np.ndarray  # (n + 1, 2)
    C: np.ndarray
    mismatch: float
    iterations: int


def shear_rate(stress, params: FluidParams, iters=200):
    """Solve ``eta(z) z = stress`` for ``z >= 0`` by bisection.

    Geometric halving narrows the bracket to a factor of two, then
    arithmetic halving runs down to adjacent floats.
    """
    tau = np.asarray(stress, dtype=float)
    flat = tau.ravel()
    z = np.zeros_like(flat)
    pos = flat > 0.0
    t = flat[pos]
    forward = lambda zz: carreau_viscosity(zz, params) * zz  # noqa: E731
    base = t / params.eta0
    lo, hi = base.copy(), base.copy()
    # eta(z) z is increasing; widen until it brackets t
    for _ in range(2000):
        low_bad = forward(lo) > t
        if not low_bad.any():
            break
        lo[low_bad] *= 0.5
    for _ in range(2000):
        high_bad = forward(hi) < t
        if not high_bad.any():
            break
        hi[high_bad] *= 2.0
    for _ in range(iters):
        if np.all(hi <= 2.0 * lo):
            break
        mid = np.sqrt(lo * hi)
        below = forward(mid) < t
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    # arithmetic bisection down to adjacent floats
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if np.all((mid == lo) | (mid == hi)):
            break
        below = forward(mid) < t
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    z[pos] = 0.5 * (lo + hi)
    return z.reshape(tau.shape)


def _slopes(C, g, y, params):
    """Right-hand side ``z(|Gamma|) Gamma / |Gamma|`` with ``Gamma = C - y g``."""
    gam = C[None, :] - y[:, None] * g[None, :]
    mag = np.hypot(gam[:, 0], gam[:, 1])
    z = shear_rate(mag, params)
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = np.where(mag[:, None] > 0.0, gam / mag[:, None], 0.0)
    return z[:, None] * unit


def _integrate(C, g, h, n, params):
    """Classical RK4; the right-hand side does not depend on ``u``."""
    dy = h / n
    y = np.linspace(0.0, h, 2 * n + 1)
    f = _slopes(C, g, y, params)
    incr = dy / 6.0 * (f[0:-1:2] + 4.0 * f[1::2] + f[2::2])
    u = np.zeros((n + 1, 2))
    u[1:] = np.cumsum(incr, axis=0)
    scale = dy * np.abs(f).sum(axis=0).max() / 2.0
    return y[::2], u, scale


def cross_section_bvp(g, h, params: FluidParams, config: ShootingConfig = ShootingConfig()) -> BVPProfile:
    """Shoot on ``C`` so that the profile vanishes at both walls.

    The profile starts from ``u(0) = 0`` and Newton (finite-difference
    Jacobian, backtracking) drives ``u(h)`` to zero.  The start ``C = 0`` is
    deliberately uninformed.
    """
    g = np.asarray(g, dtype=float).reshape(2)
    if not (h > 0.0 and np.isfinite(h)):
        raise InvalidParameterError(f"thickness must be positive, got {h}")
    n = int(config.ode_steps)
    C = np.zeros(2)
    if not np.any(g):
        y = np.linspace(0.0, h, n + 1)
        return BVPProfile(y, np.zeros((n + 1, 2)), C, 0.0, 0)

    y, u, scale = _integrate(C, g, h, n, params)
    m = u[-1]
    for it in range(1, config.max_newton + 1):
        if np.hypot(*m) <= config.newton_tol * scale:
            return BVPProfile(y, u, C, float(np.hypot(*m) / scale), it - 1)
        step_size = 1e-7 * max(np.hypot(*C), np.hypot(*g) * h)
        jac = np.empty((2, 2))
        for k in range(2):
            dC = np.zeros(2)
            dC[k] = step_size
            jac[:, k] = (_integrate(C + dC, g, h, n, params)[1][-1] - m) / step_size
        try:
            delta = np.linalg.solve(jac, -m)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"shooting Jacobian is singular: {exc}") from exc
        t = 1.0
        while True:
            y_new, u_new, scale_new = _integrate(C + t * delta, g, h, n, params)
            if np.hypot(*u_new[-1]) < np.hypot(*m) or t < 1e-6:
                break
            t *= 0.5
        C = C + t * delta
        y, u, scale, m = y_new, u_new, scale_new, u_new[-1]
    if np.hypot(*m) <= config.newton_tol * scale:
        return BVPProfile(y, u, C, float(np.hypot(*m) / scale), config.max_newton)
    raise NumericalError(
        f"shooting did not converge in {config.max_newton} Newton steps "
        f"(mismatch {np.hypot(*m) / scale:.3e})"
    )


def asymptotic_exponents(params: FluidParams):
    """Exact large-argument log-log slopes ``((r-2)/(r-1), (2-r)/(r-1))``.

    ``r`` is converted through its shortest decimal representation, so
    ``r = 1.5`` gives exactly ``(-1, 1)``.
    """
    r = Fraction(repr(float(params.r)))
    if r == 2:
        raise InvalidParameterError("r = 2 has no power-law regime")
    return (r - 2) / (r - 1), (2 - r) / (r - 1)
