"""Thickness-mobility integrals of the cross-section flow.

With ``g = 2 (f' - grad p)`` and ``s = |g|``, the depth-integrated flux is
``V = g * M(h, s)`` where

    M(h, s) = int_{-h/2}^{h/2} (h/2 + xi) xi / psi(s |xi|) dxi,

and the horizontal velocity at height ``y3`` is ``u = g * P(h, y3, s)`` with

    P(h, y3, s) = int_{h/2 - y3}^{h/2} xi / psi(s |xi|) dxi.
"""

from __future__ import annotations

import numpy as np

from .constitutive import FluidParams, psi
from .errors import InvalidParameterError
from .quadrature import QuadratureSpec, integrate

DEFAULT_QUAD = QuadratureSpec()


def _broadcast(*args):
    arrs = np.broadcast_arrays(*[np.asarray(x, dtype=float) for x in args])
    return [x.ravel() for x in arrs], arrs[0].shape


def _check_hs(h, s):
    if np.any(~(h > 0.0)) or np.any(~np.isfinite(h)):
        raise InvalidParameterError("thickness h must be finite and positive")
    if np.any(~(s >= 0.0)) or np.any(~np.isfinite(s)):
        raise InvalidParameterError("driving magnitude s must be finite and non-negative")


def _shape_out(result, shape):
    return float(result[0]) if shape == () else result.reshape(shape)


def mobility(h, s, params: FluidParams, quad: QuadratureSpec = DEFAULT_QUAD):
    """Mobility ``M(h, s)`` (broadcasting over ``h`` and ``s``).

    The symmetric interval is folded onto ``[0, h/2]``: each Gauss node ``xi``
    is paired with its mirror ``-xi`` so ``psi`` is evaluated once per pair.
    ``s = 0`` (or ``lam = 0``) returns the closed form ``h**3 / (12 eta0)``.
    """
    (hh, ss), shape = _broadcast(h, s)
    _check_hs(hh, ss)
    out = hh**3 / (12.0 * params.eta0)
    live = np.nonzero((ss > 0.0) & (params.lam > 0.0))[0]
    if live.size:
        h_l, s_l = hh[live], ss[live]
        half = 0.5 * h_l

        def folded(xi, idx):
            hk = half[idx][:, None]
            visc = psi(s_l[idx][:, None] * xi, params)
            return ((hk + xi) * xi + (hk - xi) * (-xi)) / visc

        out[live] = integrate(folded, np.zeros_like(half), half, quad)
    return _shape_out(out, shape)


def mobility_even(h, s, params: FluidParams, quad: QuadratureSpec = DEFAULT_QUAD):
    """Even-part form ``2 int_0^{h/2} xi**2 / psi(s xi) dxi`` of the mobility."""
    (hh, ss), shape = _broadcast(h, s)
    _check_hs(hh, ss)
    out = hh**3 / (12.0 * params.eta0)
    live = np.nonzero((ss > 0.0) & (params.lam > 0.0))[0]
    if live.size:
        half = 0.5 * hh[live]
        s_l = ss[live]

        def even(xi, idx):
            return 2.0 * xi * xi / psi(s_l[idx][:, None] * xi, params)

        out[live] = integrate(even, np.zeros_like(half), half, quad)
    return _shape_out(out, shape)


def profile_integral(h, y3, s, params: FluidParams, quad: QuadratureSpec = DEFAULT_QUAD):
    """Velocity kernel ``P(h, y3, s)`` for ``0 <= y3 <= h``.

    The integrand is odd in ``xi``, so the part of ``[h/2 - y3, h/2]`` below
    zero cancels against its mirror and only ``[|h/2 - y3|, h/2]`` remains.
    This makes ``P(h, y3) = P(h, h - y3)`` and ``P(h, h) = 0`` exact.
    """
    (hh, yy, ss), shape = _broadcast(h, y3, s)
    _check_hs(hh, ss)
    if np.any(~((yy >= 0.0) & (yy <= hh))):
        raise InvalidParameterError("height y3 must lie in [0, h]")
    half = 0.5 * hh
    lower = np.abs(half - yy)
    out = (half * half - lower * lower) / (2.0 * params.eta0)
    live = np.nonzero((ss > 0.0) & (params.lam > 0.0) & (lower < half))[0]
    if live.size:
        s_l = ss[live]

        def kernel(xi, idx):
            return xi / psi(s_l[idx][:, None] * xi, params)

        out[live] = integrate(kernel, lower[live], half[live], quad)
    out[lower >= half] = 0.0
    return _shape_out(out, shape)


def depth_integrated_profile(h, s, params: FluidParams, quad: QuadratureSpec = DEFAULT_QUAD):
    """``int_0^h P(h, y3, s) dy3`` by nested quadrature.

    Independent of :func:`mobility` up to the order-of-integration swap, so
    the two agree only if both quadratures are accurate.
    """
    (hh, ss), shape = _broadcast(h, s)
    _check_hs(hh, ss)

    def inner(y3, idx):
        hk = np.broadcast_to(hh[idx][:, None], y3.shape)
        sk = np.broadcast_to(ss[idx][:, None], y3.shape)
        return np.reshape(profile_integral(hk.ravel(), y3.ravel(), sk.ravel(), params, quad), y3.shape)

    outer = QuadratureSpec(
        panel_count=max(2, quad.panel_count),
        nodes_per_panel=quad.nodes_per_panel,
        refinement_tol=quad.refinement_tol,
        max_panels=quad.max_panels,
    )
    out = integrate(inner, np.zeros_like(hh), hh, outer)
    return _shape_out(out, shape)
