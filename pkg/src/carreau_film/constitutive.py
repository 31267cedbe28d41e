"""Carreau rheology: viscosity law, stress map and the stress/viscosity inversion.

The cross-section problem of the thin-film limit uses the Carreau law with the
shear magnitude scaled by one half,

    eta_r(z) = eta_inf + (eta0 - eta_inf) * (1 + lam/2 * z**2) ** (r/2 - 1),

and the algebraic map between an effective viscosity ``zeta = eta_r(z)`` and
the stress magnitude ``tau = zeta * z``,

    tau = zeta * sqrt(2/lam * (((zeta - eta_inf)/(eta0 - eta_inf)) ** (2/(r-2)) - 1)).

``psi`` inverts that map.  Internally the unknown is ``v = log(q)`` with
``q = lam/2 * z**2`` (the bracketed term above); in that variable the
residual ``log(lam/2 * tau(v)**2) - log(lam/2 * tau**2)`` is strictly
increasing with slope confined to ``[min(1, r-1), max(1, r-1)]``, which gives
an a-priori bracket and makes safeguarded Newton globally convergent.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import BranchError, InvalidParameterError, PsiConvergenceError

TAU_FLOOR = 1e-30
DOMINANCE_THRESHOLD = 1e4


class ViscosityBranch(enum.Enum):
    THINNING = "thinning"
    THICKENING = "thickening"


@dataclass(frozen=True)
class FluidParams:
    """Rheology constants of a Carreau fluid.

    Parameters
    ----------
    eta0 : float
        Zero-shear viscosity [Pa s].
    lam : float
        Constant multiplying the squared shear rate [s^2].  ``lam = 0`` is a
        Newtonian degeneracy accepted by the evaluation functions only.
    r : float
        Flow index, ``r > 1`` and ``r != 2``.
    eta_inf : float, optional
        Infinite-shear viscosity [Pa s], ``0 <= eta_inf < eta0``.
    """

    eta0: float
    lam: float
    r: float
    eta_inf: float = 0.0

    def __post_init__(self):
        for name in ("eta0", "lam", "r", "eta_inf"):
            value = float(getattr(self, name))
            object.__setattr__(self, name, value)
            if not math.isfinite(value):
                raise InvalidParameterError(f"{name} must be finite, got {value!r}")
        if not self.eta_inf >= 0.0:
            raise InvalidParameterError(f"eta_inf must be >= 0, got {self.eta_inf}")
        if not self.eta0 > self.eta_inf:
            raise InvalidParameterError(
                f"eta0 must exceed eta_inf, got eta0={self.eta0}, eta_inf={self.eta_inf}"
            )
        if not self.lam >= 0.0:
            raise InvalidParameterError(f"lam must be >= 0, got {self.lam}")
        if not self.r > 1.0:
            raise InvalidParameterError(f"flow index r must be > 1, got {self.r}")
        if self.r == 2.0:
            raise InvalidParameterError("flow index r = 2 is excluded (Newtonian exponent)")

    @property
    def conjugate(self) -> float:
        """Conjugate exponent r' = r / (r - 1)."""
        return self.r / (self.r - 1.0)

    @property
    def branch(self) -> ViscosityBranch:
        return ViscosityBranch.THINNING if self.r < 2.0 else ViscosityBranch.THICKENING


def _as_float(x, result):
    return float(result) if np.ndim(x) == 0 else result


def carreau_viscosity(z, params: FluidParams):
    """Viscosity at shear magnitude ``z`` (scalar or array, ``z >= 0``)."""
    zz = np.asarray(z, dtype=float)
    if np.any(~(zz >= 0.0)):
        raise InvalidParameterError("shear magnitude must be non-negative")
    p = params
    factor = np.exp((0.5 * p.r - 1.0) * np.log1p(0.5 * p.lam * zz * zz))
    return _as_float(z, p.eta_inf + (p.eta0 - p.eta_inf) * factor)


def stress_map(z_vec, params: FluidParams):
    """Monotone stress map ``g_r(z') = eta_r(|z'|) z'`` on 2-vectors.

    ``z_vec`` has shape ``(..., 2)``; the result has the same shape.
    """
    zv = np.asarray(z_vec, dtype=float)
    if zv.shape[-1:] != (2,):
        raise InvalidParameterError(f"expected trailing dimension 2, got shape {zv.shape}")
    mag = np.sqrt(np.sum(zv * zv, axis=-1))
    return np.asarray(carreau_viscosity(mag, params))[..., None] * zv


def tau_of_zeta(zeta, params: FluidParams):
    """Stress magnitude belonging to effective viscosity ``zeta``.

    Raises
    ------
    BranchError
        If ``zeta`` is not on the admissible branch: ``zeta >= eta0`` for
        ``r > 2``, ``eta_inf < zeta <= eta0`` for ``1 < r < 2``.
    """
    p = params
    if p.lam <= 0.0:
        raise InvalidParameterError("tau_of_zeta requires lam > 0")
    zz = np.asarray(zeta, dtype=float)
    if p.r > 2.0:
        bad = ~(zz >= p.eta0) | ~np.isfinite(zz)
        expected = f"zeta >= eta0 = {p.eta0}"
    else:
        bad = ~((zz > p.eta_inf) & (zz <= p.eta0))
        expected = f"{p.eta_inf} < zeta <= {p.eta0}"
    if np.any(bad):
        raise BranchError(f"zeta outside the admissible branch for r={p.r}: need {expected}")
    span = p.eta0 - p.eta_inf
    ratio = (zz - p.eta_inf) / span
    # log1p keeps digits near zeta = eta0, plain log keeps them near eta_inf
    with np.errstate(divide="ignore"):
        log_ratio = np.where(ratio > 0.5, np.log1p((zz - p.eta0) / span), np.log(ratio))
    with np.errstate(over="ignore"):
        q = np.expm1(2.0 / (p.r - 2.0) * log_ratio)
    return _as_float(zeta, zz * np.sqrt(2.0 * q / p.lam))


def _log_zeta(v, params):
    """log(zeta) and (zeta - eta_inf)/zeta as functions of v = log(q)."""
    p = params
    log_scaled = math.log(p.eta0 - p.eta_inf) + 0.5 * (p.r - 2.0) * np.logaddexp(0.0, v)
    if p.eta_inf > 0.0:
        log_z = np.logaddexp(math.log(p.eta_inf), log_scaled)
    else:
        log_z = log_scaled
    return log_z, np.exp(log_scaled - log_z)


def _residual(v, target, params):
    log_z, weight = _log_zeta(v, params)
    res = v + 2.0 * log_z - target
    slope = 1.0 + (params.r - 2.0) * expit(v) * weight
    return res, slope, log_z


def _solve_log_excess(tau, params, tol, max_iter=200):
    """Solve for v = log(q) at every positive entry of ``tau``.

    Returns ``(v, log_zeta)`` arrays of the same shape as ``tau``.
    """
    p = params
    target = math.log(0.5 * p.lam) + 2.0 * np.log(tau)
    lo_slope, hi_slope = min(1.0, p.r - 1.0), max(1.0, p.r - 1.0)

    t = target - 2.0 * math.log(p.eta0)
    v = np.where(t < 0.0, t, t / (p.r - 1.0))
    res, slope, log_z = _residual(v, target, p)
    lo = np.where(res > 0.0, v - res / lo_slope, v - res / hi_slope)
    hi = np.where(res > 0.0, v - res / hi_slope, v - res / lo_slope)
    pad = 1e-12 * (1.0 + np.abs(lo) + np.abs(hi))
    lo, hi = lo - pad, hi + pad

    # |res| is twice the relative stress residual
    active = np.abs(res) > 2.0 * tol
    for _ in range(max_iter):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        va, ra, sa = v[idx], res[idx], slope[idx]
        la, ha = lo[idx], hi[idx]
        step = va - ra / sa
        outside = ~((step > la) & (step < ha))
        step = np.where(outside, 0.5 * (la + ha), step)
        r_new, s_new, lz_new = _residual(step, target[idx], p)
        hi[idx] = np.where(r_new > 0.0, step, ha)
        lo[idx] = np.where(r_new > 0.0, la, step)
        v[idx], res[idx], slope[idx], log_z[idx] = step, r_new, s_new, lz_new
        width = hi[idx] - lo[idx]
        collapsed = width <= 4.0 * np.finfo(float).eps * np.maximum(1.0, np.abs(step))
        active[idx] = (np.abs(r_new) > 2.0 * tol) & ~collapsed
    else:
        worst = int(np.argmax(np.where(active, np.abs(res), -1.0)))
        raise PsiConvergenceError(
            f"psi did not converge in {max_iter} iterations",
            bracket=(float(lo[worst]), float(hi[worst])),
            residual=float(np.abs(res[worst])),
        )
    # a collapsed bracket still has to meet the tolerance to rounding level
    if np.any(np.abs(res) > max(2.0 * tol, 1e-13 * (1.0 + np.max(np.abs(target), initial=0.0)))):
        worst = int(np.argmax(np.abs(res)))
        raise PsiConvergenceError(
            "psi bracket collapsed before the residual met the tolerance",
            bracket=(float(lo[worst]), float(hi[worst])),
            residual=float(np.abs(res[worst])),
        )
    return v, log_z


def psi(tau, params: FluidParams, tol: float = 1e-12):
    """Effective viscosity ``zeta = psi(tau)``, the inverse of :func:`tau_of_zeta`.

    Parameters
    ----------
    tau : float or array_like
        Stress magnitude(s), ``tau >= 0``.
    params : FluidParams
        Fluid constants; ``lam`` must be positive.
    tol : float
        Relative tolerance on the stress residual, evaluated in log form.

    Returns
    -------
    float or ndarray
        ``psi(0) = eta0``; ``psi >= eta0`` and nondecreasing for ``r > 2``,
        ``eta_inf < psi <= eta0`` and nonincreasing for ``1 < r < 2``.

    Notes
    -----
    Convergence is judged on the log residual, which does not suffer the
    cancellation in ``zeta/eta0 - 1``.  For small ``tau`` the nearest double
    to the true ``zeta`` may lie within rounding of ``eta0`` itself, so
    re-evaluating :func:`tau_of_zeta` on the returned float can differ from
    ``tau`` by much more than ``tol``.
    """
    p = params
    if p.lam <= 0.0:
        raise InvalidParameterError(
            "psi requires lam > 0; use the Newtonian oracle for lam = 0"
        )
    if not tol > 0.0:
        raise InvalidParameterError(f"tol must be positive, got {tol}")
    tt = np.asarray(tau, dtype=float)
    if np.any(~(tt >= 0.0)) or np.any(~np.isfinite(tt)):
        raise InvalidParameterError("tau must be finite and non-negative")
    flat = tt.ravel()
    out = np.full(flat.shape, p.eta0, dtype=float)
    pos = flat > 0.0
    if pos.any():
        _, log_z = _solve_log_excess(flat[pos], p, tol)
        out[pos] = np.exp(log_z)
        if p.r > 2.0:
            np.maximum(out, p.eta0, out=out)
        else:
            np.minimum(out, p.eta0, out=out)
    return _as_float(tau, out.reshape(tt.shape))


def shear_rate_from_stress(tau, params: FluidParams, tol: float = 1e-12):
    """Shear rate ``z >= 0`` with ``carreau_viscosity(z) * z = tau``.

    Same solve as :func:`psi`, returned as ``z = sqrt(2 q / lam)``.  Unlike
    ``zeta``, ``z`` carries full relative precision at small ``tau``.
    """
    p = params
    if p.lam <= 0.0:
        raise InvalidParameterError("shear_rate_from_stress requires lam > 0")
    if not tol > 0.0:
        raise InvalidParameterError(f"tol must be positive, got {tol}")
    tt = np.asarray(tau, dtype=float)
    if np.any(~(tt >= 0.0)) or np.any(~np.isfinite(tt)):
        raise InvalidParameterError("tau must be finite and non-negative")
    flat = tt.ravel()
    out = np.zeros(flat.shape)
    pos = flat > 0.0
    if pos.any():
        v, _ = _solve_log_excess(flat[pos], p, tol)
        out[pos] = np.sqrt(2.0 / p.lam) * np.exp(0.5 * v)
    return _as_float(tau, out.reshape(tt.shape))


def psi_loglog_slope(tau: float, params: FluidParams, step: float = 1e-3) -> float:
    """Central-difference slope of ``log psi`` against ``log tau``.

    Tends to ``(r-2)/(r-1)`` in the power-law region.  Requires
    ``eta_inf = 0`` and ``(psi/eta0) ** (2/(r-2)) > DOMINANCE_THRESHOLD``.
    """
    p = params
    if p.eta_inf != 0.0:
        raise InvalidParameterError("psi_loglog_slope is defined for eta_inf = 0 only")
    if not tau > 0.0:
        raise InvalidParameterError(f"tau must be positive, got {tau}")
    zeta = psi(tau, p)
    log_dominance = 2.0 / (p.r - 2.0) * math.log(zeta / p.eta0)
    if log_dominance <= math.log(DOMINANCE_THRESHOLD):
        raise InvalidParameterError(
            f"tau={tau} is not in the power-law region: dominance ratio "
            f"{math.exp(log_dominance):.3g} <= {DOMINANCE_THRESHOLD:g}"
        )
    up = psi(tau * math.exp(step), p)
    down = psi(tau * math.exp(-step), p)
    return (math.log(up) - math.log(down)) / (2.0 * step)
