import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from carreau_film.constitutive import (
    FluidParams,
    ViscosityBranch,
    carreau_viscosity,
    psi,
    psi_loglog_slope,
    shear_rate_from_stress,
    stress_map,
    tau_of_zeta,
)
from carreau_film.errors import BranchError, InvalidParameterError

r_values = st.one_of(st.floats(1.05, 1.95), st.floats(2.05, 6.0))
params_st = st.builds(
    FluidParams,
    eta0=st.floats(0.1, 10.0),
    lam=st.floats(1e-3, 1e3),
    r=r_values,
)


class TestFluidParams:
    def test_coerces_to_float(self):
        p = FluidParams(1, 2, 4)
        assert isinstance(p.eta0, float) and isinstance(p.r, float)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(eta0=1.0, lam=1.0, r=2.0),
            dict(eta0=1.0, lam=1.0, r=1.0),
            dict(eta0=1.0, lam=1.0, r=0.5),
            dict(eta0=0.0, lam=1.0, r=1.5),
            dict(eta0=1.0, lam=-1.0, r=1.5),
            dict(eta0=1.0, lam=1.0, r=1.5, eta_inf=1.0),
            dict(eta0=1.0, lam=1.0, r=1.5, eta_inf=-0.1),
            dict(eta0=float("nan"), lam=1.0, r=1.5),
            dict(eta0=1.0, lam=float("inf"), r=1.5),
        ],
    )
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(InvalidParameterError):
            FluidParams(**kwargs)

    def test_r2_message_names_restriction(self):
        with pytest.raises(InvalidParameterError, match="r = 2"):
            FluidParams(1.0, 1.0, 2.0)

    def test_branch_and_conjugate(self):
        assert FluidParams(1, 1, 1.5).branch is ViscosityBranch.THINNING
        assert FluidParams(1, 1, 3.0).branch is ViscosityBranch.THICKENING
        assert FluidParams(1, 1, 3.0).conjugate == pytest.approx(1.5)
        assert FluidParams(1, 1, 1.5).conjugate == pytest.approx(3.0)


class TestViscosity:
    def test_zero_rate_gives_eta0(self):
        p = FluidParams(2.5, 3.0, 1.4, eta_inf=0.1)
        assert carreau_viscosity(0.0, p) == 2.5

    def test_closed_form_value(self):
        # r = 4: eta = eta0 (1 + lam z^2 / 2)
        p = FluidParams(1.0, 2.0, 4.0)
        assert carreau_viscosity(3.0, p) == pytest.approx(10.0, rel=1e-15)

    def test_eta_inf_floor(self):
        p = FluidParams(1.0, 1.0, 1.5, eta_inf=0.2)
        assert carreau_viscosity(1e12, p) == pytest.approx(0.2, rel=1e-5)

    def test_rejects_negative_rate(self):
        with pytest.raises(InvalidParameterError):
            carreau_viscosity(-1.0, FluidParams(1, 1, 1.5))

    def test_stress_map_shape_and_parallel(self):
        p = FluidParams(1.0, 2.0, 4.0)
        z = np.array([[3.0, 4.0], [0.0, 0.0]])
        out = stress_map(z, p)
        assert out.shape == (2, 2)
        # |z| = 5 -> eta = 1 + 25
        np.testing.assert_allclose(out[0], 26.0 * z[0], rtol=1e-15)
        np.testing.assert_array_equal(out[1], 0.0)

    def test_stress_map_rejects_bad_shape(self):
        with pytest.raises(InvalidParameterError):
            stress_map(np.zeros(3), FluidParams(1, 1, 1.5))

    @settings(max_examples=60, deadline=None)
    @given(params_st, st.integers(0, 2**32 - 1))
    def test_stress_map_monotone(self, p, seed):
        rng = np.random.default_rng(seed)
        z = rng.uniform(-10, 10, (200, 2))
        t = rng.uniform(-10, 10, (200, 2))
        prod = np.einsum("ij,ij->i", stress_map(z, p) - stress_map(t, p), z - t)
        assert np.all(prod > 0.0)


class TestTauOfZeta:
    def test_spot_values(self):
        p = FluidParams(1.0, 2.0, 4.0)
        assert tau_of_zeta(2.0, p) == pytest.approx(2.0, rel=1e-14)
        assert tau_of_zeta(5.0, p) == pytest.approx(10.0, rel=1e-14)
        assert tau_of_zeta(1.0, p) == 0.0

    def test_branch_violation(self):
        with pytest.raises(BranchError):
            tau_of_zeta(0.5, FluidParams(1.0, 2.0, 4.0))
        with pytest.raises(BranchError):
            tau_of_zeta(1.5, FluidParams(1.0, 2.0, 1.5))

    def test_needs_positive_lam(self):
        with pytest.raises(InvalidParameterError):
            tau_of_zeta(1.0, FluidParams(1.0, 0.0, 1.5))


class TestPsi:
    def test_spot_values(self):
        p = FluidParams(1.0, 2.0, 4.0)
        assert psi(2.0, p) == pytest.approx(2.0, abs=1e-12)
        assert psi(10.0, p) == pytest.approx(5.0, abs=1e-12)

    # references from 40-digit bisection on eta(z) z = tau (mpmath)
    @pytest.mark.parametrize(
        "tau, eta0, lam, r, expected",
        [
            (0.5, 1.0, 2.0, 1.5, 0.93956490916664118813),
            (3.0, 1.0, 2.0, 1.5, 0.33131892286201169376),
            (1.0, 2.0, 0.5, 3.0, 2.0581710272714922503),
            (100.0, 0.5, 10.0, 1.2, 1.2499999999999915303e-11),
            (1e-3, 5.0, 1.0, 4.0, 5.000000099999996),
        ],
    )
    def test_high_precision_references(self, tau, eta0, lam, r, expected):
        assert psi(tau, FluidParams(eta0, lam, r)) == pytest.approx(expected, rel=1e-13)

    def test_zero_stress(self):
        assert psi(0.0, FluidParams(3.0, 1.0, 1.5)) == 3.0
        np.testing.assert_array_equal(psi(np.zeros(3), FluidParams(3.0, 1.0, 4.0)), 3.0)

    def test_scalar_and_array(self):
        p = FluidParams(1.0, 2.0, 4.0)
        assert isinstance(psi(2.0, p), float)
        assert psi(np.array([[2.0, 10.0]]), p).shape == (1, 2)

    def test_lam_zero_is_precondition_error(self):
        with pytest.raises(InvalidParameterError, match="lam > 0"):
            psi(1.0, FluidParams(1.0, 0.0, 1.5))

    @pytest.mark.parametrize("tau", [-1.0, float("nan"), float("inf")])
    def test_rejects_bad_tau(self, tau):
        with pytest.raises(InvalidParameterError):
            psi(tau, FluidParams(1.0, 1.0, 1.5))

    @settings(max_examples=80, deadline=None)
    @given(params_st, st.floats(-8, 10))
    def test_branch_containment(self, p, log_tau):
        zeta = psi(10.0**log_tau, p)
        if p.r > 2:
            assert zeta >= p.eta0
        else:
            assert 0.0 < zeta <= p.eta0

    @settings(max_examples=60, deadline=None)
    @given(params_st)
    def test_monotone_in_tau(self, p):
        zeta = psi(np.logspace(-4, 8, 200), p)
        d = np.diff(zeta)
        assert np.all(d >= 0.0) if p.r > 2 else np.all(d <= 0.0)

    @settings(max_examples=80, deadline=None)
    @given(params_st, st.floats(-6, 8))
    def test_shear_rate_roundtrip(self, p, log_tau):
        # eta(z) z = tau is well conditioned, unlike tau(zeta) near zeta = eta0
        tau = 10.0**log_tau
        z = shear_rate_from_stress(tau, p)
        assert carreau_viscosity(z, p) * z == pytest.approx(tau, rel=1e-11)

    def test_shear_rate_roundtrip_acceptance_grid(self):
        tau = np.logspace(-6, 8, 50)
        for r in (1.2, 1.5, 1.8, 2.5, 3.0, 4.0):
            for lam in (0.1, 1.0, 10.0):
                for eta0 in (0.5, 1.0, 5.0):
                    p = FluidParams(eta0, lam, r)
                    z = shear_rate_from_stress(tau, p)
                    np.testing.assert_allclose(carreau_viscosity(z, p) * z, tau, rtol=1e-11)

    def test_zeta_roundtrip_within_conditioning_bound(self):
        # tau(zeta) amplifies a one-ulp error in zeta by ~1/|zeta/eta0 - 1|
        tau = np.logspace(-6, 8, 50)
        eps = np.finfo(float).eps
        for r in (1.2, 1.5, 1.8, 2.5, 3.0, 4.0):
            for lam in (0.1, 1.0, 10.0):
                for eta0 in (0.5, 1.0, 5.0):
                    p = FluidParams(eta0, lam, r)
                    zeta = psi(tau, p)
                    rel = np.abs(tau_of_zeta(zeta, p) - tau) / tau
                    with np.errstate(divide="ignore"):
                        amp = 1.0 + 1.0 / np.abs(zeta / eta0 - 1.0)
                    assert np.all(rel <= 1e-10 + 4.0 * eps * amp)

    def test_roundtrip_well_conditioned_region(self):
        # once zeta is clearly away from eta0 the literal roundtrip holds
        tau = np.logspace(0, 8, 40)
        for r in (1.5, 3.0, 4.0):
            p = FluidParams(1.0, 1.0, r)
            zeta = psi(tau, p)
            np.testing.assert_allclose(tau_of_zeta(zeta, p), tau, rtol=1e-10)

    def test_eta_inf_roundtrip(self):
        p = FluidParams(1.0, 2.0, 1.5, eta_inf=0.05)
        tau = np.logspace(-1, 6, 30)
        zeta = psi(tau, p)
        assert np.all((zeta > 0.05) & (zeta <= 1.0))
        np.testing.assert_allclose(tau_of_zeta(zeta, p), tau, rtol=1e-9)


class TestLogLogSlope:
    @pytest.mark.parametrize("r, expected", [(4.0, 2 / 3), (1.5, -1.0), (3.0, 0.5)])
    def test_power_law_slope(self, r, expected):
        assert psi_loglog_slope(1e8, FluidParams(1.0, 2.0, r)) == pytest.approx(expected, abs=1e-3)

    def test_rejects_non_dominant_regime(self):
        with pytest.raises(InvalidParameterError, match="power-law region"):
            psi_loglog_slope(1e-2, FluidParams(1.0, 2.0, 4.0))

    def test_rejects_eta_inf(self):
        with pytest.raises(InvalidParameterError):
            psi_loglog_slope(1e8, FluidParams(1.0, 2.0, 1.5, eta_inf=0.1))

    def test_slope_matches_exponent_formula(self):
        for r in (1.3, 2.7, 5.0):
            slope = psi_loglog_slope(1e8, FluidParams(1.0, 2.0, r))
            assert math.isclose(slope, (r - 2) / (r - 1), abs_tol=1e-3)
