import numpy as np
import pytest

from carreau_film.cases import cell_average, gradient_case, rotational_case
from carreau_film.constitutive import FluidParams
from carreau_film.errors import InvalidParameterError, SingularSystemError
from carreau_film.fields import ForcingField, GapField, Grid2D, PressureField
from carreau_film.oracles import newtonian_pressure
from carreau_film.reynolds import (
    SolverConfig,
    assemble_diffusion,
    cell_net_outflow,
    driving_field,
    face_flux,
    residual_norm,
    solve_pressure,
)

STD = FluidParams(1.0, 2.0, 1.5)


@pytest.fixture(scope="module")
def rotational_solutions():
    out = {}
    for r in (1.2, 1.5, 2.5, 4.0):
        grid, gap, forcing = rotational_case(32)
        params = FluidParams(1.0, 2.0, r)
        out[r] = (grid, gap, forcing, params) + solve_pressure(gap, forcing, params, grid)
    return out


class TestGrid:
    def test_geometry(self):
        g = Grid2D(2.0, 1.0, 4, 2)
        assert (g.dx, g.dy) == (0.5, 0.5)
        np.testing.assert_allclose(g.x_centers, [0.25, 0.75, 1.25, 1.75])
        assert g.x_faces.shape == (5,) and g.y_faces[-1] == 1.0

    @pytest.mark.parametrize("args", [(0.0, 1.0, 4, 4), (1.0, 1.0, 1, 4), (1.0, 1.0, 4.5, 4)])
    def test_rejects(self, args):
        with pytest.raises(InvalidParameterError):
            Grid2D(*args)


class TestFields:
    def test_gap_positive(self):
        grid = Grid2D(1.0, 1.0, 4, 4)
        with pytest.raises(InvalidParameterError, match="h_min"):
            GapField.from_function(lambda x, y: x - 0.5, grid)
        table = np.ones((4, 4))
        table[2, 1] = 0.0
        with pytest.raises(InvalidParameterError):
            GapField.from_cells(table, grid)

    def test_gap_faces_from_cells(self):
        grid = Grid2D(1.0, 1.0, 3, 2)
        cells = np.arange(1.0, 7.0).reshape(3, 2)
        gap = GapField.from_cells(cells, grid)
        np.testing.assert_allclose(gap.xface[1], 0.5 * (cells[0] + cells[1]))
        np.testing.assert_allclose(gap.xface[0], cells[0])
        assert gap.h_min == 1.0 and gap.h_max == 6.0

    def test_forcing_face_average_is_exact_difference(self):
        grid, _, forcing, phi = gradient_case(16)
        x, y = grid.cell_coords()
        p = phi(x, y)
        np.testing.assert_allclose(forcing.fx_face[1:-1], np.diff(p, axis=0) / grid.dx, atol=1e-12)
        np.testing.assert_allclose(forcing.fy_face[:, 1:-1], np.diff(p, axis=1) / grid.dy, atol=1e-12)

    def test_forcing_rejects_nonfinite(self):
        grid = Grid2D(1.0, 1.0, 4, 4)
        with pytest.raises(InvalidParameterError):
            ForcingField.from_function(lambda x, y: np.full_like(x, np.nan), lambda x, y: 0 * x, grid)

    def test_cell_average_of_polynomial(self):
        grid = Grid2D(1.0, 2.0, 4, 4)
        avg = cell_average(lambda x, y: x * x + y, grid)
        x, y = grid.cell_coords()
        np.testing.assert_allclose(avg, x * x + grid.dx**2 / 12 + y, rtol=1e-14)


class TestDrivingField:
    def test_zero(self):
        grid = Grid2D(1.0, 1.0, 5, 4)
        g = driving_field(PressureField.zeros(grid), ForcingField.zero(grid), grid)
        assert not g.x_normal.any() and not g.y_normal.any()
        assert not g.x_tangential.any() and not g.y_tangential.any()

    def test_gradient_cancels_forcing(self):
        grid = Grid2D(1.0, 1.0, 6, 5)
        p = PressureField.from_function(lambda x, y: x, grid)
        g = driving_field(p, ForcingField.constant(1.0, 0.0, grid), grid)
        np.testing.assert_allclose(g.x_normal[1:-1], 0.0, atol=1e-13)
        np.testing.assert_array_equal(g.y_normal, 0.0)

    def test_factor_two(self):
        grid = Grid2D(1.0, 1.0, 6, 5)
        g = driving_field(np.zeros(grid.shape), ForcingField.constant(0.3, -0.7, grid), grid)
        np.testing.assert_allclose(g.x_normal[1:-1], 0.6)
        np.testing.assert_allclose(g.y_normal[:, 1:-1], -1.4)
        # tangential components away from the boundary
        np.testing.assert_allclose(g.x_tangential[1:-1, 1:-1], -1.4)
        np.testing.assert_allclose(g.y_tangential[1:-1, 1:-1], 0.6)
        # no-flux: boundary normals are zero
        np.testing.assert_array_equal(g.x_normal[[0, -1]], 0.0)
        np.testing.assert_array_equal(g.y_normal[:, [0, -1]], 0.0)

    def test_shape_mismatch(self):
        grid = Grid2D(1.0, 1.0, 4, 4)
        with pytest.raises(InvalidParameterError):
            driving_field(np.zeros((3, 4)), ForcingField.zero(grid), grid)


class TestFaceFlux:
    def test_zero_driving(self):
        grid = Grid2D(1.0, 1.0, 4, 4)
        g = driving_field(np.zeros(grid.shape), ForcingField.zero(grid), grid)
        flux = face_flux(g, GapField.constant(1.0, grid), STD)
        assert not flux.x.any() and not flux.y.any()

    def test_newtonian_path(self):
        grid = Grid2D(1.0, 1.0, 4, 4)
        g = driving_field(np.zeros(grid.shape), ForcingField.constant(1.0, 0.0, grid), grid)
        gap = GapField.constant(0.8, grid)
        flux = face_flux(g, gap, FluidParams(2.0, 0.0, 1.5))
        np.testing.assert_allclose(flux.x[1:-1], 2.0 * 0.8**3 / 24.0, rtol=1e-15)

    def test_boundary_faces_zero(self):
        grid, gap, forcing = rotational_case(8)
        flux = face_flux(driving_field(np.zeros(grid.shape), forcing, grid), gap, STD)
        assert np.all(flux.x[[0, -1]] == 0.0) and np.all(flux.y[:, [0, -1]] == 0.0)


class TestSolver:
    def test_zero_forcing(self):
        grid = Grid2D(1.0, 1.0, 8, 8)
        p, rep = solve_pressure(GapField.constant(1.0, grid), ForcingField.zero(grid), STD, grid)
        assert rep.converged and rep.iterations == 1
        np.testing.assert_array_equal(p.values, 0.0)

    def test_gradient_forcing_absorbed(self):
        grid, gap, forcing, phi = gradient_case(32)
        for params in (STD, FluidParams(1.0, 2.0, 4.0)):
            p, rep = solve_pressure(gap, forcing, params, grid)
            assert rep.converged
            x, y = grid.cell_coords()
            ref = phi(x, y)
            np.testing.assert_allclose(p.values, ref - ref.mean(), atol=1e-7)
            flux = face_flux(driving_field(p, forcing, grid), gap, params)
            naive = face_flux(driving_field(np.zeros(grid.shape), forcing, grid), gap, params)
            assert flux.scale <= 10 * SolverConfig().picard_tol * naive.scale
            assert residual_norm(p, gap, forcing, params, grid) <= 1e-8

    def test_gradient_refinement_against_cell_averages(self):
        errs = []
        for n in (16, 32):
            grid, gap, forcing, phi = gradient_case(n)
            p, _ = solve_pressure(gap, forcing, STD, grid)
            avg = cell_average(phi, grid)
            errs.append(np.sqrt(np.mean((p.values - avg + avg.mean()) ** 2)))
        assert errs[0] / errs[1] >= 3.5

    @pytest.mark.parametrize("r", [1.2, 1.5, 2.5, 4.0])
    def test_rotational_converges(self, rotational_solutions, r):
        grid, gap, forcing, params, p, rep = rotational_solutions[r]
        assert rep.converged and rep.iterations <= 200
        assert abs(p.values.mean()) <= 1e-12 * np.abs(p.values).max()
        assert residual_norm(p, gap, forcing, params, grid) <= 1e-8
        hist = np.array(rep.residual_history)
        assert np.all(np.diff(hist[3:]) <= 0.0)

    def test_rotational_conservation(self, rotational_solutions):
        grid, gap, forcing, params, p, _ = rotational_solutions[1.5]
        flux = face_flux(driving_field(p, forcing, grid), gap, params)
        assert abs(cell_net_outflow(flux, grid).sum()) <= 1e-12 * flux.scale * grid.dy
        assert flux.scale > 1e-3  # nonzero circulating flux

    def test_unconverged_pressure_has_residual(self):
        grid, gap, forcing = rotational_case(16)
        assert residual_norm(np.zeros(grid.shape), gap, forcing, STD, grid) > 1e-2

    def test_max_iters_reports_failure(self):
        grid, gap, forcing = rotational_case(16)
        p, rep = solve_pressure(gap, forcing, STD, grid, SolverConfig(max_iters=1))
        assert not rep.converged and rep.iterations == 1
        assert np.isfinite(p.values).all()

    def test_newtonian_limit_matches_oracle(self):
        grid, gap, forcing = rotational_case(32, h=lambda x, y: 1.0 + 0.3 * x * y)
        params = FluidParams(1.0, 1e-8, 1.5)
        p, rep = solve_pressure(gap, forcing, params, grid)
        ref = newtonian_pressure(gap, forcing, grid, mu=0.5)
        assert rep.converged
        assert np.linalg.norm(p.values - ref.values) <= 1e-4 * np.linalg.norm(ref.values)

    def test_deterministic(self):
        grid, gap, forcing = rotational_case(16)
        a, _ = solve_pressure(gap, forcing, STD, grid)
        b, _ = solve_pressure(gap, forcing, STD, grid)
        np.testing.assert_array_equal(a.values, b.values)

    def test_config_validation(self):
        with pytest.raises(InvalidParameterError):
            SolverConfig(relaxation=0.0)
        with pytest.raises(InvalidParameterError):
            SolverConfig(picard_tol=-1.0)
        with pytest.raises(InvalidParameterError):
            SolverConfig(max_iters=0)

    def test_underflowing_mobility_is_singular(self):
        grid = Grid2D(1.0, 1.0, 4, 4)
        w = np.zeros((5, 4)), np.ones((4, 5))
        with pytest.raises(SingularSystemError):
            assemble_diffusion(*w, np.zeros((5, 4)), np.zeros((4, 5)), grid)


class TestMeshConvergence:
    def _errors(self, ref_n, levels):
        grid_r, gap_r, f_r = rotational_case(ref_n)
        p_ref, _ = solve_pressure(gap_r, f_r, STD, grid_r)
        errs = []
        for n in levels:
            grid, gap, forcing = rotational_case(n)
            p, _ = solve_pressure(gap, forcing, STD, grid)
            k = ref_n // n
            coarse = p_ref.values.reshape(n, k, n, k).mean(axis=(1, 3))
            errs.append(np.sqrt(np.mean((p.values - coarse) ** 2)))
        return errs

    def test_second_order_against_256(self):
        errs = self._errors(256, (32, 64))
        assert errs[0] / errs[1] >= 3.5

    @pytest.mark.slow
    def test_second_order_against_512(self):
        errs = self._errors(512, (64, 128))
        assert errs[0] / errs[1] >= 3.5
