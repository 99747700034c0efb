import math

import numpy as np
import pytest
from scipy import integrate

from schiffer.cylinder import build_cylinder_model
from schiffer.errors import AdmissibilityError, DomainError, GridMismatchError
from schiffer.fields import (
    DomainProfile,
    Field2D,
    G_of,
    Grid2D,
    RadialGrid,
    apply_Dt,
    apply_M1,
    apply_laplace_t,
    apply_pullback,
    compute_h_u,
    u_m_field,
)


@pytest.fixture(scope="module")
def grid():
    return Grid2D.make(K=48, L=16, N=2)


@pytest.fixture(scope="module")
def model():
    return build_cylinder_model(2, 1)


def mode_field(grid, mode, radial_fn, **flags):
    c = np.zeros(grid.shape)
    c[mode] = radial_fn(grid.radial.r)
    return Field2D(c, **flags)


class TestRadialGrid:
    def test_nodes(self):
        g = RadialGrid(16)
        assert g.r[0] == 0.0
        assert g.r[-1] == 1.0
        assert np.all(np.diff(g.r) > 0)

    def test_diff_matrices_exact_on_low_powers(self):
        g = RadialGrid(48)
        r = g.r
        np.testing.assert_allclose(g.D1 @ r**2, 2 * r, atol=1e-10)
        np.testing.assert_allclose(g.D1 @ r**3, 3 * r**2, atol=1e-10)
        np.testing.assert_allclose(g.D2 @ r**2, 2 * np.ones_like(r), atol=1e-10)
        np.testing.assert_allclose(g.D2 @ r**3, 6 * r, atol=1e-10)

    def test_coefficient_path_matches_matrices(self):
        g = RadialGrid(40)
        f = np.cos(3.0 * g.r) * np.exp(-g.r)
        np.testing.assert_allclose(g.d1_vals(f), g.D1 @ f, atol=1e-9)

    def test_quadrature_exact_on_polynomials(self):
        for N in (1, 2, 3):
            g = RadialGrid(24, N=N)
            for p in range(0, g.K - 1):
                exact = 1.0 / (p + N)  # int_0^1 r^p r^(N-1) dr
                assert g.integrate(g.r**p) == pytest.approx(exact, abs=1e-10)

    def test_quadrature_smooth_against_scipy(self):
        g = RadialGrid(48, N=3)
        f = lambda r: np.cos(5 * r) + r**2
        ref, _ = integrate.quad(lambda r: f(r) * r**2, 0, 1, epsabs=1e-14)
        assert g.integrate(f(g.r)) == pytest.approx(ref, abs=1e-12)

    def test_du_over_r_even_function(self):
        # u = cos(a r) even: u'/r = -a sin(a r)/r, finite at 0 with value -a^2
        g = RadialGrid(48, N=3)
        a = 4.2
        vals = g.du_over_r_vals(np.cos(a * g.r))
        ref = np.empty_like(vals)
        ref[0] = -a * a
        ref[1:] = -a * np.sin(a * g.r[1:]) / g.r[1:]
        np.testing.assert_allclose(vals, ref, atol=2e-11)

    def test_laplace_of_bessel_profile(self, model):
        # cap_i(nu, j r) solves u'' + (N-1)/r u' = -j^2 u
        g = RadialGrid(48, N=2)
        u = model.U(g.r)
        np.testing.assert_allclose(g.laplace_vals(u), -model.j_m**2 * u, atol=5e-9)

    def test_eval_at_interpolates(self):
        g = RadialGrid(32)
        f = lambda r: np.sin(2.3 * r + 0.2)
        pts = np.array([0.0, 0.123, 0.5, 0.987, 1.0])
        np.testing.assert_allclose(g.eval_at(f(g.r), pts), f(pts), atol=1e-12)

    def test_resolution_guard(self):
        with pytest.raises(DomainError):
            RadialGrid(4)


class TestXBasis:
    def test_round_trip(self, grid):
        xb = grid.xb
        rng = np.random.default_rng(3)
        c = rng.standard_normal(grid.shape)
        np.testing.assert_allclose(xb.tocoeffs(xb.tovals(c)), c, atol=1e-12)

    def test_dx_values_odd(self, grid):
        xb = grid.xb
        c = np.zeros(grid.shape)
        c[2] = 1.0
        vals = xb.dx_vals(c)
        ref = -2.0 * np.sin(2.0 * xb.theta)
        np.testing.assert_allclose(vals[:, 0], ref, atol=1e-13)
        assert abs(vals[0, 0]) < 1e-14 and abs(vals[-1, 0]) < 1e-14


class TestDtAndLaplace:
    def test_dt_of_r_squared(self, grid):
        f = mode_field(grid, 0, lambda r: r**2)
        out = apply_Dt(grid, f)
        np.testing.assert_allclose(out.coeffs[0], 2 * grid.radial.r**2, atol=1e-12)

    def test_dt_of_constant(self, grid):
        f = mode_field(grid, 0, lambda r: np.ones_like(r))
        assert apply_Dt(grid, f).max_abs() < 1e-10

    def test_dt_matches_g_profile(self, grid, model):
        f = mode_field(grid, 0, model.U)
        out = apply_Dt(grid, f)
        np.testing.assert_allclose(out.coeffs[0], model.g(grid.radial.r), atol=1e-11)

    def test_laplace_of_r_squared(self, grid):
        f = mode_field(grid, 0, lambda r: r**2)
        out = apply_laplace_t(grid, f)
        np.testing.assert_allclose(out.coeffs[0], 2 * grid.radial.N * np.ones(grid.radial.K + 1), atol=1e-11)

    def test_laplace_of_constant_and_of_U(self, grid, model):
        one = mode_field(grid, 0, lambda r: np.ones_like(r))
        assert apply_laplace_t(grid, one).max_abs() < 1e-11
        f = mode_field(grid, 0, model.U)
        out = apply_laplace_t(grid, f)
        np.testing.assert_allclose(out.coeffs[0], -model.j_m**2 * model.U(grid.radial.r), atol=5e-9)

    def test_commutation_with_dx(self, grid):
        rng = np.random.default_rng(11)
        c = rng.standard_normal(grid.shape)
        f = Field2D(c)
        dt_then_dx = grid.xb.wavenumbers[:, None] * apply_Dt(grid, f).coeffs
        dx_then_dt = apply_Dt(grid, Field2D(grid.xb.wavenumbers[:, None] * c)).coeffs
        np.testing.assert_allclose(dt_then_dx, dx_then_dt, atol=1e-11)

    def test_grid_mismatch(self, grid):
        small = Field2D(np.zeros((3, 5)))
        with pytest.raises(GridMismatchError):
            apply_Dt(grid, small)


class TestPullback:
    def test_trivial_profile_on_eigenfunction(self, grid, model):
        res = apply_pullback(grid, model.lambda_m, DomainProfile.zero(grid), u_m_field(grid, model), model)
        assert res.max_abs() < 5e-9

    def test_constant_profile_rescaled_eigenfunction(self, grid, model):
        c = 0.1
        f = mode_field(grid, 0, lambda r: model.U(r / (1.0 + c)))
        res = apply_pullback(grid, 2.0, DomainProfile.constant(grid, c), f, model)
        assert res.max_abs() < 1e-9

    def test_zero_field(self, grid, model):
        h = DomainProfile(np.r_[0.0, 0.05, np.zeros(grid.xb.L - 1)])
        res = apply_pullback(grid, 1.0, h, Field2D.zero(grid), model)
        assert res.max_abs() == 0.0

    def test_admissibility_guard(self, grid, model):
        with pytest.raises(AdmissibilityError):
            apply_pullback(grid, 1.0, DomainProfile.constant(grid, -1.5), Field2D.zero(grid), model)


class TestEliminationMap:
    def test_h_u_of_zero(self, grid, model):
        h = compute_h_u(grid, model, Field2D.zero(grid, dirichlet=True))
        assert np.max(np.abs(h.coeffs)) == 0.0

    def test_h_u_of_kernel_field(self, grid, model):
        s = 0.7
        f = mode_field(grid, 1, lambda r: s * model.phi1(r), dirichlet=True)
        h = compute_h_u(grid, model, f)
        expected = -s * model.j_dir**2 * float(
            __import__("schiffer.specfun", fromlist=["cap_i"]).cap_i(model.N / 2.0, model.j_dir)
        ) * model.c_m
        assert h.coeffs[1] == pytest.approx(expected, rel=1e-10)
        assert np.max(np.abs(np.delete(h.coeffs, 1))) < 1e-12

    def test_h_u_zero_when_normal_derivative_zero(self, grid, model):
        f = mode_field(grid, 2, lambda r: (1.0 - r**2) ** 2, dirichlet=True)
        h = compute_h_u(grid, model, f)
        assert np.max(np.abs(h.coeffs)) < 1e-10

    def test_requires_dirichlet_flag(self, grid, model):
        with pytest.raises(DomainError):
            compute_h_u(grid, model, Field2D.zero(grid))

    def test_M1_inverts_N(self, grid, model):
        # M applied to w + g h must recover (w, h)
        rng = np.random.default_rng(5)
        g_prof = model.g(grid.radial.r)
        w = np.zeros(grid.shape)
        for q in range(grid.xb.L + 1):
            w[q] = (1.0 - grid.radial.r**2) ** 2 * np.cos(1.7 * grid.radial.r + 0.3 * q)
        w *= 0.1
        h = DomainProfile(0.05 * rng.standard_normal(grid.xb.L + 1))
        u = Field2D(w + h.coeffs[:, None] * g_prof[None, :], dirichlet=True)
        h_rec = compute_h_u(grid, model, u)
        np.testing.assert_allclose(h_rec.coeffs, h.coeffs, atol=1e-10)
        w_rec = apply_M1(grid, model, u)
        np.testing.assert_allclose(w_rec.coeffs, w, atol=1e-10)

    def test_M1_output_flags(self, grid, model):
        rng = np.random.default_rng(8)
        c = 0.1 * rng.standard_normal(grid.shape)
        c[:, -1] = 0.0
        out = apply_M1(grid, model, Field2D(c, dirichlet=True))
        assert out.dirichlet and out.neumann
        du = grid.radial.d1_vals(out.coeffs)
        assert np.max(np.abs(grid.radial.r[-1] * du[:, -1])) < 1e-8

    def test_gh_field_maps_to_zero(self, grid, model):
        h = np.zeros(grid.xb.L + 1)
        h[1] = 1.0
        u = Field2D(h[:, None] * model.g(grid.radial.r)[None, :], dirichlet=True)
        h_u = compute_h_u(grid, model, u)
        assert h_u.coeffs[1] == pytest.approx(1.0, abs=1e-11)
        assert apply_M1(grid, model, u).max_abs() < 1e-10


class TestReducedMap:
    def test_trivial_branch(self, grid, model):
        for lam in (0.5 * model.lambda_m, model.lambda_m, 2.0 * model.lambda_m):
            res = G_of(grid, model, lam, Field2D.zero(grid, dirichlet=True))
            assert res.max_abs() < 1e-10

    def test_quadratic_in_kernel_direction(self, grid, model):
        # ||G(eps v*)|| = O(eps^2): halving eps quarters the norm
        norms = {}
        for eps in (1e-2, 5e-3):
            u = mode_field(grid, 1, lambda r: eps * model.phi1(r), dirichlet=True)
            norms[eps] = G_of(grid, model, model.lambda_m, u).max_abs()
        ratio = norms[1e-2] / norms[5e-3]
        assert 3.0 < ratio < 5.0

    def test_linear_in_nonkernel_direction(self, grid, model):
        # for w outside the kernel, ||G(eps w)||/eps approaches ||L w|| > 0
        w = mode_field(grid, 2, lambda r: 1.0 - r**2, dirichlet=True)
        vals = {}
        for eps in (1e-3, 5e-4):
            u = Field2D(eps * w.coeffs, dirichlet=True)
            vals[eps] = G_of(grid, model, model.lambda_m, u).max_abs() / eps
        assert vals[1e-3] == pytest.approx(vals[5e-4], rel=1e-2)
        assert vals[5e-4] > 1.0


class TestSerialization:
    def test_field_round_trip(self, grid):
        rng = np.random.default_rng(1)
        f = Field2D(rng.standard_normal(grid.shape))
        data = f.to_json(grid)
        assert data["K"] == grid.radial.K and data["L"] == grid.xb.L
        g = Field2D.from_json(data)
        np.testing.assert_array_equal(g.coeffs, f.coeffs)

    def test_profile_json(self, grid):
        p = DomainProfile.constant(grid, 0.3)
        assert p.to_json()["coefficients"][0] == 0.3
