import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fwdiss.core import (
    ConfigurationError,
    DomainError,
    Field,
    Grid,
    Params,
    TruncationWarning,
    inverse_transform,
    lq_norm,
    moment,
    transform,
)
from fwdiss.kernel import gauss_deriv


@pytest.fixture
def grid():
    return Grid(40.0, 4096, "comoving")


def gaussian_field(grid, mu=1.0, t=1.0):
    return Field(grid, gauss_deriv(grid.x, t, mu, 0))


class TestParamsAndGrid:
    def test_params_validation(self):
        with pytest.raises(ConfigurationError):
            Params(p=2.0)
        with pytest.raises(ConfigurationError):
            Params(p=2.5, B=0.0)
        with pytest.raises(ConfigurationError):
            Params(p=2.5, mu=-1.0)
        assert Params(3.0, B=2.0, b=4.0).alpha == 1.0

    def test_grid_requires_power_of_two(self):
        with pytest.raises(ConfigurationError):
            Grid(10.0, 100)
        with pytest.raises(ConfigurationError):
            Grid(10.0, 4)
        with pytest.raises(ConfigurationError):
            Grid(-1.0, 64)

    def test_grid_nodes_and_wavenumbers(self):
        g = Grid(8.0, 16)
        assert g.dx == 1.0
        assert g.x[0] == -8.0
        np.testing.assert_allclose(np.diff(g.x), 1.0)
        # xi_k = pi k / L in FFT order
        assert g.xi[0] == 0.0
        assert g.xi[1] == pytest.approx(np.pi / 8.0)
        assert g.xi[-1] == pytest.approx(-np.pi / 8.0)
        assert g.xi_max == pytest.approx(np.pi)


class TestTransform:
    def test_zero_field(self, grid):
        s = transform(Field(grid, np.zeros(grid.n)))
        assert np.all(s.coeffs == 0)

    def test_round_trip_identity(self, grid):
        rng = np.random.default_rng(42)
        f = Field(grid, rng.standard_normal(grid.n))
        back = inverse_transform(transform(f))
        assert np.max(np.abs(back.values - f.values)) < 1e-12 * grid.n

    def test_gaussian_coefficients_match_closed_form(self):
        # Fourier transform of the heat kernel at t=1, mu=1 is exp(-xi^2)/sqrt(2 pi)
        g = Grid(40.0, 4096)
        s = transform(gaussian_field(g))
        expected = np.exp(-g.xi**2) / math.sqrt(2.0 * math.pi)
        assert np.max(np.abs(s.coeffs - expected)) < 1e-8

    def test_conjugate_symmetry_for_real_fields(self, grid):
        rng = np.random.default_rng(7)
        s = transform(Field(grid, rng.standard_normal(grid.n)))
        n = grid.n
        k = np.arange(1, n // 2)
        assert np.max(np.abs(s.coeffs[n - k] - np.conj(s.coeffs[k]))) < 1e-12

    def test_parseval(self, grid):
        rng = np.random.default_rng(3)
        f = Field(grid, rng.standard_normal(grid.n))
        s = transform(f)
        lhs = np.sum(np.abs(s.coeffs) ** 2) * (np.pi / grid.length)
        rhs = np.sum(f.values**2) * grid.dx
        assert abs(lhs - rhs) <= 1e-10 * rhs


class TestNorms:
    def test_zero_field(self, grid):
        z = Field(grid, np.zeros(grid.n))
        assert lq_norm(z, 2) == 0.0
        assert lq_norm(z, math.inf) == 0.0

    def test_gaussian_sup_norm_is_peak(self, grid):
        # peak of the heat kernel at t=1 is (4 pi)^(-1/2)
        f = gaussian_field(grid)
        assert lq_norm(f, math.inf) == pytest.approx(1.0 / math.sqrt(4.0 * math.pi), rel=1e-12)

    def test_gaussian_l2_matches_quadrature_oracle(self, grid):
        # oracle: trapezoid quadrature of G(x,1)^2 on a fine independent axis
        x = np.linspace(-30, 30, 400001)
        oracle = math.sqrt(np.trapezoid(gauss_deriv(x, 1.0, 1.0, 0) ** 2, x))
        assert oracle == pytest.approx((8.0 * math.pi) ** -0.25, rel=1e-12)
        f = gaussian_field(grid)
        assert lq_norm(f, 2) == pytest.approx(oracle, rel=1e-10)

    def test_invalid_q(self, grid):
        with pytest.raises(DomainError):
            lq_norm(gaussian_field(grid), 0.5)

    @given(
        c=st.one_of(st.just(0.0), st.floats(1e-6, 100), st.floats(-100, -1e-6)),
        q=st.sampled_from([1, 2, 3.5, math.inf]),
    )
    @settings(max_examples=25, deadline=None)
    def test_absolute_homogeneity(self, c, q):
        g = Grid(20.0, 256)
        rng = np.random.default_rng(11)
        v = rng.standard_normal(g.n)
        assert lq_norm(Field(g, c * v), q) == pytest.approx(
            abs(c) * lq_norm(Field(g, v), q), rel=1e-12, abs=1e-300
        )

    @given(q=st.floats(2.1, 40.0))
    @settings(max_examples=25, deadline=None)
    def test_interpolation_inequality(self, q):
        g = Grid(20.0, 512)
        rng = np.random.default_rng(5)
        f = Field(g, rng.standard_normal(g.n) * np.exp(-0.1 * g.x**2))
        bound = lq_norm(f, math.inf) ** (1 - 2 / q) * lq_norm(f, 2) ** (2 / q)
        assert lq_norm(f, q) <= bound * (1 + 1e-12)


class TestMoments:
    def test_heat_kernel_unit_mass(self, grid):
        assert moment(gaussian_field(grid), 0) == pytest.approx(1.0, abs=1e-10)

    def test_derivative_zero_mass(self, grid):
        f = Field(grid, gauss_deriv(grid.x, 1.0, 1.0, 1))
        assert abs(moment(f, 0)) < 1e-10

    def test_first_moment_of_x_weighted_gaussian(self, grid):
        # oracle: independent quadrature of x^2 G(x,1) = second Gaussian moment 2 mu t
        x = np.linspace(-30, 30, 400001)
        oracle = np.trapezoid(x**2 * gauss_deriv(x, 1.0, 1.0, 0), x)
        assert oracle == pytest.approx(2.0, abs=1e-12)
        f = Field(grid, grid.x * gauss_deriv(grid.x, 1.0, 1.0, 0))
        assert moment(f, 1) == pytest.approx(2.0, abs=1e-10)

    def test_boundary_truncation_warning(self):
        g = Grid(5.0, 64)
        with pytest.warns(TruncationWarning):
            moment(Field(g, np.ones(g.n)), 0)

    def test_bad_order(self, grid):
        with pytest.raises(DomainError):
            moment(gaussian_field(grid), 2)


class TestFieldValidation:
    def test_shape_mismatch(self, grid):
        with pytest.raises(ConfigurationError):
            Field(grid, np.zeros(7))

    def test_nonfinite_rejected(self, grid):
        v = np.zeros(grid.n)
        v[0] = np.nan
        with pytest.raises(ConfigurationError):
            Field(grid, v)
