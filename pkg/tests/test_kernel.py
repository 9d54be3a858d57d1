import cmath
import math

import numpy as np
import pytest

from fwdiss.core import (
    DomainError,
    Field,
    Grid,
    Params,
    ResolutionError,
    lq_norm,
    moment,
    decay_exponent,
)
from fwdiss.kernel import (
    SymbolForm,
    apply_semigroup,
    g0_deriv,
    g0_deriv_field,
    g0_time_deriv_field,
    gap_rate_exponent,
    gauss_deriv,
    kernel_gap,
    symbol,
    symbol_form,
    synthesize_kernel,
)

UNIT = Params(2.5, 1.0, 1.0, 1.0)


class TestSymbol:
    def test_zero_frequency_identity(self):
        assert symbol(0.0, 5.0, UNIT) == 1.0 + 0.0j

    def test_conjugate_symmetry(self):
        xi = np.linspace(0.1, 30, 50)
        a = symbol(xi, 2.0, UNIT)
        b = symbol(-xi, 2.0, UNIT)
        assert np.max(np.abs(b - np.conj(a))) < 1e-15

    def test_closed_form_value(self):
        # mu=B=b=t=1, xi=1, lab frame: exponent -1 - 2i/(1+1) = -1 - i
        want = cmath.exp(-1.0 - 1.0j)
        got = complex(symbol(1.0, 1.0, UNIT, frame="lab"))
        assert got == pytest.approx(want, rel=1e-15)

    def test_modulus_is_heat_factor(self):
        xi = np.linspace(-20, 20, 101)
        for frame in ("lab", "comoving"):
            s = symbol(xi, 3.0, UNIT, frame=frame)
            assert np.max(np.abs(np.abs(s) - np.exp(-3.0 * xi**2))) < 1e-14

    def test_negative_time_rejected(self):
        with pytest.raises(DomainError):
            symbol(1.0, -0.1, UNIT)

    def test_form_equivalence(self):
        # The three rewritings agree pointwise; phase cancellation costs
        # ~|alpha t xi| ulps, so the tolerance is loosened at large t.
        params = Params(2.7, 1.3, 0.9, 1.1)
        xi = np.linspace(-32, 32, 2001)
        for t, tol in ((0.5, 1e-14), (10.0, 1e-14), (1000.0, 2e-13)):
            vals = [symbol_form(xi, t, params, form) for form in SymbolForm]
            for v in vals[1:]:
                assert np.max(np.abs(v - vals[0])) < tol

    def test_comoving_is_drift_phase_times_lab(self):
        xi = np.linspace(-5, 5, 41)
        t = 2.5
        lab = symbol(xi, t, UNIT, frame="lab")
        com = symbol(xi, t, UNIT, frame="comoving")
        assert np.max(np.abs(com - lab * np.exp(1j * UNIT.alpha * t * xi))) < 1e-13


class TestSemigroup:
    def setup_method(self):
        # box wide enough that the dispersive tail stays below the
        # boundary-decay threshold of the moment check
        self.grid = Grid(60.0, 4096, "lab")
        self.f = Field(self.grid, 0.3 * np.exp(-0.5 * self.grid.x**2))

    def test_time_zero_identity(self):
        out = apply_semigroup(self.f, 0.0, UNIT)
        assert np.max(np.abs(out.values - self.f.values)) < 1e-12

    def test_mass_conserved(self):
        out = apply_semigroup(self.f, 4.0, UNIT)
        assert moment(out, 0) == pytest.approx(moment(self.f, 0), abs=1e-12)

    def test_semigroup_law(self):
        one = apply_semigroup(self.f, 3.0, UNIT)
        two = apply_semigroup(apply_semigroup(self.f, 1.2, UNIT), 1.8, UNIT)
        scale = lq_norm(one, math.inf)
        assert np.max(np.abs(one.values - two.values)) < 1e-10 * scale


class TestGaussians:
    def test_peak_value(self):
        assert gauss_deriv(0.0, 1.0, 1.0, 0) == pytest.approx(
            1.0 / math.sqrt(4.0 * math.pi), rel=1e-14
        )

    def test_first_derivative_odd(self):
        assert gauss_deriv(0.0, 1.0, 1.0, 1) == 0.0
        x = np.linspace(0.1, 5, 20)
        assert np.max(np.abs(gauss_deriv(-x, 1.0, 1.0, 1) + gauss_deriv(x, 1.0, 1.0, 1))) == 0.0

    def test_second_derivative_against_finite_differences(self):
        # oracle: centered second difference of the closed kernel, step 1e-5
        # (cancellation of the ~0.28-sized samples leaves ~1e-6 oracle noise)
        h = 1e-5
        fd = (
            gauss_deriv(h, 1.0, 1.0, 0)
            - 2 * gauss_deriv(0.0, 1.0, 1.0, 0)
            + gauss_deriv(-h, 1.0, 1.0, 0)
        ) / h**2
        closed = gauss_deriv(0.0, 1.0, 1.0, 2)
        assert closed == pytest.approx(-0.5 / math.sqrt(4.0 * math.pi), rel=1e-12)
        assert fd == pytest.approx(closed, abs=1e-6)

    def test_third_derivative_against_finite_differences(self):
        h = 1e-3
        x0 = 0.7
        fd = (
            gauss_deriv(x0 + 2 * h, 1.0, 1.0, 0)
            - 2 * gauss_deriv(x0 + h, 1.0, 1.0, 0)
            + 2 * gauss_deriv(x0 - h, 1.0, 1.0, 0)
            - gauss_deriv(x0 - 2 * h, 1.0, 1.0, 0)
        ) / (2 * h**3)
        assert fd == pytest.approx(gauss_deriv(x0, 1.0, 1.0, 3), abs=1e-6)

    def test_time_must_be_positive(self):
        with pytest.raises(DomainError):
            gauss_deriv(0.0, 0.0, 1.0, 0)

    def test_drift_peak(self):
        # peak of the drifting kernel sits at x = (2B/b) t
        t = 3.0
        assert g0_deriv(UNIT.alpha * t, t, UNIT, 0) == pytest.approx(
            1.0 / math.sqrt(4.0 * math.pi * t), rel=1e-14
        )

    def test_unit_mass_on_grid(self):
        g = Grid(60.0, 4096, "lab")
        assert moment(g0_deriv_field(g, 2.0, UNIT, 0), 0) == pytest.approx(1.0, abs=1e-10)

    def test_norms_translation_invariant(self):
        # q=2 is a rectangle rule (spectrally accurate under shift); the
        # sampled sup norm carries an O(dx^2) max-location bias
        g = Grid(60.0, 4096, "lab")
        gc = g.with_frame("comoving")
        t = 2.0
        for l in (0, 1, 2, 3):
            a2 = lq_norm(g0_deriv_field(g, t, UNIT, l), 2)
            b2 = lq_norm(g0_deriv_field(gc, t, UNIT, l), 2)
            assert a2 == pytest.approx(b2, rel=1e-10)
            ai = lq_norm(g0_deriv_field(g, t, UNIT, l), math.inf)
            bi = lq_norm(g0_deriv_field(gc, t, UNIT, l), math.inf)
            assert ai == pytest.approx(bi, rel=5e-4)

    def test_heat_kernel_exact_self_similarity(self):
        # t^{(1/2)(1-1/q)+l/2} || dx^l G0 ||_2 is constant in t
        g = Grid(80.0, 8192, "comoving")
        for l in (0, 1, 2, 3):
            vals = [
                t ** (decay_exponent(2) + l / 2) * lq_norm(g0_deriv_field(g, t, UNIT, l), 2)
                for t in (1.0, 4.0, 16.0)
            ]
            assert max(vals) - min(vals) < 1e-9 * max(vals)

    def test_time_derivative_scaled_norms_bounded(self):
        # dt G0 mixes the drift (-alpha dx G0, exactly self-similar) with the
        # heat part (mu dx^2 G0, one power faster); the scaled norm is
        # bounded and decreasing, settling at alpha ||dx G(., 1)||_q
        g = Grid(120.0, 8192, "lab")  # drift alpha*t stays inside the box
        for q in (2, math.inf):
            vals = [
                t ** (decay_exponent(q) + 0.5) * lq_norm(g0_time_deriv_field(g, t, UNIT), q)
                for t in (1.0, 4.0, 16.0)
            ]
            assert all(b <= a * (1 + 1e-9) for a, b in zip(vals, vals[1:]))
            limit = UNIT.alpha * lq_norm(g0_deriv_field(g, 1.0, UNIT, 1), q)
            assert vals[-1] == pytest.approx(limit, rel=0.15)
            assert max(vals) <= 1.6 * limit


class TestKernelGap:
    GRID = Grid(400.0, 8192, "comoving")

    def test_resolution_guard(self):
        with pytest.raises(ResolutionError):
            kernel_gap(1e-4, 0, 2, 1, UNIT, self.GRID)

    def test_vanishing_dispersion(self):
        weak = Params(2.5, 1e-8, 1.0, 1.0)
        gap = kernel_gap(100.0, 0, 2, 1, weak, self.GRID)
        assert gap < 1e-8 * lq_norm(g0_deriv_field(self.GRID, 100.0, weak, 0), 2)

    @pytest.mark.parametrize("q", [2, math.inf])
    def test_first_order_rate(self, q):
        from fwdiss.analysis import rate_fit

        params = Params(2.5, 2.0, 2.0, 2.0)
        grid = Grid(600.0, 8192, "comoving")
        times = np.geomspace(10, 1000, 12)
        fit = rate_fit([(t, kernel_gap(float(t), 0, q, 1, params, grid)) for t in times])
        assert fit.slope == pytest.approx(gap_rate_exponent(0, q, 1), abs=0.05)

    def test_second_order_rate(self):
        from fwdiss.analysis import rate_fit

        params = Params(2.5, 2.0, 2.0, 2.0)
        grid = Grid(600.0, 8192, "comoving")
        times = np.geomspace(10, 1000, 12)
        fit = rate_fit([(t, kernel_gap(float(t), 0, 2, 2, params, grid)) for t in times])
        assert fit.slope == pytest.approx(gap_rate_exponent(0, 2, 2), abs=0.05)

    def test_frame_consistency(self):
        # lab kernel equals the co-moving kernel rolled by the drift when the
        # drift is a whole number of grid cells
        grid_lab = Grid(200.0, 4096, "lab")
        grid_com = grid_lab.with_frame("comoving")
        dx = grid_lab.dx
        shift_cells = 1024
        t = shift_cells * dx / UNIT.alpha
        lab = synthesize_kernel(grid_lab, t, UNIT)
        com = synthesize_kernel(grid_com, t, UNIT)
        rolled = np.roll(com.values, shift_cells)
        assert np.max(np.abs(lab.values - rolled)) < 1e-10

    def test_propagator_scaled_norms_bounded(self):
        # || d^l T(t) ||_q t^{(1/2)(1-1/q)+l/2} stays bounded on [1, 1e3] and
        # approaches the self-similar heat constant
        for l in (0, 1):
            for q in (2, math.inf):
                seq = []
                for t in np.geomspace(1, 1000, 10):
                    k = synthesize_kernel(self.GRID, float(t), UNIT, l=l)
                    seq.append(t ** (decay_exponent(q) + l / 2) * lq_norm(k, q))
                limit = lq_norm(g0_deriv_field(self.GRID, 1.0, UNIT, l), q)
                assert max(seq) <= 2.0 * limit
                assert seq[-1] == pytest.approx(limit, rel=0.05)
