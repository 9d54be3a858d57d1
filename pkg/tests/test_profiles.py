import math

import numpy as np
import pytest

from fwdiss.core import ConfigurationError, DomainError, Field, Grid, Params, lq_norm, moment
from fwdiss.kernel import g0_deriv_field, gauss_deriv
from fwdiss.profiles import (
    CRITICAL,
    SUBCRITICAL,
    SUPERCRITICAL,
    IntegrableSingularityWarning,
    ProfileSpec,
    W_p,
    duhamel_selfsim_check,
    default_scheme,
    gaussian_power_mass,
    regime_of,
    similarity_profile,
    theorem_profile,
    theorem_profile_field,
    w_p,
    w_p_bruteforce,
    w_p_field,
)

P25 = Params(2.5, 1.0, 1.0, 1.0)


class TestRegimes:
    def test_classification(self):
        assert regime_of(2.5) == SUBCRITICAL
        assert regime_of(3.0) == CRITICAL
        assert regime_of(4.0) == SUPERCRITICAL

    def test_spec_consistency(self):
        with pytest.raises(ConfigurationError):
            ProfileSpec(params=P25, M=1.0, regime=CRITICAL)

    def test_supercritical_requires_calm(self):
        with pytest.raises(ConfigurationError):
            ProfileSpec(params=Params(4.0), M=1.0)
        ProfileSpec(params=Params(4.0), M=1.0, calM=0.1)  # ok


class TestGaussianPowerMass:
    @pytest.mark.parametrize("tau", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("mu", [1.0, 0.7])
    def test_cube_mass_constant(self, tau, mu):
        # mass of G^3 on the grid against tau^-1/(4 sqrt(3) pi mu)
        g = Grid(30.0, 4096)
        cube = Field(g, gauss_deriv(g.x, tau, mu, 0) ** 3)
        want = tau**-1 / (4.0 * math.sqrt(3.0) * math.pi * mu)
        assert gaussian_power_mass(tau, 3.0, mu) == pytest.approx(want, rel=1e-14)
        assert moment(cube, 0) == pytest.approx(want, rel=1e-10)


class TestWp:
    def test_odd_and_zero_at_origin(self):
        assert w_p(0.0, P25) == 0.0
        x = np.linspace(0.25, 4, 8)
        assert np.max(np.abs(w_p(-x, P25) + w_p(x, P25))) < 1e-12

    def test_zero_mean_on_grid(self):
        g = Grid(40.0, 2048)
        vals = w_p(g.x, P25)
        assert abs(np.sum(vals) * g.dx) < 1e-12

    def test_matches_bruteforce_subcritical(self):
        # independent schemes on both sides: substituted production quadrature
        # vs graded-panel definitional double quadrature
        got = w_p(1.0, P25)
        ref = w_p_bruteforce(1.0, P25)
        assert got == pytest.approx(ref, abs=1e-7)

    @pytest.mark.parametrize("p_val", [3.0, 4.0])
    def test_matches_bruteforce_shared_scheme(self, p_val):
        # divergent endpoint: both routes must regularize on the same nodes
        params = Params(p_val)
        scheme = default_scheme(params)
        xs = np.array([0.5, 1.0, 2.0])
        got = w_p(xs, params, scheme=scheme)
        ref = w_p_bruteforce(xs, params, scheme=scheme)
        assert np.max(np.abs(got - ref)) < 1e-7

    def test_bruteforce_warns_without_scheme_above_critical(self):
        with pytest.warns(IntegrableSingularityWarning):
            w_p_bruteforce(1.0, Params(3.5))


class TestWpScaling:
    def test_center_value_zero(self):
        spec = ProfileSpec(params=P25, M=0.3)
        t = 7.0
        assert W_p(P25.alpha * t, t, spec) == 0.0

    def test_norm_scaling_law(self):
        # ||W_p(., t)||_q = t^{-(1/2)(1-1/q)-(p-2)/2} ||w_p||_q
        spec = ProfileSpec(params=P25, M=0.3)
        g = Grid(120.0, 8192, "comoving")
        ref = Grid(120.0, 8192, "comoving")
        w1 = lq_norm(w_p_field(ref, 1.0, spec), 2)
        for t in (4.0, 16.0):
            wt = lq_norm(w_p_field(g, t, spec), 2)
            assert wt == pytest.approx(t ** -(0.25 + 0.25) * w1, rel=1e-6)

    def test_unit_time_identity(self):
        spec = ProfileSpec(params=P25, M=0.3)
        g = Grid(40.0, 1024, "comoving")
        np.testing.assert_allclose(w_p_field(g, 1.0, spec).values, w_p(g.x, P25), rtol=0, atol=1e-14)

    def test_exact_self_similarity(self):
        # W_p(x, lam t) * lam^{(p-1)/2} = w_p((x - alpha lam t)/sqrt(lam t))
        spec = ProfileSpec(params=P25, M=0.3)
        x = np.linspace(-3, 3, 11)
        for lam in (2.0, 9.0):
            t = lam * 1.0
            lhs = W_p(x + P25.alpha * t, t, spec) * lam ** ((P25.p - 1) / 2)
            rhs = w_p(x / math.sqrt(t), P25)
            np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-13)


class TestTheoremProfile:
    def test_zero_mass_degenerate(self):
        g = Grid(40.0, 512, "comoving")
        for params, calm in ((P25, None), (Params(3.0), None), (Params(4.0), 0.0)):
            spec = ProfileSpec(params=params, M=0.0, m=0.0, calM=calm)
            vals = theorem_profile_field(g, 5.0, spec).values
            assert np.all(vals == 0.0)

    def test_supercritical_cancellation(self):
        # m = -calM and vanishing dispersion leave only the leading term
        params = Params(4.0, B=1e-12)
        spec = ProfileSpec(params=params, M=0.5, m=-0.25, calM=0.25)
        g = Grid(40.0, 1024, "comoving")
        got = theorem_profile_field(g, 3.0, spec).values
        lead = 0.5 * g0_deriv_field(g, 3.0, params, 0).values
        assert np.max(np.abs(got - lead)) < 1e-10 * np.max(np.abs(lead))

    def test_critical_correction_peak(self):
        # at t = e the log factor is 1; correction peak is the composed closed form
        mu = 1.0
        spec = ProfileSpec(params=Params(3.0, mu=mu), M=1.0)
        g = Grid(60.0, 8192, "comoving")
        t = math.e
        prof = theorem_profile_field(g, t, spec).values
        lead = g0_deriv_field(g, t, spec.params, 0).values
        corr_peak = np.max(np.abs(prof - lead))
        want = (1.0 / (4.0 * math.sqrt(3.0) * math.pi * mu)) * np.max(
            np.abs(gauss_deriv(g.x, t, mu, 1))
        )
        assert corr_peak == pytest.approx(want, rel=1e-12)

    def test_critical_requires_t_above_one(self):
        spec = ProfileSpec(params=Params(3.0), M=1.0)
        with pytest.raises(DomainError):
            theorem_profile(0.0, 1.0, spec)

    def test_lab_and_field_agree(self):
        spec = ProfileSpec(params=P25, M=0.4)
        g = Grid(60.0, 1024, "lab")
        t = 4.0
        vals = theorem_profile_field(g, t, spec).values
        direct = theorem_profile(g.x, t, spec)
        np.testing.assert_allclose(vals, direct, rtol=0, atol=1e-15)


class TestDuhamelSelfSimilarity:
    GRID = Grid(40.0, 4096, "comoving")

    def test_zero_mass(self):
        spec = ProfileSpec(params=P25, M=0.0)
        chk = duhamel_selfsim_check(4.0, spec, self.GRID)
        assert chk.distance == 0.0

    @pytest.mark.parametrize("t", [1.0, 4.0, 16.0])
    def test_subcritical_identity(self, t):
        spec = ProfileSpec(params=P25, M=0.1)
        chk = duhamel_selfsim_check(t, spec, self.GRID)
        assert chk.rel_distance < 1e-4
        assert chk.distance <= 1e-5 * lq_norm(
            Field(self.GRID, (t ** -((P25.p - 1) / 2)) * w_p(self.GRID.x / math.sqrt(t), P25)),
            2,
        )

    def test_refinement_reduces_distance(self):
        # distance is quadrature-limited, not a profile mismatch
        spec = ProfileSpec(params=P25, M=0.1)
        coarse = duhamel_selfsim_check(16.0, spec, self.GRID, refine=0)
        fine = duhamel_selfsim_check(16.0, spec, self.GRID, refine=1)
        assert fine.distance <= coarse.distance * 1.05
        assert fine.rel_distance < 1e-6

    def test_undifferentiated_identity(self):
        # same change of variables without the outer derivative
        spec = ProfileSpec(params=P25, M=0.1)
        for t in (1.0, 4.0, 16.0):
            chk = duhamel_selfsim_check(t, spec, self.GRID, l=0)
            assert chk.rel_distance < 1e-5

    def test_warns_above_critical(self):
        spec = ProfileSpec(params=Params(3.0), M=0.1)
        with pytest.warns(IntegrableSingularityWarning):
            duhamel_selfsim_check(2.0, spec, self.GRID)


class TestParity:
    def test_lead_even_and_cubic_odd_about_center(self):
        # G0 is even about x = (2B/b) t, its third derivative odd
        t = 3.0
        y = np.linspace(0.1, 6, 25)
        c = P25.alpha * t
        from fwdiss.kernel import g0_deriv

        even_gap = np.abs(g0_deriv(c + y, t, P25, 0) - g0_deriv(c - y, t, P25, 0))
        odd_gap = np.abs(g0_deriv(c + y, t, P25, 3) + g0_deriv(c - y, t, P25, 3))
        assert np.max(even_gap) < 1e-15
        assert np.max(odd_gap) < 1e-15


class TestSimilarityProfileQuadrature:
    def test_effective_time_range(self):
        s = default_scheme(P25)
        v = 1.0 - s.s_nodes * (1.0 - 1.0 / P25.p)
        assert np.all(v > 1.0 / P25.p - 1e-12)
        assert np.all(v <= 1.0)

    def test_profile_decays(self):
        assert abs(w_p(25.0, P25)) < 1e-30
        assert similarity_profile(40.0, P25, l=0) == 0.0
