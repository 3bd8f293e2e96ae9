import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracle_helpers import (
    box_cutoff_density,
    box_free_density,
    brute_band_density,
    brute_cutoff_density,
    brute_free_density,
)
from vpwaves.densities import (
    QuadratureSettings,
    integrate_sqrt_singular,
    rho_minus,
    rho_plus_inf,
    rho_plus_trapped,
    rho_shock_plus,
)
from vpwaves.model import Marginal, PlasmaParams, TrappedMarginal


class TestFreeDensity:
    def test_zero_potential_gives_mass(self, s25_marginals, unit_params):
        g_plus, _ = s25_marginals
        assert rho_plus_inf(g_plus, unit_params, 0.0) == pytest.approx(
            g_plus.mass(), rel=1e-12)

    def test_box_closed_form(self, s25_marginals, unit_params):
        g_plus, _ = s25_marginals
        for phi in (0.01, 0.1, 0.5, 1.0, 3.0):
            want = box_free_density(g_plus.pieces, 0.0, 2.0 * phi)
            got = rho_plus_inf(g_plus, unit_params, phi)
            assert got == pytest.approx(want, rel=1e-10), phi

    def test_matches_midpoint_brute(self, s25_marginals, unit_params):
        g_plus, _ = s25_marginals
        got = rho_plus_inf(g_plus, unit_params, 0.7)
        want = brute_free_density(g_plus, 0.0, 2.0 * 0.7, 400_000)
        assert got == pytest.approx(want, rel=1e-6)

    def test_vector_and_scalar_shapes(self, s25_marginals, unit_params):
        g_plus, _ = s25_marginals
        scalar = rho_plus_inf(g_plus, unit_params, 0.25)
        assert isinstance(scalar, float)
        arr = rho_plus_inf(g_plus, unit_params, np.array([0.0, 0.25, 1.0]))
        assert arr.shape == (3,)
        assert arr[1] == pytest.approx(scalar)

    def test_rejects_negative_phi(self, s25_marginals, unit_params):
        g_plus, _ = s25_marginals
        with pytest.raises(ValueError):
            rho_plus_inf(g_plus, unit_params, -0.1)

    def test_coupling_scales_argument(self, s25_marginals):
        # doubling q_plus at half phi leaves the density unchanged
        g_plus, _ = s25_marginals
        a = rho_plus_inf(g_plus, PlasmaParams(q_plus=2.0), 0.5)
        b = rho_plus_inf(g_plus, PlasmaParams(), 1.0)
        assert a == pytest.approx(b, rel=1e-12)

    def test_maxwellian_against_brute(self, unit_params):
        g = Marginal.maxwellian(mass=1.0, center=0.0, kappa=2.0)
        got = rho_plus_inf(g, unit_params, 0.4)
        want = brute_free_density(g, 0.0, 0.8, 2_000_000)
        assert got == pytest.approx(want, rel=3e-6)


class TestCutoffDensity:
    def test_zero_potential_gives_mass(self, s25_marginals, unit_params):
        _, g_minus = s25_marginals
        assert rho_minus(g_minus, unit_params, 0.0) == pytest.approx(
            g_minus.mass(), rel=1e-12)

    def test_box_closed_form(self, s25_marginals, unit_params):
        _, g_minus = s25_marginals
        for phi in (1e-4, 0.01, 0.2, 0.8, 1.3, 4.0):
            want = box_cutoff_density(g_minus.pieces, 0.0, 2.0 * phi)
            got = rho_minus(g_minus, unit_params, phi)
            assert got == pytest.approx(want, rel=1e-10), phi

    def test_band_edge_on_box_corner(self, s25_marginals, unit_params):
        # at phi = 1 the band edge lands exactly on the outer box corner;
        # sqrt(edge^2 - c) is infinitely ill conditioned there, so any
        # evaluation is only good to ~sqrt(ulp) in absolute terms
        _, g_minus = s25_marginals
        want = box_cutoff_density(g_minus.pieces, 0.0, 2.0)
        got = rho_minus(g_minus, unit_params, 1.0)
        assert got == pytest.approx(want, abs=1e-7)

    def test_matches_substituted_brute(self, s25_marginals, unit_params):
        _, g_minus = s25_marginals
        got = rho_minus(g_minus, unit_params, 0.3)
        want = brute_cutoff_density(g_minus, 0.0, 0.6, 400_000)
        assert got == pytest.approx(want, rel=1e-6)

    def test_band_swallows_inner_box(self, s25_marginals, unit_params):
        # the center box dies once sqrt(2 phi) passes its outer edge
        _, g_minus = s25_marginals
        inner_edge = 0.1 * math.sqrt(2.0)
        phi_gone = inner_edge**2 / 2.0
        full = box_cutoff_density(g_minus.pieces, 0.0, 2.0 * (phi_gone + 0.01))
        assert rho_minus(g_minus, unit_params, phi_gone + 0.01) == pytest.approx(
            full, rel=1e-10)

    def test_three_regimes_of_the_cutoff(self, s25_marginals, unit_params):
        # the kernel |u|/sqrt(u^2 - c) grows with c, so while the band sits
        # in the gap the density rises; once it eats into the outer boxes
        # it falls; past their far corners nothing is left
        _, g_minus = s25_marginals
        rising = rho_minus(g_minus, unit_params, np.linspace(0.02, 0.98, 20))
        assert np.all(np.diff(rising) > 0)
        falling = rho_minus(g_minus, unit_params, np.linspace(1.02, 3.5, 20))
        assert np.all(np.diff(falling) < 0)
        assert rho_minus(g_minus, unit_params, 3.7) == 0.0


class TestTrappedDensity:
    def test_matches_band_brute(self, unit_params):
        G = Marginal.piecewise([(0.2, 1.4, 0.8)])
        beta = 0.5
        for phi in (0.0, 0.1, 0.3, 0.5):
            got = rho_plus_trapped(G, unit_params, beta, phi)
            m = 2.0 * (beta - phi)
            want = brute_band_density(G, 0.0, m, 2.0 * beta, 400_000)
            assert got == pytest.approx(want, rel=2e-6, abs=1e-12), phi

    def test_zero_at_zero_potential(self, unit_params):
        G = Marginal.piecewise([(0.2, 1.4, 0.8)])
        assert rho_plus_trapped(G, unit_params, 0.5, 0.0) == pytest.approx(0.0, abs=1e-13)

    def test_trapped_wrapper_accepted(self, unit_params):
        inner = Marginal.piecewise([(0.2, 1.4, 0.8)])
        t = TrappedMarginal(inner, 0.0)
        a = rho_plus_trapped(t, unit_params, 0.5, 0.25)
        b = rho_plus_trapped(inner, unit_params, 0.5, 0.25)
        assert a == b

    def test_frame_speed_mismatch_rejected(self):
        inner = Marginal.piecewise([(0.2, 1.4, 0.8)])
        t = TrappedMarginal(inner, 0.0)
        with pytest.raises(ValueError):
            rho_plus_trapped(t, PlasmaParams(alpha=1.0), 0.5, 0.25)

    def test_phi_outside_window_rejected(self, unit_params):
        G = Marginal.piecewise([(0.2, 1.4, 0.8)])
        with pytest.raises(ValueError):
            rho_plus_trapped(G, unit_params, 0.5, 0.6)
        with pytest.raises(ValueError):
            rho_plus_trapped(G, unit_params, 0.5, -0.1)


class TestShockDensity:
    def test_reduces_to_cutoff_form(self, unit_params):
        pieces = [(-1.5, -1.0, 0.5), (1.0, 1.5, 0.5)]
        g = Marginal.piecewise(pieces)
        phi_l = 1.0
        for phi in (0.0, 0.25, 0.5, 0.9, 1.0):
            want = box_cutoff_density(pieces, 0.0, 2.0 * (phi_l - phi))
            got = rho_shock_plus(g, unit_params, phi_l, phi)
            assert got == pytest.approx(want, rel=1e-10), phi

    def test_full_mass_at_top(self, unit_params):
        g = Marginal.piecewise([(-1.5, -1.0, 0.5), (1.0, 1.5, 0.5)])
        assert rho_shock_plus(g, unit_params, 1.0, 1.0) == pytest.approx(
            g.mass(), rel=1e-12)

    def test_phi_window_enforced(self, unit_params):
        g = Marginal.piecewise([(1.0, 1.5, 0.5)])
        with pytest.raises(ValueError):
            rho_shock_plus(g, unit_params, 1.0, 1.2)


class TestSingularIntegral:
    def test_constant_integrand_closed_form(self):
        # integral of |u|/sqrt(u^2-c) is sqrt(u^2-c)
        c, a, b = 0.5, 1.0, 2.0
        got = integrate_sqrt_singular(lambda u: 1.0, c, a, b)
        want = math.sqrt(b * b - c) - math.sqrt(a * a - c)
        assert got == pytest.approx(want, rel=1e-10)

    def test_handles_edge_at_root(self):
        c = 1.0
        got = integrate_sqrt_singular(lambda u: 1.0, c, 1.0, 3.0)
        assert got == pytest.approx(math.sqrt(8.0), rel=1e-10)

    def test_rejects_band_crossing(self):
        with pytest.raises(ValueError):
            integrate_sqrt_singular(lambda u: 1.0, 1.0, -2.0, 2.0)


@st.composite
def offset_boxes(draw):
    n = draw(st.integers(1, 3))
    cursor = draw(st.floats(-4.0, 4.0))
    pieces = []
    for _ in range(n):
        lo = cursor + draw(st.floats(0.05, 2.0))
        hi = lo + draw(st.floats(0.1, 2.0))
        pieces.append((lo, hi, draw(st.floats(0.0, 3.0))))
        cursor = hi
    return pieces


class TestPropertyAgainstClosedForms:
    @given(offset_boxes(), st.floats(0.0, 5.0))
    @settings(max_examples=50, deadline=None)
    def test_free_density_matches_geometry(self, pieces, phi):
        g = Marginal.piecewise(pieces)
        got = rho_plus_inf(g, PlasmaParams(), phi)
        want = box_free_density(pieces, 0.0, 2.0 * phi)
        assert got == pytest.approx(want, rel=1e-9, abs=1e-12)

    @given(offset_boxes(), st.floats(0.0, 5.0))
    @settings(max_examples=50, deadline=None)
    def test_cutoff_density_matches_geometry(self, pieces, phi):
        g = Marginal.piecewise(pieces)
        got = rho_minus(g, PlasmaParams(), phi)
        want = box_cutoff_density(pieces, 0.0, 2.0 * phi)
        assert got == pytest.approx(want, rel=1e-9, abs=1e-12)

    def test_quadrature_settings_validated(self):
        with pytest.raises(ValueError):
            QuadratureSettings(rel_tol=0.0)
        with pytest.raises(ValueError):
            QuadratureSettings(max_subdivisions=2)
