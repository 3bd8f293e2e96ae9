import io
import math

import numpy as np
import pytest

from vpwaves.conditions import ConditionError
from vpwaves.model import Marginal
from vpwaves.profile import (
    WaveProfile,
    build_solitary,
    build_train,
    load_profile_csv,
    period,
    profile_to_csv,
    x_of_phi,
)
from vpwaves.sagdeev import SagdeevPotential, SyntheticPotential, TabulatedPotential


def synthetic_hump(beta=0.5):
    return SyntheticPotential(
        v=lambda p: p * p * (beta - p),
        dv=lambda p: 2.0 * p * (beta - p) - p * p,
        amplitude=beta)


def synthetic_arc(beta=0.5):
    return SyntheticPotential(
        v=lambda p: p * (beta - p),
        dv=lambda p: beta - 2.0 * p,
        amplitude=beta, kind="train")


class TestDistanceTable:
    def test_closed_form_for_quadratic_foot(self):
        # for V = phi^2 (beta - phi) the distance from the crest is
        # X(phi) = ln((s + w)/(s - w)) / (s sqrt(2)), s = sqrt(beta)
        beta = 0.5
        pot = synthetic_hump(beta)
        phi_tab, x_tab = x_of_phi(pot, beta, 0.0, eps_tail=1e-9)
        s = math.sqrt(beta)
        w = np.sqrt(beta - phi_tab)
        want = np.log((s + w) / np.maximum(s - w, 1e-300)) / (s * math.sqrt(2.0))
        want[0] = 0.0
        np.testing.assert_allclose(x_tab, want, rtol=1e-7, atol=1e-12)

    def test_table_is_monotone(self, s25_pot):
        phi_tab, x_tab = x_of_phi(s25_pot, s25_pot.amplitude, 0.0)
        assert np.all(np.diff(phi_tab) < 0)
        assert np.all(np.diff(x_tab) > 0)
        assert x_tab[0] == 0.0

    def test_empty_for_equal_endpoints(self, s25_pot):
        phi_tab, x_tab = x_of_phi(s25_pot, 0.1, 0.1)
        assert phi_tab.size == 0 and x_tab.size == 0

    def test_range_guard(self, s25_pot):
        with pytest.raises(ValueError):
            x_of_phi(s25_pot, 0.0, s25_pot.amplitude * 1.5)


class TestSolitaryProfile:
    def test_even_symmetry_and_crest(self, s25_profile, golden):
        p = s25_profile
        beta1 = golden["solitary_s25"]["beta1"]
        assert p.Phi[p.X_grid.size // 2] == beta1
        np.testing.assert_array_equal(p.Phi, p.Phi[::-1])
        np.testing.assert_array_equal(p.X_grid, -p.X_grid[::-1])

    def test_slope_matches_energy_balance(self, s25_profile):
        p = s25_profile
        v = np.maximum(np.asarray(p.pot.v(p.Phi), float), 0.0)
        want = -np.sign(p.X_grid) * np.sqrt(2.0 * v)
        np.testing.assert_allclose(p.dPhi, want, atol=1e-15)

    def test_monotone_on_each_side(self, s25_profile):
        p = s25_profile
        right = p.Phi[p.X_grid >= 0.0]
        assert np.all(np.diff(right) < 0)

    def test_tail_reaches_truncation_level(self, s25_profile):
        p = s25_profile
        assert p.Phi[-1] <= 2.0 * p.eps_tail * p.amplitude
        assert p.Phi[-1] > 0.0
        assert p.L == pytest.approx(p.X_grid[-1])

    def test_rejects_wrong_kind(self, s33_pot):
        with pytest.raises(ValueError):
            build_solitary(s33_pot)

    def test_nonexistent_wave_raises_condition_error(self, s25_pot, golden):
        bad = SagdeevPotential.solitary(
            s25_pot.g_plus, s25_pot.g_minus,
            golden["solitary_s25"]["beta1"] / 2.0, s25_pot.params)
        with pytest.raises(ConditionError):
            build_solitary(bad)


class TestShockProfile:
    def test_anchored_at_half_plateau(self, s33_profile):
        p = s33_profile
        i0 = int(np.nonzero(p.X_grid == 0.0)[0][0])
        assert p.Phi[i0] == 0.5

    def test_monotone_decreasing_front(self, s33_profile):
        assert np.all(np.diff(s33_profile.Phi) < 0)
        assert np.all(s33_profile.dPhi <= 0)

    def test_point_symmetry_about_center(self, s33_profile):
        # Phi(-X) + Phi(X) = plateau height for the mirror-matched front
        p = s33_profile
        interp = np.interp(-p.X_grid, p.X_grid, p.Phi)
        span = min(abs(p.X_grid[0]), abs(p.X_grid[-1]))
        inside = np.abs(p.X_grid) <= span
        defect = np.max(np.abs(interp[inside] + p.Phi[inside] - 1.0))
        assert defect < 1e-8

    def test_approaches_both_plateaus(self, s33_profile):
        p = s33_profile
        assert p.Phi[0] > 1.0 - 2e-6
        assert p.Phi[-1] < 2e-6


class TestTrainProfile:
    def test_one_period_with_mirror_axis(self):
        pot = synthetic_arc(0.5)
        p = build_train(pot)
        gamma = p.period
        assert gamma == pytest.approx(2.0 * p.X_grid[p.X_grid.size // 2])
        assert p.Phi[0] == 0.0
        assert p.Phi[-1] == 0.0
        assert p.Phi[p.X_grid.size // 2] == 0.5
        np.testing.assert_array_equal(p.Phi, p.Phi[::-1])

    def test_period_closed_form(self):
        # V = phi (beta - phi) gives a period of pi sqrt(2), beta-free
        for beta in (0.3, 0.5, 1.2):
            pot = synthetic_arc(beta)
            assert period(pot) == pytest.approx(math.pi * math.sqrt(2.0), rel=1e-10)

    def test_grid_matches_sampled_ode(self):
        pot = synthetic_arc(0.5)
        p = build_train(pot)
        v = np.maximum(np.asarray(pot.v(p.Phi), float), 0.0)
        want = np.sqrt(2.0 * v)
        half = p.X_grid.size // 2
        np.testing.assert_allclose(np.abs(p.dPhi), want, atol=1e-15)
        assert np.all(p.dPhi[:half] >= 0.0)
        assert np.all(p.dPhi[half:] <= 0.0)

    def test_period_rejects_flat_endpoint(self):
        pot = synthetic_hump(0.5)
        with pytest.raises(ValueError):
            period(pot)

    def test_period_rejects_non_equilibrium(self):
        pot = SyntheticPotential(
            v=lambda p: p * (0.5 - p) + 0.01,
            dv=lambda p: 0.5 - 2.0 * p,
            amplitude=0.5, kind="train")
        with pytest.raises(ValueError):
            period(pot)


class TestCsvRoundTrip:
    def test_solitary_table_is_bit_exact(self, s25_profile, tmp_path):
        path = tmp_path / "profile.csv"
        profile_to_csv(s25_profile, path)
        back = load_profile_csv(path)
        np.testing.assert_array_equal(back.X_grid, s25_profile.X_grid)
        np.testing.assert_array_equal(back.Phi, s25_profile.Phi)
        np.testing.assert_array_equal(back.dPhi, s25_profile.dPhi)
        assert back.kind == "solitary"
        assert back.amplitude == s25_profile.amplitude
        assert back.eps_tail == s25_profile.eps_tail
        assert back.L == s25_profile.L

    def test_kink_metadata_survives(self, s25_profile, tmp_path):
        path = tmp_path / "profile.csv"
        profile_to_csv(s25_profile, path)
        back = load_profile_csv(path)
        orig = s25_profile.pot.kinks()
        got = back.pot.kinks()
        assert len(got) == len(orig) == 1
        assert got[0].phi == orig[0].phi
        assert got[0].strength == orig[0].strength

    def test_reloaded_potential_interpolates_v(self, s25_profile):
        buf = io.StringIO()
        profile_to_csv(s25_profile, buf)
        back = load_profile_csv(io.StringIO(buf.getvalue()))
        assert isinstance(back.pot, TabulatedPotential)
        # the interpolant passes through the sampled values themselves
        v_orig = np.asarray(s25_profile.pot.v(s25_profile.Phi), float)
        v_back = np.asarray(back.pot.v(s25_profile.Phi), float)
        np.testing.assert_allclose(v_back, v_orig, atol=1e-15)

    def test_density_columns_present(self, s25_profile):
        buf = io.StringIO()
        profile_to_csv(s25_profile, buf)
        lines = buf.getvalue().splitlines()
        header = [ln for ln in lines if ln.startswith("X,")][0]
        assert header == "X,Phi,dPhi,V,rho_plus,rho_minus"
        data = [ln for ln in lines if ln and not ln.startswith(("#", "X,"))]
        assert len(data) == s25_profile.X_grid.size
        assert all(len(ln.split(",")) == 6 for ln in data)

    def test_shock_metadata(self, s33_profile):
        buf = io.StringIO()
        profile_to_csv(s33_profile, buf)
        text = buf.getvalue()
        assert "# kind: shock" in text
        assert "# kinks:" in text
        back = load_profile_csv(io.StringIO(text))
        assert back.kind == "shock"
        assert back.pot.kinks()[0].phi == 0.5

    def test_train_metadata_carries_period(self):
        pot = synthetic_arc(0.5)
        p = build_train(pot)
        buf = io.StringIO()
        profile_to_csv(p, buf)
        back = load_profile_csv(io.StringIO(buf.getvalue()))
        assert back.period == p.period
        assert back.L is None

    def test_missing_rows_rejected(self):
        with pytest.raises(ValueError):
            load_profile_csv(io.StringIO("# kind: solitary\n# amplitude: 1.0\n"))


class TestWaveProfileGuards:
    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            WaveProfile("solitary", np.arange(3.0), np.arange(4.0),
                        np.arange(3.0), 1.0, None, 1.0, 1e-6, None)

    def test_grid_must_increase(self):
        x = np.array([0.0, 1.0, 1.0])
        with pytest.raises(ValueError):
            WaveProfile("solitary", x, x, x, 1.0, None, 1.0, 1e-6, None)
