"""Built-in reference setups: pinned scalars, determinism, report shape."""

import json
import math

import pytest

from vpwaves.cases import pinned_values, shock_case, solitary_case, train_case
from vpwaves.model import PlasmaParams


@pytest.fixture(scope="module")
def solitary_ref():
    return solitary_case()


@pytest.fixture(scope="module")
def train_ref():
    return train_case()


class TestSolitaryCase:

    def test_roots_match_the_frozen_values(self, solitary_ref, golden):
        _, beta0, beta1, _ = solitary_ref
        assert beta0 == pytest.approx(golden["solitary_s25"]["beta0"], rel=1e-12)
        assert beta1 == pytest.approx(golden["solitary_s25"]["beta1"], rel=1e-12)
        assert 0.01 < beta0 < beta1 < 1.0

    def test_outer_charge_has_a_closed_form(self, solitary_ref, golden):
        # three electron bands against two ion boxes leave sqrt(5) - sqrt(2)
        # - sqrt(2.61) of net charge at the outer band energy; the hole edge
        # sits exactly on an electron box corner there, so float evaluation
        # can only approach the closed form to the square root of one ulp
        _, _, _, report = solitary_ref
        want = math.sqrt(5.0) - math.sqrt(2.0) - math.sqrt(2.61)
        assert report["rho_at_outer_energy"] == pytest.approx(want, abs=5e-8)
        assert report["rho_at_outer_energy"] == pytest.approx(
            golden["solitary_s25"]["rho_at_outer_energy"], rel=1e-13)

    def test_charge_sign_pattern(self, solitary_ref):
        _, _, _, report = solitary_ref
        assert abs(report["rho_at_zero"]) <= 1e-14
        assert report["rho_inside_gap"] > 0.0
        assert report["rho_at_outer_energy"] < 0.0
        assert report["rho_at_beta1"] < 0.0

    def test_root_residuals_are_tiny(self, solitary_ref):
        _, _, _, report = solitary_ref
        assert abs(report["root_residuals"]["rho_at_beta0"]) <= 1e-12
        assert abs(report["root_residuals"]["v_at_beta1"]) <= 1e-12

    def test_wave_exists_and_is_nonunique(self, solitary_ref):
        _, _, _, report = solitary_ref
        assert report["conditions"]["verdict"] == "exists"
        assert report["uniqueness"]["classification"] == "nonunique_b"

    def test_setup_carries_the_inputs(self, solitary_ref):
        setup, _, beta1, _ = solitary_ref
        assert setup.kind == "solitary"
        assert sorted(setup.marginals) == ["g_minus", "g_plus"]
        assert setup.amplitude == beta1
        assert setup.pot.amplitude == beta1

    def test_rerun_is_bit_identical(self, solitary_ref):
        _, beta0, beta1, _ = solitary_ref
        _, again0, again1, _ = solitary_case()
        assert (again0, again1) == (beta0, beta1)

    def test_report_is_json_ready(self, solitary_ref):
        _, _, _, report = solitary_ref
        json.dumps(report)

    def test_rejects_non_unit_parameters(self):
        with pytest.raises(ValueError, match="unit charges"):
            solitary_case(PlasmaParams(e_plus=2.0))
        with pytest.raises(ValueError, match="unit charges"):
            solitary_case(PlasmaParams(alpha=0.3))


class TestShockCase:
    @pytest.mark.parametrize("phi_l", [0.5, 1.0, 2.0])
    def test_end_state_masses_hit_the_closed_form(self, phi_l):
        _, report = shock_case(phi_l)
        want = math.sqrt(phi_l) / 2.0
        assert report["mass_target"] == want
        for name, mass in report["masses"].items():
            assert abs(mass - want) <= 4.0 * math.ulp(want), name

    @pytest.mark.parametrize("phi_l", [0.5, 1.0, 2.0])
    def test_crest_value_has_a_closed_form(self, phi_l):
        # integrating the matched box charges gives
        # (5 sqrt(5)/4 - 5/2)/3 * phi_l^1.5 at the midpoint
        _, report = shock_case(phi_l)
        want = (5.0 * math.sqrt(5.0) / 4.0 - 2.5) / 3.0 * phi_l ** 1.5
        assert report["v_at_mid"] == pytest.approx(want, rel=1e-12)

    def test_midpoint_is_the_mirror_axis(self):
        _, report = shock_case(1.0)
        assert report["mirror_defect"] <= 1e-12
        assert abs(report["rho_at_mid"]) <= 1e-13
        assert report["speed_equation"] == "degenerate"
        assert report["conditions"]["verdict"] == "exists"

    def test_setup_carries_both_end_states(self):
        setup, _ = shock_case(1.0)
        assert setup.kind == "shock"
        assert sorted(setup.marginals) == [
            "left_minus", "left_plus", "right_minus", "right_plus"]
        assert setup.amplitude == 1.0

    def test_report_is_json_ready(self):
        _, report = shock_case(0.5)
        json.dumps(report)

    def test_rejects_bad_drops(self):
        for phi_l in (0.0, -1.0, math.inf):
            with pytest.raises(ValueError, match="phi_l"):
                shock_case(phi_l)


class TestTrainCase:

    def test_period_is_pinned(self, train_ref, golden):
        _, prof, report = train_ref
        assert report["period"] == pytest.approx(
            golden["train"]["period_beta1_tau1"], rel=1e-12)
        assert abs(prof.period - report["period"]) <= 1e-8 * report["period"]

    def test_every_field_verifier_is_quiet(self, train_ref):
        _, _, report = train_ref
        res = report["residuals"]
        assert sorted(res) == ["characteristics_minus", "characteristics_plus",
                               "energy", "neutrality", "poisson"]
        assert max(abs(v) for v in res.values()) <= 1e-6

    def test_report_shape(self, train_ref):
        setup, _, report = train_ref
        assert report["parameters"]["tau"] == 1.0
        assert report["conditions"]["verdict"] == "exists"
        assert sorted(setup.marginals) == ["h_minus", "h_plus"]
        json.dumps(report)

    def test_other_knobs_build_too(self):
        _, prof, report = train_case(beta=0.7, tau=0.35)
        assert report["period"] > 0.0
        assert abs(prof.period - report["period"]) <= 1e-8 * report["period"]


class TestPinnedValues:
    def test_every_entry_has_a_value_and_a_method(self):
        data = pinned_values()
        assert data["version"] == 1
        assert len(data["entries"]) >= 8
        for name, rec in data["entries"].items():
            assert isinstance(rec["value"], float), name
            assert isinstance(rec["method"], str) and rec["method"], name
