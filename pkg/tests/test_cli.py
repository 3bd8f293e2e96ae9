"""Command-line surface: exit codes, file artifacts, report contents."""

import json
import math
import os
import subprocess
import sys

import pytest

from vpwaves.cli import run
from vpwaves.families import train_box_family

from conftest import make_s25_marginals, make_s33_marginals

WAVE_FILES = ["phase_minus.csv", "phase_plus.csv", "profile.csv", "report.json"]


def write_config(path, cfg):
    path.write_text(json.dumps(cfg, indent=2), encoding="utf-8")
    return str(path)


def solitary_config(beta, trapped=None):
    g_plus, g_minus = make_s25_marginals()
    marginals = {"g_plus": g_plus.to_dict(), "g_minus": g_minus.to_dict()}
    if trapped is not None:
        marginals["g_trapped"] = trapped
    return {
        "schema": 1,
        "wave": {"kind": "solitary", "beta": beta, "marginals": marginals},
    }


def shock_config(phi_l):
    lp, rp, lm, rm = make_s33_marginals(phi_l)
    return {
        "schema": 1,
        "wave": {
            "kind": "shock",
            "phi_l": phi_l,
            "marginals": {
                "left_plus": lp.to_dict(), "right_plus": rp.to_dict(),
                "left_minus": lm.to_dict(), "right_minus": rm.to_dict(),
            },
        },
    }


def train_config(beta, tau):
    member = train_box_family(__import__("vpwaves").model.PlasmaParams(), beta, tau)
    return {
        "schema": 1,
        "wave": {
            "kind": "train",
            "beta": beta,
            "marginals": {"g_plus": member.g_plus.to_dict(),
                          "g_minus": member.g_minus.to_dict()},
        },
    }


def boltzmann_config():
    return {"schema": 1, "params": {"boltzmann": {"rho": 1.0, "kappa": 1.0}}}


class TestCheck:
    def test_existing_wave_reports_and_exits_zero(self, tmp_path, capsys, golden):
        cfg = write_config(tmp_path / "c.json",
                           solitary_config(golden["solitary_s25"]["beta1"]))
        assert run(["check", cfg]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["verdict"] == "exists"
        assert report["uniqueness"]["classification"] == "nonunique_b"

    def test_half_amplitude_fails_the_shape_clause(self, tmp_path, capsys, golden):
        # the pseudo-potential is still negative at half the amplitude
        beta1 = golden["solitary_s25"]["beta1"]
        cfg = write_config(tmp_path / "c.json", solitary_config(beta1 / 2.0))
        assert run(["check", cfg]) == 2
        report = json.loads(capsys.readouterr().out)
        assert "G-beta2" in report["failed"]

    def test_shock_check_includes_the_matching(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.json", shock_config(1.0))
        assert run(["check", cfg]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["matching"]["end_states"] is True
        assert report["matching"]["speed_equation"] == "degenerate"

    def test_train_check(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.json", train_config(0.7, 0.35))
        assert run(["check", cfg]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["kind"] == "train"
        assert report["verdict"] == "exists"


class TestBadInput:
    def test_malformed_json_names_line_and_column(self, tmp_path, capsys):
        bad = tmp_path / "broken.json"
        bad.write_text('{"schema": 1,\n  "wave": {,}\n}', encoding="utf-8")
        assert run(["check", str(bad)]) == 3
        err = capsys.readouterr().err
        assert "line 2" in err and "column" in err

    def test_missing_file(self, tmp_path, capsys):
        assert run(["check", str(tmp_path / "nope.json")]) == 3

    def test_wrong_schema(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.json", {"schema": 2, "wave": {}})
        assert run(["check", cfg]) == 3
        assert '"schema": 1' in capsys.readouterr().err

    def test_missing_marginal(self, tmp_path, capsys):
        cfg = solitary_config(0.4)
        del cfg["wave"]["marginals"]["g_minus"]
        path = write_config(tmp_path / "c.json", cfg)
        assert run(["check", path]) == 3
        assert "g_minus" in capsys.readouterr().err

    def test_bad_wave_kind(self, tmp_path, capsys):
        cfg = {"schema": 1, "wave": {"kind": "breather"}}
        assert run(["check", write_config(tmp_path / "c.json", cfg)]) == 3

    def test_unknown_flag_or_command(self, capsys):
        assert run(["unknown-command"]) == 3
        assert run(["check"]) == 3

    def test_bad_params_block(self, tmp_path, capsys):
        cfg = solitary_config(0.4)
        cfg["params"] = {"e_plus": 1.0, "bogus": 2.0}
        assert run(["check", write_config(tmp_path / "c.json", cfg)]) == 3
        assert "params block" in capsys.readouterr().err


@pytest.fixture(scope="module")
def solved_solitary(tmp_path_factory, golden):
    """One solve run shared by the artifact tests."""
    out = tmp_path_factory.mktemp("solve_out")
    cfg_path = out / "config.json"
    cfg_path.write_text(json.dumps(solitary_config(golden["solitary_s25"]["beta1"])),
                        encoding="utf-8")
    code = run(["solve", str(cfg_path), "--out", str(out / "wave")])
    return code, out / "wave"


class TestSolve:
    def test_exit_and_files(self, solved_solitary):
        code, out = solved_solitary
        assert code == 0
        for name in WAVE_FILES:
            assert (out / name).is_file(), name

    def test_no_temporary_droppings(self, solved_solitary):
        _, out = solved_solitary
        assert not [p for p in os.listdir(out) if ".tmp" in p]

    def test_report_contents(self, solved_solitary, golden):
        _, out = solved_solitary
        report = json.loads((out / "report.json").read_text())
        assert report["kind"] == "solitary"
        assert report["amplitude"] == pytest.approx(
            golden["solitary_s25"]["beta1"], rel=1e-12)
        assert report["conditions"]["verdict"] == "exists"
        res = report["residuals"]
        assert res["poisson"] <= 1e-6
        assert res["max"] == max(res.values())
        assert report["files"] == ["profile.csv", "phase_plus.csv",
                                   "phase_minus.csv", "report.json"]

    def test_round_trip_residuals_stay_within_10x(self, solved_solitary):
        _, out = solved_solitary
        report = json.loads((out / "report.json").read_text())
        rt = report["roundtrip"]
        assert rt["within_10x"] is True
        for key in ("poisson", "energy", "neutrality"):
            assert rt["reloaded"][key] <= 10.0 * rt["original"][key] + 1e-12

    def test_phase_summaries_cover_both_species(self, solved_solitary):
        _, out = solved_solitary
        report = json.loads((out / "report.json").read_text())
        for species in ("plus", "minus"):
            block = report["phase"][species]
            assert block["species"] == species
            assert block["slices"]

    def test_rerun_is_byte_identical(self, solved_solitary, tmp_path):
        _, out = solved_solitary
        cfg = out.parent / "config.json"
        assert run(["solve", str(cfg), "--out", str(tmp_path / "again")]) == 0
        for name in ("profile.csv", "report.json"):
            assert (tmp_path / "again" / name).read_bytes() == (out / name).read_bytes()

    def test_refuses_a_nonexistent_wave(self, tmp_path, capsys, golden):
        beta1 = golden["solitary_s25"]["beta1"]
        cfg = write_config(tmp_path / "c.json", solitary_config(beta1 / 2.0))
        assert run(["solve", cfg, "--out", str(tmp_path / "w")]) == 2
        assert "G-beta2" in capsys.readouterr().err


class TestExample:
    def test_train_example_writes_every_artifact(self, tmp_path, capsys):
        out = tmp_path / "train"
        assert run(["example", "train", "--beta", "0.7", "--tau", "0.35",
                    "--out", str(out)]) == 0
        for name in WAVE_FILES:
            assert (out / name).is_file(), name
        report = json.loads((out / "report.json").read_text())
        assert report["kind"] == "train"
        assert report["residuals"]["max"] <= 1e-6
        head = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert head["out"] == str(out)

    def test_shock_example_honors_the_drop(self, tmp_path, capsys):
        out = tmp_path / "shock"
        assert run(["example", "s3.3", "--phi-l", "0.5", "--out", str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["phi_l"] == 0.5
        assert report["mass_target"] == math.sqrt(0.5) / 2.0
        for name in WAVE_FILES:
            assert (out / name).is_file(), name

    def test_solitary_example_through_the_entry_point(self, tmp_path):
        # one end-to-end subprocess proves the installed module wiring
        out = tmp_path / "s25"
        proc = subprocess.run(
            [sys.executable, "-m", "vpwaves", "example", "s2.5", "--out", str(out)],
            capture_output=True, text=True, timeout=300)
        assert proc.returncode == 0, proc.stderr
        head = json.loads(proc.stdout.strip().splitlines()[-1])
        assert head["kind"] == "solitary"
        for name in WAVE_FILES:
            assert (out / name).is_file(), name
        report = json.loads((out / "report.json").read_text())
        assert report["uniqueness"]["classification"] == "nonunique_b"
        assert report["roundtrip"]["within_10x"] is True


class TestFamily:
    def test_boltzmann_match_emits_three_members(self, tmp_path, capsys, golden):
        gamma = 0.5 * golden["boltzmann_unit"]["gamma_star"]
        cfg = write_config(tmp_path / "c.json", boltzmann_config())
        out = tmp_path / "fam"
        assert run(["family", cfg, "--kind", "boltzmann-match",
                    "--gamma", repr(gamma), "--count", "3",
                    "--out", str(out)]) == 0
        head = json.loads(capsys.readouterr().out)
        assert head["count"] == 3
        assert len(set(head["amplitudes"])) == 3
        data = json.loads((out / "members.json").read_text())
        assert data["schema"] == 1
        assert [m["kind"] for m in data["members"]] == ["boltzmann-match"] * 3
        for m in data["members"]:
            assert m["verdict"] == "exists"
            assert m["marginals"]["g_minus"]["kind"] == "maxwellian"

    def test_boltzmann_match_needs_a_target(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.json", boltzmann_config())
        assert run(["family", cfg, "--kind", "boltzmann-match"]) == 3
        assert "target period" in capsys.readouterr().err

    def test_train_box_family_with_rescale(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.json", train_config(0.7, 0.35))
        assert run(["family", cfg, "--kind", "train-box",
                    "--tau", "0.35", "--tau", "0.2", "--gamma", "3.0"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert len(data["members"]) == 2
        for m in data["members"]:
            assert m["period"] == pytest.approx(3.0, rel=1e-8)
        assert (data["members"][0]["parameters"]["tau"],
                data["members"][1]["parameters"]["tau"]) == (0.35, 0.2)

    def test_perturb_uses_the_configured_trapped_population(self, tmp_path, capsys):
        trapped = {"kind": "piecewise", "pieces": [[0.4, 0.9, 0.3]]}
        cfg = write_config(tmp_path / "c.json", solitary_config(0.5, trapped=trapped))
        assert run(["family", cfg, "--kind", "perturb",
                    "--tau", "0.2", "--tau", "0.3"]) == 0
        data = json.loads(capsys.readouterr().out)
        taus = [m["parameters"]["tau"] for m in data["members"]]
        assert taus == [0.2, 0.3]
        for m in data["members"]:
            assert m["marginals"]["g_trapped"] is not None

    def test_perturb_default_fractions_are_admissible(self, tmp_path, capsys):
        trapped = {"kind": "piecewise", "pieces": [[0.4, 0.9, 0.3]]}
        cfg = write_config(tmp_path / "c.json", solitary_config(0.5, trapped=trapped))
        assert run(["family", cfg, "--kind", "perturb"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert [m["parameters"]["tau"] for m in data["members"]] == [0.1, 0.2, 0.3]

    def test_perturb_without_population_is_an_input_error(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.json", solitary_config(0.5))
        assert run(["family", cfg, "--kind", "perturb"]) == 3
        assert "trapped population" in capsys.readouterr().err

    def test_inject_b_members_are_distinct(self, tmp_path, capsys, golden):
        beta1 = golden["solitary_s25"]["beta1"]
        cfg = write_config(tmp_path / "c.json", solitary_config(beta1))
        assert run(["family", cfg, "--kind", "inject-b", "--count", "2"]) == 0
        data = json.loads(capsys.readouterr().out)
        amps = [m["amplitude"] for m in data["members"]]
        assert amps == pytest.approx([0.4954525583613673, 0.5284827289187918],
                                     rel=1e-9)

    def test_inject_c_refuses_the_wrong_class(self, tmp_path, capsys, golden):
        beta1 = golden["solitary_s25"]["beta1"]
        cfg = write_config(tmp_path / "c.json", solitary_config(beta1))
        assert run(["family", cfg, "--kind", "inject-c"]) == 3
        assert "nonunique_b" in capsys.readouterr().err

    def test_injection_on_a_nonexistent_wave_fails_conditions(self, tmp_path, capsys,
                                                              golden):
        beta1 = golden["solitary_s25"]["beta1"]
        cfg = write_config(tmp_path / "c.json", solitary_config(beta1 / 2.0))
        assert run(["family", cfg, "--kind", "inject-b"]) == 2


class TestOracle:
    def test_solitary_operators_match_the_midpoint_sums(self, tmp_path, capsys,
                                                        golden):
        # the flattened electron kernel keeps jumps at mapped box edges, so
        # the midpoint sum needs a couple million points to clear 1e-6
        cfg = write_config(tmp_path / "c.json",
                           solitary_config(golden["solitary_s25"]["beta1"]))
        assert run(["oracle", cfg, "--points", "2000000", "--samples", "3"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["ok"] is True
        assert sorted(report["ops"]) == ["electron_density", "free_ion_density"]
        for op in report["ops"].values():
            assert op["max_rel_err"] <= 1e-6

    def test_shock_operators(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.json", shock_config(1.0))
        assert run(["oracle", cfg, "--points", "400000", "--samples", "3"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert sorted(report["ops"]) == ["electron_density", "ion_density"]

    def test_unreachable_tolerance_is_a_numerical_failure(self, tmp_path, capsys,
                                                          golden):
        cfg = write_config(tmp_path / "c.json",
                           solitary_config(golden["solitary_s25"]["beta1"]))
        assert run(["oracle", cfg, "--points", "1000", "--samples", "2",
                    "--tol", "1e-18"]) == 4
        report = json.loads(capsys.readouterr().out)
        assert report["ok"] is False


class TestHelp:
    def test_help_documents_the_config_layout(self, capsys):
        assert run(["--help"]) == 0
        out = capsys.readouterr().out
        assert '"schema": 1' in out
        assert "piecewise" in out and "maxwellian" in out and "tabulated" in out

    def test_subcommand_help_lists_defaults(self, capsys):
        assert run(["oracle", "--help"]) == 0
        out = capsys.readouterr().out
        assert "default 4e6" in out and "default 1e-6" in out
        assert run(["example", "--help"]) == 0
        out = capsys.readouterr().out
        assert "default 1.0" in out
