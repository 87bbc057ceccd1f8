"""Command-line driver: configuration, exit codes, artifacts, idempotence."""

import json
from pathlib import Path

import pandas as pd
import pytest

from linecall.cli import load_config, main
from linecall.errors import ConfigError

SIM_INI = """\
[simulation]
master_seed = 11
n_tournaments_pre = 1
n_tournaments_post = 2
matches_per_tournament = 2
share_within_20mm = 0.08
share_within_100mm = 0.40
c_in = -1.2
c_out = -0.8
eta_in = 0.4
eta_out = 0.4
"""


@pytest.fixture()
def sim_ini(tmp_path):
    p = tmp_path / "sim.ini"
    p.write_text(SIM_INI)
    return str(p)


@pytest.fixture(scope="module")
def sim_artifacts(tmp_path_factory):
    out = tmp_path_factory.mktemp("simout")
    ini = out / "sim.ini"
    ini.write_text(SIM_INI)
    assert main(["simulate", "--config", str(ini), "--out", str(out)]) == 0
    return out


class TestConfig:
    def test_print_config_lists_all_sections(self, capsys):
        assert main(["simulate", "--print-config"]) == 0
        text = capsys.readouterr().out
        for section in ("[simulation]", "[estimation]", "[corruption]"):
            assert section in text
        assert "master_seed" in text and "convention" in text

    def test_unknown_key_rejected(self, tmp_path):
        p = tmp_path / "bad.ini"
        p.write_text("[simulation]\nmystery_knob = 3\n")
        with pytest.raises(ConfigError):
            load_config(str(p))
        assert main(["simulate", "--config", str(p), "--out", str(tmp_path)]) == 2

    def test_unknown_section_rejected(self, tmp_path):
        p = tmp_path / "bad.ini"
        p.write_text("[weather]\nrain = yes\n")
        with pytest.raises(ConfigError):
            load_config(str(p))

    def test_missing_config_file_is_config_error(self, tmp_path):
        assert main(["simulate", "--config", str(tmp_path / "nope.ini"),
                     "--out", str(tmp_path)]) == 2

    def test_unknown_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["conjure"])
        assert exc.value.code == 2

    def test_unknown_flag_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["solve", "--kappa-in", "1", "--kappa-out", "1",
                  "--prior", "0.5", "--turbo"])
        assert exc.value.code == 2


class TestSolveCommand:
    def test_json_solution_matches_solver(self, capsys):
        assert main(["solve", "--kappa-in", "2", "--kappa-out", "1",
                     "--prior", "0.55", "--eta-in", "0.4", "--eta-out", "0.4",
                     "--c-in", "-1.5", "--c-out", "-0.5"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["regime"] == "interior"
        assert payload["posterior_call_in_p_in"] == pytest.approx(
            0.73091162303213483, abs=1e-9
        )
        assert payload["posterior_call_out_p_in"] == pytest.approx(
            0.40113280367640621, abs=1e-9
        )

    def test_invalid_prior_is_config_error(self):
        assert main(["solve", "--kappa-in", "1", "--kappa-out", "1",
                     "--prior", "1.5"]) == 2


class TestEstimateCommand:
    def test_posteriors_file_table_convention(self, tmp_path, capsys):
        p = tmp_path / "posteriors.csv"
        pd.DataFrame({
            "period": ["pre"],
            "gamma_in_given_call_in": [0.599],
            "gamma_out_given_call_out": [0.751],
        }).to_csv(p, index=False)
        assert main(["estimate", "--posteriors", str(p), "--convention", "table"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["stage1"]["kappa_in"] == pytest.approx(2.492, abs=0.005)
        assert payload["stage1"]["kappa_out"] == pytest.approx(0.906, abs=0.005)

    def test_missing_inputs_is_config_error(self):
        assert main(["estimate"]) == 2

    def test_missing_file_is_data_error(self, tmp_path):
        assert main(["estimate", "--posteriors", str(tmp_path / "nope.csv")]) == 3

    def test_choice_csv_round_trip(self, tmp_path, capsys):
        pre = tmp_path / "pre.csv"
        pd.DataFrame({
            "action": ["call_in", "call_in", "call_out", "call_out"],
            "state": ["in", "out", "in", "out"],
            "count": [450, 100, 50, 400],
        }).to_csv(pre, index=False)
        assert main(["estimate", "--choices-pre", str(pre),
                     "--convention", "table"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["stage1"]["gamma_in_given_call_in"] == pytest.approx(450 / 550)


class TestBoundsCommand:
    def test_bound_lines_reported(self, tmp_path, capsys):
        post = tmp_path / "post.csv"
        pd.DataFrame({
            "action": ["call_in", "call_in", "call_out", "call_out"],
            "state": ["in", "out", "in", "out"],
            "count": [45, 10, 5, 40],
        }).to_csv(post, index=False)
        assert main(["bounds", "--choices-post", str(post),
                     "--eta-in", "0.427", "--eta-out", "0.410"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert len(payload["bounds"]) == 2
        directions = {b["direction"] for b in payload["bounds"]}
        assert directions == {"upper_bound_on_c_in", "lower_bound_on_c_in"}
        for b in payload["bounds"]:
            assert b["value_at_c_out_minus1"] == pytest.approx(
                b["intercept"] - b["slope"], abs=1e-12
            )


class TestPipelineCommands:
    def test_simulate_writes_artifacts_and_manifest(self, sim_artifacts):
        for name in ("bounces.csv", "points.csv", "challenges.csv",
                     "truth.csv", "manifest.json"):
            assert (sim_artifacts / name).is_file()
        manifest = json.loads((sim_artifacts / "manifest.json").read_text())
        assert manifest["command"] == "simulate"
        assert manifest["master_seed"] == 11
        assert "config_sha256" in manifest

    def test_simulate_rerun_is_byte_identical(self, sim_artifacts, tmp_path):
        ini = tmp_path / "sim.ini"
        ini.write_text(SIM_INI)
        out2 = tmp_path / "again"
        assert main(["simulate", "--config", str(ini), "--out", str(out2)]) == 0
        for name in ("bounces.csv", "points.csv", "challenges.csv", "truth.csv"):
            assert (out2 / name).read_bytes() == (sim_artifacts / name).read_bytes()

    def test_link_audit_report_chain(self, sim_artifacts, tmp_path, capsys):
        out = tmp_path / "chain"
        args = ["--bounces", str(sim_artifacts / "bounces.csv"),
                "--points", str(sim_artifacts / "points.csv")]
        assert main(["link", *args,
                     "--challenges", str(sim_artifacts / "challenges.csv"),
                     "--truth", str(sim_artifacts / "truth.csv"),
                     "--out", str(out)]) == 0
        metrics = json.loads((out / "link_metrics.json").read_text())
        assert metrics["merge_rate"] == 1.0
        assert metrics["accuracy"]["accuracy"] == 1.0
        capsys.readouterr()

        assert main(["audit", *args, "--out", str(out)]) == 0
        audit = json.loads((out / "audit_metrics.json").read_text())
        assert audit["precision"] == 1.0 and audit["recall"] == 1.0
        capsys.readouterr()

        assert main(["report", *args,
                     "--challenges", str(sim_artifacts / "challenges.csv"),
                     "--out", str(out)]) == 0
        summary = json.loads((out / "report_summary.json").read_text())
        assert 0 < summary["pre_mistake_rate_100mm"] < 1
        for artifact in ("bin_rates.csv", "regression.csv", "interaction_by_bin.csv",
                         "callin_trend.csv"):
            assert (out / artifact).is_file()

    def test_link_missing_file_is_data_error(self, sim_artifacts, tmp_path):
        assert main(["link",
                     "--bounces", str(sim_artifacts / "bounces.csv"),
                     "--points", str(sim_artifacts / "points.csv"),
                     "--challenges", str(tmp_path / "nope.csv"),
                     "--out", str(tmp_path)]) == 3

    def test_audit_malformed_table_is_data_error(self, tmp_path):
        bad = tmp_path / "bad.csv"
        pd.DataFrame({"who": [1]}).to_csv(bad, index=False)
        assert main(["audit", "--bounces", str(bad), "--points", str(bad),
                     "--out", str(tmp_path)]) == 3


class TestRoundtripCommand:
    def test_small_roundtrip_summary(self, tmp_path, capsys):
        ini = tmp_path / "rt.ini"
        ini.write_text(SIM_INI.replace("matches_per_tournament = 2",
                                       "matches_per_tournament = 6"))
        out = tmp_path / "rt"
        assert main(["roundtrip", "--config", str(ini), "--out", str(out)]) == 0
        summary = json.loads((out / "roundtrip.json").read_text())
        assert set(summary["recovered"]) == {"kappa_in", "kappa_out", "c_in", "c_out"}
        assert summary["linkage"]["n_linked"] == summary["linkage"]["n_challenges"]
        assert Path(out / "manifest.json").is_file()
