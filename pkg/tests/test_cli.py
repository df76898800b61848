import csv
import json
import subprocess
import sys

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cavdiscord import __version__
from cavdiscord.cli import EXIT_IO, EXIT_OK, EXIT_USAGE, build_parser, main, resolve_config


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


@pytest.fixture
def out(tmp_path):
    return tmp_path / "run.csv"


class TestDynamics:
    def test_writes_csv_and_metadata(self, out):
        code = main(["dynamics", "--p", "0.4", "--alpha", "1", "--steps", "400", "--out", str(out)])
        assert code == EXIT_OK
        header, data = read_csv(out)
        assert header == ["omega_t", "f_sq", "discord", "classical_corr", "mutual_info", "concurrence"]
        assert data.shape == (401, 6)
        meta = json.loads(out.with_name("run.meta.json").read_text())
        assert meta["version"] == __version__
        assert meta["parameters"]["p"] == 0.4
        assert meta["parameters"]["alpha_re"] == 1.0
        assert meta["thresholds"]["discord_death"] == 1e-3
        assert "strictly positive" in meta["discord_death_notice"]
        assert meta["discord_formula_notice"]
        assert meta["death_events"]["concurrence"]
        assert meta["esd_onset_omega_t"] == pytest.approx(0.27200599947, abs=1e-9)

    def test_degenerate_onset_recorded(self, out):
        assert main(["dynamics", "--p", "0.2", "--steps", "20", "--out", str(out)]) == EXIT_OK
        meta = json.loads(out.with_name("run.meta.json").read_text())
        assert meta["esd_onset_omega_t"] == "degenerate"

    def test_both_mode(self, out):
        args = ["dynamics", "--p", "0.5", "--steps", "10", "--t-max", "3", "--discord-mode", "both"]
        assert main(args + ["--out", str(out)]) == EXIT_OK
        header, data = read_csv(out)
        assert header[-1] == "discord_numeric"
        meta = json.loads(out.with_name("run.meta.json").read_text())
        assert meta["max_closed_form_numeric_gap"] <= 1e-5

    def test_missing_p(self, out, capsys):
        assert main(["dynamics", "--out", str(out)]) == EXIT_USAGE
        assert "--p" in capsys.readouterr().err
        assert not out.exists()

    @pytest.mark.parametrize("p", ["1.5", "-0.1"])
    def test_invalid_p(self, out, p):
        assert main(["dynamics", "--p", p, "--out", str(out)]) == EXIT_USAGE

    def test_bad_threshold(self, out):
        args = ["dynamics", "--p", "0.4", "--discord-threshold", "0", "--out", str(out)]
        assert main(args) == EXIT_USAGE

    def test_unwritable_output(self, tmp_path):
        target = tmp_path / "missing" / "run.csv"
        assert main(["dynamics", "--p", "0.4", "--steps", "10", "--out", str(target)]) == EXIT_IO

    def test_byte_identical_reruns(self, tmp_path):
        for name in ("a.csv", "b.csv"):
            main(["dynamics", "--p", "0.4", "--steps", "500", "--out", str(tmp_path / name)])
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
        assert (tmp_path / "a.meta.json").read_text().replace("a.csv", "b.csv") == (
            tmp_path / "b.meta.json"
        ).read_text()


class TestConfigPrecedence:
    def test_flag_over_file_over_default(self, tmp_path):
        cfg_file = tmp_path / "cfg.json"
        cfg_file.write_text(json.dumps({"p": 0.3, "gamma_over_omega": 0.2, "steps": 50}))
        parser = build_parser()
        args = parser.parse_args(["dynamics", "--config", str(cfg_file), "--gamma-over-omega", "0.05"])
        cfg = resolve_config("dynamics", args)
        assert cfg["gamma_over_omega"] == 0.05  # flag
        assert cfg["p"] == 0.3 and cfg["steps"] == 50  # file
        assert cfg["alpha_re"] == 0.5 and cfg["family"] == "phi"  # defaults

    def test_unknown_key(self, tmp_path, out):
        cfg_file = tmp_path / "cfg.json"
        cfg_file.write_text(json.dumps({"p": 0.3, "purity": 1}))
        assert main(["dynamics", "--config", str(cfg_file), "--out", str(out)]) == EXIT_USAGE

    def test_malformed_file(self, tmp_path, out):
        cfg_file = tmp_path / "cfg.json"
        cfg_file.write_text("{not json")
        assert main(["dynamics", "--config", str(cfg_file), "--out", str(out)]) == EXIT_USAGE

    def test_missing_file(self, tmp_path, out):
        args = ["dynamics", "--config", str(tmp_path / "nope.json"), "--out", str(out)]
        assert main(args) == EXIT_IO


class TestVerifyLindblad:
    def test_passes(self, capsys):
        assert main(["verify-lindblad", "--alpha", "0.5", "--t-max", "2"]) == EXIT_OK
        assert "PASS" in capsys.readouterr().out

    def test_step_too_large(self):
        assert main(["verify-lindblad", "--dt", "0.2", "--t-max", "1"]) == EXIT_USAGE

    def test_truncation_too_small(self):
        assert main(["verify-lindblad", "--alpha", "3", "--t-max", "1"]) == EXIT_USAGE


class TestDiscordCheck:
    def test_small_grid(self, capsys):
        assert main(["discord-check", "--grid", "3"]) == EXIT_OK
        text = capsys.readouterr().out
        assert "grid: 3 x 3" in text and "PASS" in text

    def test_bad_grid(self):
        assert main(["discord-check", "--grid", "0"]) == EXIT_USAGE


class TestLimits:
    def values(self, capsys, p):
        assert main(["limits", "--p", p, "--alpha", "0.5", "--gamma-over-omega", "0.01"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        return {ln.split(":")[0].strip(): ln.split(":")[1].strip() for ln in lines}

    def test_ordering_low_purity(self, capsys):
        assert self.values(capsys, "0.5")["larger"] == "discord"

    def test_ordering_high_purity(self, capsys):
        v = self.values(capsys, "0.8")
        assert v["larger"] == "concurrence"
        assert float(v["long-time concurrence"]) == pytest.approx(0.8 * 0.606560983971293 - 0.1, abs=1e-11)

    def test_lossless_rejected(self):
        assert main(["limits", "--p", "0.5", "--gamma-over-omega", "0"]) == EXIT_USAGE


class TestSweep:
    def test_empty_grid(self, out):
        assert main(["sweep", "--gammas", "", "--out", str(out)]) == EXIT_USAGE
        assert main(["sweep", "--gamma-points", "0", "--out", str(out)]) == EXIT_USAGE

    def test_negative_gamma(self, out):
        assert main(["sweep", "--gammas", "0.1,-0.2", "--out", str(out)]) == EXIT_USAGE

    def test_single_gamma_matches_dynamics(self, tmp_path):
        sweep_out, dyn_out = tmp_path / "s.csv", tmp_path / "d.csv"
        common = ["--p", "0.8", "--alpha", "1", "--gamma-over-omega", "0.01", "--steps", "400"]
        sweep_args = ["sweep", "--gammas", "0.01", "--p", "0.8", "--alpha", "1", "--steps", "400"]
        assert main(sweep_args + ["--out", str(sweep_out)]) == EXIT_OK
        assert main(["dynamics", *common, "--out", str(dyn_out)]) == EXIT_OK
        s_header, s_data = read_csv(sweep_out)
        _, d_data = read_csv(dyn_out)
        assert s_data.shape == (1, 402)
        assert_allclose(np.array(s_header[1:], dtype=float), d_data[:, 0], atol=1e-12)
        assert_allclose(s_data[0, 1:], d_data[:, 2], atol=1e-12, rtol=0)

    def test_log_grid(self, out):
        args = ["sweep", "--gamma-points", "5", "--steps", "10", "--out", str(out)]
        assert main(args) == EXIT_OK
        _, data = read_csv(out)
        assert_allclose(data[:, 0], np.geomspace(1e-3, 1, 5), rtol=1e-11)


def test_argparse_errors_are_usage():
    assert main(["no-such-command"]) == EXIT_USAGE
    assert main(["dynamics", "--p", "abc"]) == EXIT_USAGE


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "cavdiscord", "limits", "--p", "0.5"],
        capture_output=True,
        text=True,
        cwd=tmp_path,
    )
    assert proc.returncode == 0
    assert "larger: discord" in proc.stdout
