"""Config parsing, the run/sweep pipelines, file formats, determinism."""

import json
import os
from pathlib import Path

import pytest

from blowup_lab.cli import main
from blowup_lab.config import config_from_mapping, load_config, sweep_configs
from blowup_lab.errors import ConfigError, ValidationError
from blowup_lab.runner import run_experiment, run_sweep, validate_config

DIRICHLET_TOML = """\
problem = "dirichlet"
p = 2.0
n_dim = 1
radius = 1.0
num_cells = 100
amplitude = 2.0
shape = 1.0
reaction_safety = 0.025
record_every = 100
t_max = 1.0
"""


@pytest.fixture()
def config_file(tmp_path):
    path = tmp_path / "exp.toml"
    path.write_text(DIRICHLET_TOML)
    return path


class TestConfigParsing:
    def test_round_trip(self, config_file):
        cfg = load_config(config_file)
        assert cfg.problem == "dirichlet"
        assert cfg.num_cells == 100

    def test_unknown_keys_rejected(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text(DIRICHLET_TOML + 'mystery_knob = 3\n')
        with pytest.raises(ConfigError, match="mystery_knob"):
            load_config(path)

    def test_small_exponent_rejected(self):
        with pytest.raises(ConfigError, match="p must exceed 1"):
            config_from_mapping({"p": 0.5})

    @pytest.mark.parametrize("key,value", [
        ("num_cells", 4),
        ("radius", -1.0),
        ("amplitude", 0.0),
        ("shape", 0.5),
        ("reaction_safety", 0.0),
        ("record_every", 0),
        ("problem", "robin"),
        ("curvature", -2.0),
    ])
    def test_bounds_checked_at_parse(self, key, value):
        with pytest.raises(ConfigError):
            config_from_mapping({key: value})

    def test_integer_fields_must_be_integers(self):
        with pytest.raises(ConfigError):
            config_from_mapping({"num_cells": 100.5})

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.toml")

    def test_sweep_requires_axes(self):
        cfg = config_from_mapping({})
        with pytest.raises(ConfigError, match="run command"):
            sweep_configs(cfg)


class TestValidationGate:
    def test_strict_mode_rejects_sign_violating_bump(self):
        # amplitude 2 fails the source-sign condition; permissive mode runs
        # it (the condition gates only the time-monotonicity claim), strict
        # mode refuses by name
        cfg = config_from_mapping({"amplitude": 2.0, "strict_validation": True,
                                   "num_cells": 64})
        with pytest.raises(ValidationError, match="source-sign"):
            validate_config(cfg)

    def test_no_output_on_validation_failure(self, tmp_path):
        cfg = config_from_mapping({"amplitude": 2.0, "strict_validation": True,
                                   "num_cells": 64})
        out = tmp_path / "out"
        with pytest.raises(ValidationError):
            run_experiment(cfg, out, quiet=True)
        assert not out.exists()

    def test_incompatible_flux_datum_rejected(self):
        cfg = config_from_mapping({"problem": "neumann", "radius": 1.0,
                                   "num_cells": 64})
        with pytest.raises(ValidationError, match="no compatible curvature"):
            validate_config(cfg)


class TestRunPipeline:
    def test_reference_run_writes_artifacts(self, config_file, tmp_path):
        out = tmp_path / "run1"
        code = main(["run", str(config_file), "--out", str(out), "--quiet"])
        assert code == 0
        for name in ("trace.csv", "summary.json", "profile_final.csv",
                     "profile.svg", "rate_fit.svg"):
            assert (out / name).exists(), name
        summary = json.loads((out / "summary.json").read_text())
        assert summary["blew_up"] is True

    def test_golden_csv_headers(self, config_file, tmp_path):
        out = tmp_path / "run2"
        main(["run", str(config_file), "--out", str(out), "--quiet"])
        head = (out / "trace.csv").read_text().splitlines()[0]
        assert head == "t,dt,u_center,u_boundary,u_max,argmax_r"
        head = (out / "profile_final.csv").read_text().splitlines()[0]
        assert head == "r,u"

    def test_byte_identical_reruns(self, config_file, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["run", str(config_file), "--out", str(out1), "--quiet"])
        main(["run", str(config_file), "--out", str(out2), "--quiet"])
        for name in ("summary.json", "trace.csv", "profile_final.csv",
                     "profile.svg", "rate_fit.svg"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_summary_round_trips(self, config_file, tmp_path):
        out = tmp_path / "run3"
        main(["run", str(config_file), "--out", str(out), "--quiet"])
        text = (out / "summary.json").read_text()
        data = json.loads(text)
        assert json.dumps(data, sort_keys=True, indent=2) + "\n" == text

    def test_config_error_exit_code(self, tmp_path):
        bad = tmp_path / "bad.toml"
        bad.write_text("p = 0.5\n")
        assert main(["run", str(bad), "--quiet"]) == 2

    def test_validation_error_exit_code(self, tmp_path):
        bad = tmp_path / "badic.toml"
        bad.write_text('problem = "neumann"\nradius = 1.0\nnum_cells = 64\n')
        assert main(["run", str(bad), "--quiet"]) == 3

    def test_env_var_overrides_output_root(self, config_file, tmp_path,
                                           monkeypatch):
        root = tmp_path / "envroot"
        monkeypatch.setenv("BLOWUP_LAB_OUT", str(root))
        monkeypatch.chdir(tmp_path)
        assert main(["run", str(config_file), "--quiet"]) == 0
        assert (root / "exp" / "summary.json").exists()

    def test_config_out_dir_respected(self, tmp_path, monkeypatch):
        monkeypatch.delenv("BLOWUP_LAB_OUT", raising=False)
        monkeypatch.chdir(tmp_path)
        path = tmp_path / "exp2.toml"
        path.write_text(DIRICHLET_TOML + f'out_dir = "{tmp_path / "cfgout"}"\n')
        assert main(["run", str(path), "--quiet"]) == 0
        assert (tmp_path / "cfgout" / "summary.json").exists()


class TestShippedConfigs:
    @pytest.mark.parametrize("name", ["dirichlet_reference.toml",
                                      "neumann_reference.toml",
                                      "dirichlet_resolution_sweep.toml"])
    def test_configs_parse(self, name):
        root = Path(__file__).resolve().parent.parent
        cfg = load_config(root / "configs" / name)
        assert cfg.p == 2.0


class TestSweep:
    def test_resolution_sweep_with_convergence_table(self, tmp_path):
        path = tmp_path / "sweep.toml"
        path.write_text(DIRICHLET_TOML + "sweep_num_cells = [100, 200, 400]\n")
        out = tmp_path / "sw"
        code = main(["sweep", str(path), "--out", str(out), "--quiet"])
        assert code == 0
        rows = (out / "sweep.csv").read_text().splitlines()
        assert len(rows) == 4  # header + three runs
        conv = (out / "convergence.csv").read_text().splitlines()
        assert conv[0] == "num_cells,t_hat"
        cells = [int(line.split(",")[0]) for line in conv[1:]]
        t_hats = [float(line.split(",")[1]) for line in conv[1:]]
        assert cells == [100, 200, 400]
        # refinement self-consistency: successive differences shrink
        assert abs(t_hats[1] - t_hats[0]) > abs(t_hats[2] - t_hats[1])

    def test_exponent_sweep_slopes_near_theory(self, tmp_path):
        path = tmp_path / "sweepp.toml"
        path.write_text(DIRICHLET_TOML.replace("num_cells = 100",
                                               "num_cells = 200")
                        + "sweep_p = [2.0, 3.0]\n")
        out = tmp_path / "swp"
        rows = run_sweep(load_config(path), out, quiet=True)
        by_p = {row["p"]: row for row in rows}
        assert not by_p[2.0]["failed"] and not by_p[3.0]["failed"]
        assert abs(by_p[2.0]["slope"] - 0.5) <= 0.1
        assert abs(by_p[3.0]["slope"] - 1.0 / 3.0) <= 0.1

    def test_failed_runs_flagged_not_fatal(self, tmp_path):
        path = tmp_path / "sweepbad.toml"
        path.write_text('problem = "neumann"\nnum_cells = 64\n'
                        "sweep_p = [2.0]\nradius = 1.0\n")
        out = tmp_path / "swb"
        rows = run_sweep(load_config(path), out, quiet=True)
        assert rows[0]["failed"] is True
        assert "no compatible curvature" in rows[0]["error"]
        assert (out / "sweep.csv").exists()

    def test_parallel_sweep_matches_serial(self, tmp_path):
        path = tmp_path / "sweepj.toml"
        path.write_text(DIRICHLET_TOML + "sweep_num_cells = [100, 200]\n")
        out1, out2 = tmp_path / "serial", tmp_path / "parallel"
        run_sweep(load_config(path), out1, jobs=1, quiet=True)
        run_sweep(load_config(path), out2, jobs=2, quiet=True)
        assert (out1 / "sweep.csv").read_bytes() == \
            (out2 / "sweep.csv").read_bytes()


class TestVerifyCommand:
    def test_tampered_stability_factor_fails_loudly(self, tmp_path, capsys):
        # cfl_safety = 10 makes the explicit scheme unstable; the suite must
        # fail loudly (nonzero exit, rate criteria broken) instead of
        # reporting healthy numbers
        out_dir = tmp_path / "v"
        code = main(["verify", "--quiet", "--out", str(out_dir),
                     "--set", "cfl_safety=10.0"])
        assert code == 1
        out = capsys.readouterr().out
        slope_row = next(line for line in out.splitlines()
                         if line.startswith("2a"))
        assert "FAIL" in slope_row
        assert sum(1 for line in out.splitlines()
                   if line.rstrip().endswith("FAIL")
                   or " FAIL   [" in line) >= 3
        assert (out_dir / "verify_report.txt").exists()
