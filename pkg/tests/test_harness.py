"""Config grammar, artifact contract, exit codes, sweep and refinement fronts."""

import math
import os

import numpy as np
import pytest

from poiseuille_lc import blowup_bound_T, preset
from poiseuille_lc.cli import main
from poiseuille_lc.harness import (
    ConfigError,
    RunConfig,
    epsilon_sweep,
    parse_config,
    refinement_study,
    render_config,
    run_scenario,
)


def test_minimal_config_resolves_defaults():
    config = parse_config("preset = general")
    assert config.preset == "general"
    assert config.expects_blowup is True
    assert config.spec.epsilon == 0.05
    assert config.spec.amplitude == 206.0  # ceil(1.1 x threshold)
    assert config.spec.theta_star == math.pi / 4
    assert config.grid.nx == 32769
    assert (config.grid.x_min, config.grid.x_max) == (-4.0, 5.0)
    assert config.solver.cfl == 0.4
    assert config.solver.t_end == pytest.approx(
        1.2 * blowup_bound_T(preset("general").material), rel=1e-15)
    assert config.solver.blowup_threshold is None
    assert config.solver.trace_stride == 1
    assert config.check_hypotheses is True


def test_special_t_end_clamps_at_one():
    config = parse_config("preset = special")
    assert config.solver.t_end == 1.0
    assert config.spec.amplitude == 88.0


def test_constant_speed_disables_theorem_machinery():
    config = parse_config("preset = constant-speed")
    assert config.expects_blowup is False
    assert config.spec.amplitude == 5.0
    assert config.check_hypotheses is False
    # explicit values still win over the preset's defaults
    config = parse_config("preset = constant-speed\namplitude = 7.5")
    assert config.spec.amplitude == 7.5


def test_sections_are_cosmetic():
    text = "\n".join(["[material]", "preset = special", "[solver]", "cfl = 0.25",
                      "# comment", "epsilon = 0.1  # trailing"])
    config = parse_config(text)
    assert config.solver.cfl == 0.25
    assert config.spec.epsilon == 0.1


def test_roundtrip_preset_and_custom_material():
    for text in ("preset = general",
                 "preset = constant-speed\nnx = 1025\nt_end = 0.25",
                 "\n".join(f"{k} = {v!r}" for k, v in zip(
                     ("alpha1", "alpha2", "alpha3", "alpha4", "alpha5", "alpha6",
                      "gamma1", "gamma2", "K1", "K3"),
                     (0.0, -1.0, 1.0, 1.0, 0.0, 0.0, 2.0, 0.0, 1.0, 2.0)))):
        config = parse_config(text)
        assert parse_config(render_config(config)) == config


@pytest.mark.parametrize("text,fragment", [
    ("bogus = 1", "line 1: unknown key"),
    ("[weird]\npreset = special", "line 1: unknown section"),
    ("preset = special\npreset = general", "line 2: duplicate key"),
    ("preset = special\nepsilon =", "line 2: empty value"),
    ("just some words", "line 1: expected 'key = value'"),
    ("preset = special\nalpha1 = 0.0", "conflicts with explicit material keys"),
    ("alpha1 = 0.0", "missing:"),
    ("preset = nope", "unknown preset"),
    ("preset = special\nepsilon = fast", "line 2: epsilon must be a number"),
    ("preset = special\nepsilon = 1.5", "epsilon must be <= 1"),
    ("preset = special\nnx = 2", "nx must be >= 3"),
    ("preset = special\nnx = 4.5", "nx must be an integer"),
    ("preset = special\ncfl = 0.9", "cfl"),
    ("preset = special\nblowup_factor = 0", "blowup_factor must be > 0"),
    ("preset = special\namplitude = -3", "amplitude must be > 0"),
    ("preset = special\ncheck_hypotheses = maybe", "must be true or false"),
])
def test_config_errors_carry_line_numbers(text, fragment):
    with pytest.raises(ConfigError) as excinfo:
        parse_config(text)
    assert fragment in str(excinfo.value)


def test_override_beats_file_and_reports_as_override():
    config = parse_config("preset = special\nepsilon = 0.2", {"epsilon": "0.1"})
    assert config.spec.epsilon == 0.1
    with pytest.raises(ConfigError, match="override: unknown key"):
        parse_config("preset = special", {"nope": "1"})
    with pytest.raises(ConfigError, match="override: epsilon"):
        parse_config("preset = special", {"epsilon": "-1"})


# 1025 nodes keeps the amplitude-5 data above the gradient-resolution cap
CONTROL_TEXT = "\n".join([
    "preset = constant-speed",
    "nx = 1025",
    "t_end = 0.05",
    "snapshot_stride = 10",
    "trace_stride = 1",
])


def scenario_config(tmp_path, name, extra=""):
    text = CONTROL_TEXT + ("\n" + extra if extra else "")
    return parse_config(text, {"output_dir": str(tmp_path / name)})


def test_artifact_contract(tmp_path):
    config = scenario_config(tmp_path, "out")
    scenario = run_scenario(config)
    assert scenario.exit_code == 0
    out = config.output_dir

    with open(os.path.join(out, "timeseries.csv")) as fh:
        header = fh.readline().strip().split(",")
        rows = fh.read().strip().splitlines()
    assert header == ["t", "E", "D", "sup_abs_S", "sup_abs_R", "sup_abs_J",
                      "xi", "S_on_xi", "tildeS_on_xi"]
    assert len(rows) == len(scenario.result.records)
    first = rows[0].split(",")
    assert float(first[0]) == 0.0
    assert float(first[6]) == 0.0  # trace starts at x = 0

    snaps = sorted(os.listdir(os.path.join(out, "snapshots")))
    assert snaps[0] == "0000.csv"
    assert len(snaps) == len(scenario.result.snapshots)
    with open(os.path.join(out, "snapshots", "0000.csv")) as fh:
        assert fh.readline().strip().split(",") == [
            "x", "theta", "u", "R", "S", "J", "theta_x", "theta_t"]
        assert len(fh.read().strip().splitlines()) == config.grid.nx

    report = {}
    with open(os.path.join(out, "blowup_report.txt")) as fh:
        for line in fh:
            key, value = line.split(" = ", 1)
            report[key] = value.strip()
    assert report["detected"] == "false"
    assert report["completed"] == "true"
    assert float(report["t_final"]) == pytest.approx(0.05, abs=1e-12)
    assert set(report) == {
        "detected", "t0", "trigger", "t_bound", "threshold", "gradient_cap",
        "r_cap", "max_sup_R", "r_within_cap", "completed", "t_final", "steps",
        "E_initial", "E_final", "sup_S_initial", "sup_S_max", "max_sup_J",
        "theta_t_growth", "neg_theta_x_growth", "peak_distance_cells"}

    with open(os.path.join(out, "resolved_config.txt")) as fh:
        assert parse_config(fh.read()) == config


def test_artifacts_are_byte_identical_across_reruns(tmp_path):
    names = ("a", "b")
    outs = []
    for name in names:
        config = scenario_config(tmp_path, name)
        run_scenario(config)
        outs.append(config.output_dir)
    for rel in ("timeseries.csv", "blowup_report.txt",
                os.path.join("snapshots", "0000.csv")):
        with open(os.path.join(outs[0], rel), "rb") as fh:
            first = fh.read()
        with open(os.path.join(outs[1], rel), "rb") as fh:
            assert fh.read() == first, rel


def test_exit_code_detected_as_expected(tmp_path):
    text = "preset = special\nnx = 8193\nt_end = 0.05\nblowup_factor = 1.05"
    config = parse_config(text, {"output_dir": str(tmp_path / "hit")})
    scenario = run_scenario(config, write=False)
    assert scenario.result.blowup.detected
    assert scenario.result.blowup.trigger == "s_threshold"
    assert scenario.exit_code == 2


def test_exit_code_mismatch_is_one(tmp_path):
    # control preset tripped by an absurdly low explicit threshold
    config = parse_config(CONTROL_TEXT + "\nblowup_threshold = 1.0")
    scenario = run_scenario(config, write=False)
    assert scenario.result.blowup.detected and scenario.exit_code == 1
    # theorem preset that never gets the chance to focus
    config = parse_config("preset = special\nnx = 8193\nt_end = 0.001")
    scenario = run_scenario(config, write=False)
    assert not scenario.result.blowup.detected and scenario.exit_code == 1


# --- sweep and refinement fronts -------------------------------------------------


def test_sweep_rejects_bad_epsilon_lists(tmp_path):
    config = scenario_config(tmp_path, "sweep")
    with pytest.raises(ConfigError, match=">= 3 epsilon"):
        epsilon_sweep(config, [0.2, 0.1], write=False)
    with pytest.raises(ConfigError, match="strictly decreasing"):
        epsilon_sweep(config, [0.1, 0.2, 0.05], write=False)


def test_refinement_rejects_short_ladders(tmp_path):
    config = scenario_config(tmp_path, "refine")
    with pytest.raises(ConfigError, match=">= 3 levels"):
        refinement_study(config, levels=2, write=False)


def test_refinement_smoke(tmp_path):
    text = "\n".join(["preset = general", "x_min = -3.5", "x_max = 3.5",
                      "nx = 513", "t_end = 0.1"])
    config = parse_config(text, {"output_dir": str(tmp_path / "refine")})
    study = refinement_study(config, levels=3)
    assert study.nx_levels == [513, 1025, 2049]
    assert len(study.diff_theta) == 2 and len(study.order_theta) == 1
    assert min(study.order_theta) >= 0.8
    assert all(r >= 0 for r in study.budget_residual)
    with open(os.path.join(config.output_dir, "refinement.csv")) as fh:
        assert len(fh.read().strip().splitlines()) == 4  # header + 3 levels


# --- CLI ------------------------------------------------------------------------


def test_cli_presets_lists_all(capsys):
    assert main(["presets"]) == 0
    out = capsys.readouterr().out
    for name in ("special", "general", "constant-speed"):
        assert name in out


def test_cli_validate_preset(capsys):
    assert main(["validate", "--preset", "special"]) == 0
    assert "ok" in capsys.readouterr().out


def test_cli_validate_rejects_bad_material(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("\n".join([
        "alpha1 = 0.0", "alpha2 = -1.0", "alpha3 = 1.0", "alpha4 = 1.0",
        "alpha5 = 0.0", "alpha6 = 0.0", "gamma1 = 5.0", "gamma2 = 0.0",
        "K1 = 1.0", "K3 = 2.0"]))
    assert main(["validate", "--config", str(cfg)]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_cli_run_control(tmp_path, capsys):
    assert main(["run", "--preset", "constant-speed", "--nx", "1025",
                 "--t-end", "0.05", "--output-dir", str(tmp_path / "cli")]) == 0
    out = capsys.readouterr().out
    assert "completed" in out and "artifacts" in out
    assert os.path.exists(tmp_path / "cli" / "timeseries.csv")


def test_cli_flag_overrides_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(CONTROL_TEXT + "\n")
    out_dir = tmp_path / "flagged"
    assert main(["run", "--config", str(cfg), "--t-end", "0.02",
                 "--output-dir", str(out_dir)]) == 0
    with open(out_dir / "resolved_config.txt") as fh:
        assert parse_config(fh.read()).solver.t_end == 0.02


def test_cli_reports_errors_on_stderr(capsys):
    assert main(["run", "--preset", "special", "--cfl", "0.9"]) == 1
    assert "error:" in capsys.readouterr().err
    assert main(["validate", "--preset", "nope"]) == 1
