import json
import os

import pytest

from cli import EXIT_FAILURE, EXIT_INVALID, EXIT_OK, EXIT_USAGE, run
from core_model.system_config import save_config
from exceptions import MissingStageError
from report import FIGURE_COLUMNS, RunManifest, emit_report
from utils import read_csv_with_header, read_json_as_dict


@pytest.fixture
def out_dir(tmpdir):
    """Directory for the CLI artifacts"""
    return str(tmpdir.join("outputs"))


@pytest.fixture
def cli_args(run_settings_file_path, out_dir):
    """Builds an argv for a subcommand with the small run settings"""
    def build(command, *extra, config=None):
        argv = [command]
        if config is not None:
            argv.append(config)
        return argv + ["--settings", run_settings_file_path, "--out-dir", out_dir, *extra]
    return build


def test_validate(cli_args, out_dir):
    """validate writes the consistency table and the derived summary."""
    assert run(cli_args("validate")) == EXIT_OK

    table = read_csv_with_header(os.path.join(out_dir, "consistency.csv"))
    assert len(table) == 12
    summary = read_json_as_dict(os.path.join(out_dir, "validate.json"))
    assert summary["manifest"]["subcommand"] == "validate"
    assert set(summary) >= {"derived", "trap", "deviations"}


def test_validate_strict_fails_on_deviations(cli_args):
    """Recomputed values never match the rounded reference values to 1e-9."""
    assert run(cli_args("validate", "--strict")) == EXIT_INVALID


@pytest.mark.parametrize("argv", [["validate", "--no-such-flag"], [], ["teleport"]])
def test_usage_errors(argv):
    """Unknown flags, unknown subcommands and a missing subcommand are usage errors."""
    assert run(argv) == EXIT_USAGE


def test_help_exits_cleanly():
    """--help prints usage and succeeds."""
    assert run(["--help"]) == EXIT_OK


def test_bad_config_is_invalid(cli_args, config_text, tmpdir):
    """A value that is not a number makes the configuration invalid."""
    broken = config_text.replace("sphere_radius = 10.0e-6", "sphere_radius = abc")
    config_path = str(tmpdir.join("broken.cfg"))
    with open(config_path, "w", encoding="utf-8") as file:
        file.write(broken)

    assert run(cli_args("validate", config=config_path)) == EXIT_INVALID


def test_config_is_read_under_any_file_name(cli_args, config_text, tmpdir, out_dir):
    """The configuration is a positional path, so a renamed copy of the reference file works."""
    config_path = str(tmpdir.join("my_device.cfg"))
    with open(config_path, "w", encoding="utf-8") as file:
        file.write(config_text)

    assert run(cli_args("validate", config=config_path)) == EXIT_OK
    assert read_json_as_dict(os.path.join(out_dir, "validate.json"))["manifest"]["config"] == config_path


def test_design_on_reference_device(cli_args, out_dir):
    """The pinned device yields K + 1 = 32 couplings."""
    assert run(cli_args("design")) == EXIT_OK

    ladder = read_csv_with_header(os.path.join(out_dir, "lambda_schedule.csv"))
    assert len(ladder) == 32
    assert list(ladder.columns) == ["k", "coupling_hz", "qubit_current"]
    assert "coupling_cap_hz" in read_json_as_dict(os.path.join(out_dir, "design.json"))


def test_design_in_derived_mode_is_infeasible(cli_args, derived_config, tmpdir):
    """With omega from geometry the ladder exceeds the qubit's coupling cap."""
    config_path = str(tmpdir.join("derived.cfg"))
    save_config(derived_config, config_path)

    assert run(cli_args("design", "--config", config_path)) == EXIT_INVALID


def test_budget_channel_subset(cli_args, out_dir):
    """--channels restricts the budget table to the named channels."""
    assert run(cli_args("budget", "--channels", "gas")) == EXIT_OK

    table = read_csv_with_header(os.path.join(out_dir, "noise_budget.csv"))
    assert list(table["channel"]) == ["gas"]


def test_protocol(cli_args, out_dir):
    """One row per trial and the protocol summary."""
    assert run(cli_args("protocol")) == EXIT_OK

    trials = read_csv_with_header(os.path.join(out_dir, "protocol_trials.csv"))
    assert len(trials) == 40
    summary = read_json_as_dict(os.path.join(out_dir, "protocol.json"))["protocol"]
    assert summary["doublings"] == 4
    assert summary["trials"] == 40


def test_protocol_rejects_pi_over_m_offsets(cli_args):
    """The pi / M(K, k) offset basis is reported as an infeasible protocol."""
    assert run(cli_args("protocol", "--offset", "literal")) == EXIT_INVALID


def test_protocol_with_fixed_gravity(cli_args, out_dir):
    """--g-true fixes phi0 and reports the estimate back on the first branch."""
    assert run(cli_args("protocol", "--g-true", "9.81")) == EXIT_OK

    summary = read_json_as_dict(os.path.join(out_dir, "protocol.json"))["protocol"]
    assert summary["g_true"] == 9.81
    assert {"phi0_true", "phi0_estimate", "g_on_branch", "g_estimate_on_branch"} <= set(summary)


def test_protocol_is_reproducible(run_settings_file_path, tmpdir):
    """Two runs with the same seed write the same trial table."""
    tables = []
    for name in ("first", "second"):
        out_dir = str(tmpdir.join(name))
        argv = ["protocol", "--settings", run_settings_file_path, "--out-dir", out_dir, "--seed", "5"]
        assert run(argv) == EXIT_OK
        tables.append(read_csv_with_header(os.path.join(out_dir, "protocol_trials.csv")))

    assert tables[0].equals(tables[1])


def test_calibrate_synthetic(cli_args, out_dir):
    """The fit of a synthetic record recovers the generating parameters."""
    assert run(cli_args("calibrate", "--synthetic")) == EXIT_OK

    summary = read_json_as_dict(os.path.join(out_dir, "calibration.json"))
    assert all(error < 1e-3 for error in summary["relative_errors"].values())
    assert os.path.isfile(os.path.join(out_dir, "calibration_record.csv"))


def test_cool(cli_args, out_dir):
    """The cooling curve has one row per N_th point."""
    assert run(cli_args("cool")) == EXIT_OK

    curve = read_csv_with_header(os.path.join(out_dir, "cooling_curve.csv"))
    assert len(curve) == 7
    assert read_json_as_dict(os.path.join(out_dir, "cooling.json"))["n_f"] > 0


def test_sweep(cli_args, out_dir):
    """The default sweep varies the qubit radius."""
    assert run(cli_args("sweep")) == EXIT_OK

    table = read_csv_with_header(os.path.join(out_dir, "sweep_qubit_radius.csv"))
    assert len(table) == 15


@pytest.mark.slow
def test_report(cli_args, out_dir):
    """report writes every table with its fixed columns and a headline."""
    assert run(cli_args("report")) == EXIT_OK

    for name, columns in FIGURE_COLUMNS.items():
        table = read_csv_with_header(os.path.join(out_dir, f"{name}.csv"))
        assert list(table.columns) == columns
    assert list(read_csv_with_header(os.path.join(out_dir, "ideal_sensitivity.csv")).columns) == [
        "a", "omega_hz", "ideal_prhz"]
    summary = read_json_as_dict(os.path.join(out_dir, "summary.json"))
    assert summary["headline"]["corrected_prhz"] > summary["headline"]["ideal_prhz"] > 0


def test_emit_report_needs_every_stage(tmpdir):
    """An empty bundle names the missing stages."""
    manifest = RunManifest(subcommand="report", config_path="reference_device.cfg", seed=0)

    with pytest.raises(MissingStageError):
        emit_report({}, str(tmpdir), manifest)


def test_unexpected_failure_writes_traceback(run_settings, out_dir, tmpdir):
    """Settings without a protocol section fail with exit code 1 and a saved traceback."""
    settings = {key: value for key, value in run_settings.items() if key != "protocol"}
    settings_path = str(tmpdir.join("partial.json"))
    with open(settings_path, "w", encoding="utf-8") as file:
        json.dump(settings, file)

    assert run(["protocol", "--settings", settings_path, "--out-dir", out_dir]) == EXIT_FAILURE
    assert os.path.isfile(os.path.join(out_dir, "errors", "cli_error.txt"))
