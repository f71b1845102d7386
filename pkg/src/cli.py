"""
Command-line front end: validate -> design -> budget -> protocol -> report.

Every subcommand reads a system configuration and the JSON run settings, writes its
tables and a JSON summary to ``--out-dir`` and returns an exit code:
0 on success, 2 when the configuration or a requested point is invalid, 64 on
usage errors and 1 on any other failure (traceback in ``<out-dir>/errors``).
"""
import argparse
import json
import math
import os
import sys
import traceback
from dataclasses import replace
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from calibration.fitting import CalibrationRecord, fit_parameters, synthetic_record
from calibration.free_evolution import CalibrationParams
from config import paths
from cooling.occupation import cooling_curve, steady_state_occupation
from cooling.spectrum import CoolingParams
from core_model.consistency import validate
from core_model.derived import derive
from core_model.system_config import SystemConfig, load_config
from design_tuning.tuner import tune_design
from estimation.schedule import OFFSET_MODES
from estimation.sensitivity import gravity_from_phase, phase_from_gravity, wire_radius_sweep
from estimation.simulator import run_protocol_trials
from exceptions import ConfigError, DomainError, ScheduleInfeasibleError
from inductance_coupling.coupling import SWEEP_VARIABLES, lambda_schedule, sweep
from magnetostatics_trap.trap import trap_profile
from noise_budget.channels import CHANNELS, full_budget
from report import RunManifest, collect_results, emit_report
from utils import (get_logger, make_serializable, read_csv_with_header, read_json_as_dict,
                   save_dataframe_as_csv, save_json)

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INVALID = 2
EXIT_USAGE = 64


class Context:
    """Resolved inputs shared by every subcommand."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config_path = args.config_option or args.config or paths.SYSTEM_CONFIG_FILE_PATH
        self.settings = read_json_as_dict(args.settings)
        self.seed = args.seed if args.seed is not None else int(self.settings["seed_value"])
        self.n_jobs = int(self.settings.get("n_jobs", 1))
        self.out_dir = args.out_dir
        self.cfg: SystemConfig = load_config(self.config_path)
        self.outputs: List[str] = []
        os.makedirs(self.out_dir, exist_ok=True)

    def manifest(self) -> RunManifest:
        return RunManifest(
            subcommand=self.args.command, config_path=self.config_path, seed=self.seed,
            outputs=list(self.outputs))

    def path(self, file_name: str) -> str:
        file_path = os.path.join(self.out_dir, file_name)
        self.outputs.append(file_path)
        return file_path

    def write_table(self, table: pd.DataFrame, file_name: str) -> str:
        file_path = self.path(file_name)
        save_dataframe_as_csv(table, file_path, header_lines=self.manifest().header_lines())
        return file_path

    def write_summary(self, file_name: str, summary: Dict[str, Any]) -> Dict[str, Any]:
        file_path = self.path(file_name)
        document = {"manifest": self.manifest().as_dict(), **summary}
        save_json(file_path, document)
        if self.args.json:
            print(json.dumps(document, default=make_serializable, sort_keys=True, indent=4))
        return document


def run_validate(ctx: Context) -> int:
    report = validate(ctx.cfg)
    report.save_csv(ctx.path("consistency.csv"), header_lines=ctx.manifest().header_lines())
    deviations = report.deviations()
    for row in deviations:
        logger.warning("%s deviates from its reference value by %.3g", row.name, row.rel_dev)
    ctx.write_summary("validate.json", {
        "derived": derive(ctx.cfg).as_dict(),
        "trap": trap_profile(ctx.cfg).as_dict(),
        "deviations": [row.name for row in deviations],
    })
    if ctx.args.strict and deviations:
        logger.error("%d quantities outside tolerance", len(deviations))
        return EXIT_INVALID
    return EXIT_OK


def run_design(ctx: Context) -> int:
    derived = derive(ctx.cfg)
    ladder = lambda_schedule(ctx.cfg, derived)
    ctx.write_table(ladder.to_dataframe(), "lambda_schedule.csv")
    summary: Dict[str, Any] = {"derived": derived.as_dict(), "coupling_cap_hz": ladder.cap / (2.0 * math.pi)}
    if ctx.args.optimize:
        summary["best_geometry"] = tune_design(
            ctx.cfg, results_file_path=ctx.path("design_trials.csv"),
            tuning_specs_file_path=ctx.args.tuning_specs, num_trials=ctx.args.trials)
    ctx.write_summary("design.json", summary)
    return EXIT_OK


def run_sweep(ctx: Context) -> int:
    variable = ctx.args.variable
    if variable == "wire_radius":
        wire = ctx.settings["wire_sweep"]
        table = wire_radius_sweep(ctx.cfg, np.linspace(wire["a_min"], wire["a_max"], wire["points"]), ctx.n_jobs)
        best = table.loc[table["corrected_prhz"].idxmin()]
        summary = {"variable": variable, "best_a": best["a"], "best_corrected_prhz": best["corrected_prhz"]}
    else:
        settings = ctx.settings["coupling_sweep"]
        prefix = "scale" if variable == "system_scale" else variable
        values = np.linspace(settings[f"{prefix}_min"], settings[f"{prefix}_max"], settings["points"])
        result = sweep(ctx.cfg, variable, values, ctx.n_jobs)
        table = result.table
        summary = {"variable": variable, "argmax": result.argmax, "max_coupling_hz": result.max_coupling_hz}
    ctx.write_table(table, f"sweep_{variable}.csv")
    ctx.write_summary(f"sweep_{variable}.json", summary)
    return EXIT_OK


def run_cool(ctx: Context) -> int:
    args, settings = ctx.args, ctx.settings["cooling"]
    budget = full_budget(ctx.cfg)
    params = CoolingParams.from_config(
        ctx.cfg,
        coupling_hz=args.coupling_hz if args.coupling_hz is not None else settings["coupling_hz"],
        resonator_damping=2.0 * math.pi * budget.total_rate_hz,
    )
    n_th_min = args.n_th_min if args.n_th_min is not None else settings["n_th_min"]
    n_th_max = args.n_th_max if args.n_th_max is not None else settings["n_th_max"]
    points = args.points if args.points is not None else settings["points"]
    harmonics = args.harmonics if args.harmonics is not None else settings.get("harmonics", 1)
    grid = np.logspace(math.log10(n_th_min), math.log10(n_th_max), points)
    curve = cooling_curve(params, grid, harmonics=harmonics, n_jobs=ctx.n_jobs)
    ctx.write_table(curve, "cooling_curve.csv")
    result = steady_state_occupation(params, n_th_max, harmonics)
    ctx.write_table(result.spectrum, "qubit_spectrum.csv")
    ctx.write_summary("cooling.json", {
        "cooling_rate": result.cooling_rate,
        "backaction": result.backaction,
        "zeta": result.zeta,
        "n_th": result.n_th,
        "n_ld": result.n_ld,
        "n_f": result.n_f,
        "amplitude_integral": result.amplitude_integral,
        "amplitude_cutoff": result.amplitude_cutoff,
    })
    return EXIT_OK


def run_budget(ctx: Context) -> int:
    channels = ctx.args.channels.split(",") if ctx.args.channels else CHANNELS
    budget = full_budget(ctx.cfg, channels=[name.strip() for name in channels if name.strip()])
    ctx.write_table(budget.to_dataframe(), "noise_budget.csv")
    ctx.write_summary("noise_budget.json", {"noise_budget": budget.as_dict()})
    return EXIT_OK


def run_protocol(ctx: Context) -> int:
    args, settings = ctx.args, ctx.settings["protocol"]
    true_phase, extras = None, {}
    if args.g_true is not None:
        derived = derive(ctx.cfg)
        true_phase = phase_from_gravity(args.g_true, ctx.cfg, derived)
    summary = run_protocol_trials(
        doublings=args.K if args.K is not None else settings["K"],
        fidelity=args.fidelity if args.fidelity is not None else settings["fidelity"],
        trials=args.trials if args.trials is not None else settings["trials"],
        seed=ctx.seed,
        final_count=args.M_K if args.M_K is not None else settings["M_K"],
        increment=args.mu if args.mu is not None else settings["mu"],
        inflate=args.inflate,
        offset_mode=args.offset or settings["offset_rule"],
        true_phase=true_phase,
        n_jobs=ctx.n_jobs,
    )
    if true_phase is not None:
        mean_estimate = float(np.angle(np.mean(np.exp(1j * summary.trials["estimate"])))) % (2.0 * math.pi)
        extras = {
            "g_true": args.g_true,
            "phi0_true": true_phase,
            "phi0_estimate": mean_estimate,
            "g_on_branch": gravity_from_phase(true_phase, ctx.cfg, derived),
            "g_estimate_on_branch": gravity_from_phase(mean_estimate, ctx.cfg, derived),
        }
        summary = replace(summary, extras=extras)
    ctx.write_table(summary.trials, "protocol_trials.csv")
    ctx.write_table(summary.schedule.to_dataframe(), "protocol_schedule.csv")
    ctx.write_summary("protocol.json", {"protocol": summary.as_dict()})
    return EXIT_OK


def run_calibrate(ctx: Context) -> int:
    settings = ctx.settings["calibration"]
    prior = CalibrationParams(
        qubit_splitting=settings["qubit_splitting"],
        trap_frequency=settings["trap_frequency"],
        coupling=settings["coupling"],
    )
    if ctx.args.data:
        record = CalibrationRecord.from_dataframe(read_csv_with_header(ctx.args.data))
    else:
        record = synthetic_record(
            prior, samples=settings["samples"], shots=settings["shots"],
            span_periods=settings["span_periods"], seed=ctx.seed)
        ctx.write_table(record.to_dataframe(), "calibration_record.csv")
    fit = fit_parameters(record, prior)
    summary: Dict[str, Any] = {"fit": fit.as_dict()}
    if record.true_params is not None:
        truth = record.true_params
        summary["relative_errors"] = {
            name: abs(getattr(fit.params, name) / getattr(truth, name) - 1.0)
            for name in ("qubit_splitting", "trap_frequency", "coupling")
        }
    ctx.write_summary("calibration.json", summary)
    return EXIT_OK


def run_report(ctx: Context) -> int:
    bundle = collect_results(ctx.cfg, ctx.settings, ctx.n_jobs)
    written = emit_report(bundle, ctx.out_dir, ctx.manifest())
    ctx.outputs.extend(written.values())
    if ctx.args.json:
        print(json.dumps(read_json_as_dict(written["summary"])["headline"], sort_keys=True, indent=4))
    return EXIT_OK


COMMANDS: Dict[str, Callable[[Context], int]] = {
    "validate": run_validate,
    "design": run_design,
    "sweep": run_sweep,
    "cool": run_cool,
    "budget": run_budget,
    "protocol": run_protocol,
    "calibrate": run_calibrate,
    "report": run_report,
}


def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parses the subcommand and its flags."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", nargs="?", default=None, help="System configuration file.")
    common.add_argument("--config", dest="config_option", default=None,
                        help="System configuration file (alternative to the positional argument).")
    common.add_argument("--settings", default=paths.RUN_CONFIG_FILE_PATH, help="JSON run settings.")
    common.add_argument("--out-dir", default=paths.OUTPUT_DIR, help="Directory for the artifacts.")
    common.add_argument("--seed", type=int, default=None, help="Master seed; defaults to the run settings.")
    common.add_argument("--json", action="store_true", help="Also print the summary JSON to stdout.")

    parser = argparse.ArgumentParser(description="Magnetomechanical quantum gravimeter simulator.")
    commands = parser.add_subparsers(dest="command", required=True)

    validate_parser = commands.add_parser("validate", parents=[common], help="Recompute derived quantities.")
    validate_parser.add_argument("--strict", action="store_true",
                                 help="Fail when a derived quantity deviates from its reference value.")

    design_parser = commands.add_parser("design", parents=[common], help="Coupling ladder and geometry search.")
    design_parser.add_argument("--optimize", action="store_true", help="Run the Bayesian geometry search.")
    design_parser.add_argument("--trials", type=int, default=None, help="Number of search trials.")
    design_parser.add_argument("--tuning-specs", default=paths.DESIGN_TUNING_CONFIG_FILE_PATH,
                               help="JSON search-space spec.")

    sweep_parser = commands.add_parser("sweep", parents=[common], help="Coupling or sensitivity sweep.")
    sweep_parser.add_argument("--variable", choices=SWEEP_VARIABLES + ("wire_radius",), default="qubit_radius")

    cool_parser = commands.add_parser("cool", parents=[common], help="Sideband cooling of the resonator.")
    cool_parser.add_argument("--coupling-hz", type=float, default=None)
    cool_parser.add_argument("--n-th-min", type=float, default=None)
    cool_parser.add_argument("--n-th-max", type=float, default=None)
    cool_parser.add_argument("--points", type=int, default=None)
    cool_parser.add_argument("--harmonics", type=int, default=None)

    budget_parser = commands.add_parser("budget", parents=[common], help="Damping channels and fidelity.")
    budget_parser.add_argument("--channels", default=None, help=f"Comma-separated subset of {','.join(CHANNELS)}.")

    protocol_parser = commands.add_parser("protocol", parents=[common], help="Phase-estimation Monte Carlo.")
    protocol_parser.add_argument("--K", type=int, default=None, help="Number of doublings.")
    protocol_parser.add_argument("--fidelity", type=float, default=None)
    protocol_parser.add_argument("--trials", type=int, default=None)
    protocol_parser.add_argument("--M-K", dest="M_K", type=int, default=None, help="Repetitions of the last stage.")
    protocol_parser.add_argument("--mu", type=int, default=None, help="Extra repetitions per earlier stage.")
    protocol_parser.add_argument("--inflate", action="store_true", help="Scale stage counts by 1 / f^2.")
    protocol_parser.add_argument("--offset", choices=OFFSET_MODES, default=None)
    protocol_parser.add_argument("--g-true", type=float, default=None,
                                 help="Fix phi0 from this gravitational acceleration (m/s^2).")

    calibrate_parser = commands.add_parser("calibrate", parents=[common], help="Fit (omega_q, omega, lambda).")
    source = calibrate_parser.add_mutually_exclusive_group()
    source.add_argument("--data", default=None, help="CSV with t, sigma_x and shots columns.")
    source.add_argument("--synthetic", action="store_true", help="Fit a synthetic record (default).")

    commands.add_parser("report", parents=[common], help="All report tables and the headline sensitivity.")
    return parser.parse_args(argv)


def _write_error(out_dir: str, trace: str) -> str:
    errors_dir = os.path.join(out_dir, paths.ERRORS_DIR_NAME)
    os.makedirs(errors_dir, exist_ok=True)
    error_path = os.path.join(errors_dir, paths.CLI_ERROR_FILE_NAME)
    with open(error_path, "w", encoding="utf-8") as file:
        file.write(trace)
    return error_path


def run(argv: Optional[List[str]] = None) -> int:
    """
    Runs one subcommand.

    Args:
        argv (list, optional): Arguments without the program name; ``sys.argv[1:]`` when omitted.

    Returns:
        int: Exit code.
    """
    try:
        args = parse_arguments(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        ctx = Context(args)
        return COMMANDS[args.command](ctx)
    except (ConfigError, DomainError, ScheduleInfeasibleError) as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return EXIT_INVALID
    except Exception as exc:
        error_path = _write_error(args.out_dir, traceback.format_exc())
        logger.error("%s failed: %s (traceback in %s)", args.command, exc, error_path)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(run())
