"""
Assembly of the run artifacts: one CSV per plot-ready table and a JSON summary.

Column orders are fixed by ``FIGURE_COLUMNS``. Every CSV carries the run manifest as
``# key: value`` lines above its header; apart from the timestamp line the files are
byte-identical for identical inputs.
"""
import math
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

import numpy as np

from cooling.occupation import cooling_curve
from cooling.spectrum import CoolingParams
from core_model.consistency import validate
from core_model.derived import derive
from core_model.system_config import SystemConfig
from estimation.sensitivity import sensitivity, wire_radius_sweep
from exceptions import MissingStageError
from inductance_coupling.coupling import sweep
from magnetostatics_trap.trap import force_table
from noise_budget.channels import full_budget
from utils import get_logger, save_dataframe_as_csv, save_json

logger = get_logger(__name__)

TOOL_VERSION = "1.0.0"

FIGURE_COLUMNS: Dict[str, List[str]] = {
    "force_curve": ["z", "force", "linear_force"],
    "coupling_vs_qubit_radius": ["value", "mutual_inductance", "coupling_hz"],
    "coupling_vs_sphere_radius": ["value", "mutual_inductance", "coupling_hz"],
    "coupling_vs_system_scale": ["value", "qubit_radius", "coupling_hz"],
    "cooling_occupation": ["N_th", "n_LD", "n_f"],
    "ideal_sensitivity": ["a", "omega_hz", "ideal_prhz"],
    "corrected_sensitivity": ["a", "corrected_prhz", "fidelity", "cycle_time_s"],
}
# bundle key feeding each figure table
FIGURE_SOURCES = {
    "force_curve": "force_table",
    "coupling_vs_qubit_radius": "sweep_qubit_radius",
    "coupling_vs_sphere_radius": "sweep_sphere_radius",
    "coupling_vs_system_scale": "sweep_system_scale",
    "cooling_occupation": "cooling_curve",
    "ideal_sensitivity": "wire_sweep",
    "corrected_sensitivity": "wire_sweep",
}
REQUIRED_STAGES = ("consistency", "derived", "budget", "sensitivity") + tuple(
    dict.fromkeys(FIGURE_SOURCES.values()))


@dataclass(frozen=True)
class RunManifest:
    """
    Attributes:
        subcommand: CLI subcommand that produced the artifacts.
        config_path: System configuration file.
        seed: Master seed of the run.
        outputs: Paths of the files written.
        version: Tool version.
        timestamp: UTC creation time, ISO 8601.
    """
    subcommand: str
    config_path: str
    seed: int
    outputs: List[str] = field(default_factory=list)
    version: str = TOOL_VERSION
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))

    def header_lines(self) -> Dict[str, Any]:
        return {
            "subcommand": self.subcommand,
            "config": self.config_path,
            "seed": self.seed,
            "version": self.version,
            "timestamp": self.timestamp,
        }

    def as_dict(self) -> Dict[str, Any]:
        return {**self.header_lines(), "outputs": list(self.outputs)}


def _logspace(low: float, high: float, points: int) -> np.ndarray:
    return np.logspace(math.log10(low), math.log10(high), points)


def collect_results(cfg: SystemConfig, settings: Dict[str, Any], n_jobs: int = 1) -> Dict[str, Any]:
    """
    Runs every stage the report needs.

    Args:
        cfg (SystemConfig): System configuration.
        settings (dict): Run settings with ``cooling``, ``wire_sweep`` and ``coupling_sweep`` sections.
        n_jobs (int): Worker count for sweeps.

    Returns:
        dict: Results keyed by stage name.
    """
    derived = derive(cfg)
    budget = full_budget(cfg, derived=derived)
    z_eq, gap = cfg.equilibrium_height, cfg.geometry.sphere_ring_gap

    coupling = settings["coupling_sweep"]
    points = coupling["points"]
    cooling = settings["cooling"]
    params = CoolingParams.from_config(
        cfg, coupling_hz=cooling["coupling_hz"], resonator_damping=2.0 * math.pi * budget.total_rate_hz)
    wire = settings["wire_sweep"]
    return {
        "consistency": validate(cfg),
        "derived": derived,
        "budget": budget,
        "sensitivity": sensitivity(cfg, budget, derived),
        "force_table": force_table(cfg, z_eq - 0.5 * gap, z_eq + 0.5 * gap),
        "sweep_qubit_radius": sweep(cfg, "qubit_radius", np.linspace(
            coupling["qubit_radius_min"], coupling["qubit_radius_max"], points), n_jobs).table,
        "sweep_sphere_radius": sweep(cfg, "sphere_radius", np.linspace(
            coupling["sphere_radius_min"], coupling["sphere_radius_max"], points), n_jobs).table,
        "sweep_system_scale": sweep(cfg, "system_scale", np.linspace(
            coupling["scale_min"], coupling["scale_max"], points), n_jobs).table,
        "cooling_curve": cooling_curve(
            params, _logspace(cooling["n_th_min"], cooling["n_th_max"], cooling["points"]), n_jobs=n_jobs),
        "wire_sweep": wire_radius_sweep(
            cfg, np.linspace(wire["a_min"], wire["a_max"], wire["points"]), n_jobs),
    }


def emit_report(
    bundle: Dict[str, Any],
    out_dir: str,
    manifest: RunManifest,
    headline: Optional[Dict[str, float]] = None,
) -> Dict[str, str]:
    """
    Writes the figure tables, the consistency and budget tables and a JSON summary.

    Args:
        bundle (dict): Results from ``collect_results``.
        out_dir (str): Destination directory, created if needed.
        manifest (RunManifest): Manifest written into every artifact.
        headline (dict, optional): Extra values for the summary.

    Returns:
        dict: Artifact name to file path.

    Raises:
        MissingStageError: If any upstream stage is absent from the bundle.
    """
    missing = [stage for stage in REQUIRED_STAGES if bundle.get(stage) is None]
    if missing:
        raise MissingStageError(missing)
    os.makedirs(out_dir, exist_ok=True)
    header = manifest.header_lines()
    written = {}

    for name, columns in FIGURE_COLUMNS.items():
        path = os.path.join(out_dir, f"{name}.csv")
        save_dataframe_as_csv(bundle[FIGURE_SOURCES[name]][columns], path, header_lines=header)
        written[name] = path

    written["consistency"] = os.path.join(out_dir, "consistency.csv")
    bundle["consistency"].save_csv(written["consistency"], header_lines=header)
    written["noise_budget"] = os.path.join(out_dir, "noise_budget.csv")
    save_dataframe_as_csv(bundle["budget"].to_dataframe(), written["noise_budget"], header_lines=header)

    report = bundle["sensitivity"]
    summary = {
        "manifest": {**manifest.as_dict(), "outputs": sorted(written.values())},
        "derived": bundle["derived"].as_dict(),
        "noise_budget": bundle["budget"].as_dict(),
        "sensitivity": report.as_dict(),
        "headline": {
            "corrected_prhz": report.corrected_prhz,
            "ideal_prhz": report.ideal_prhz,
            "fidelity": report.fidelity,
            "corrected_ugal_prhz": report.corrected_ugal_prhz,
            **(headline or {}),
        },
        "columns": FIGURE_COLUMNS,
    }
    written["summary"] = os.path.join(out_dir, "summary.json")
    save_json(written["summary"], summary)
    logger.info("report written to %s: corrected Delta g / g = %.4g /sqrt(Hz)", out_dir, report.corrected_prhz)
    return written
