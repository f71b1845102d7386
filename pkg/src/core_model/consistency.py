"""
Audit of a configuration against its own pinned reference values.

Each row recomputes one reference entry from its defining equation, taking the
other entries as the configuration provides them (pinned values in pinned mode).
"""
import math
from dataclasses import dataclass, field
from typing import Dict, List

import pandas as pd

from core_model.derived import derive
from core_model.system_config import TWO_PI, SystemConfig
from inductance_coupling.inductance import mutual_inductance, self_inductance
from magnetostatics_trap.field import current_gradient, ring_flux
from magnetostatics_trap.trap import trap_frequency
from utils import save_dataframe_as_csv, save_json

REPORT_COLUMNS = ["name", "pinned", "recomputed", "rel_dev"]
DEFAULT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ConsistencyRow:
    name: str
    pinned: float
    recomputed: float

    @property
    def rel_dev(self) -> float:
        if self.pinned == 0:
            return 0.0 if self.recomputed == 0 else math.inf
        return (self.recomputed - self.pinned) / abs(self.pinned)


@dataclass(frozen=True)
class ConsistencyReport:
    rows: List[ConsistencyRow] = field(default_factory=list)

    @property
    def recomputed(self) -> Dict[str, float]:
        return {row.name: row.recomputed for row in self.rows}

    def row(self, name: str) -> ConsistencyRow:
        for entry in self.rows:
            if entry.name == name:
                return entry
        raise KeyError(f"no consistency row named {name}")

    def deviations(self, tolerance: float = DEFAULT_TOLERANCE) -> List[ConsistencyRow]:
        """Rows whose relative deviation exceeds ``tolerance``."""
        return [row for row in self.rows if abs(row.rel_dev) > tolerance]

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame(
            [[row.name, row.pinned, row.recomputed, row.rel_dev] for row in self.rows],
            columns=REPORT_COLUMNS,
        )

    def save_csv(self, file_path: str, header_lines: Dict[str, str] = None) -> None:
        save_dataframe_as_csv(self.to_dataframe(), file_path, header_lines=header_lines)

    def save_json(self, file_path: str) -> None:
        save_json(file_path, {"rows": self.to_dataframe().to_dict(orient="records")})


def validate(cfg: SystemConfig) -> ConsistencyReport:
    """
    Recomputes every derivable reference entry and reports its deviation.

    Row names match the ``ref_`` keys of the config file, so replacing each
    reference by its recomputed value (repeatedly, while entries feed each other)
    converges to a configuration with no deviations. The config is never modified.

    Args:
        cfg (SystemConfig): System configuration.

    Returns:
        ConsistencyReport: One row per reference entry.
    """
    ref = cfg.reference
    derived = derive(cfg)
    hbar = cfg.constants.hbar
    implied_max_coupling = derived.l_max * math.sqrt(2.0 * derived.mass * derived.omega ** 3 / hbar)

    rows = [
        ConsistencyRow("trap_frequency_hz", ref.trap_frequency_hz, trap_frequency(cfg) / TWO_PI),
        ConsistencyRow("ring_self_inductance", ref.ring_self_inductance,
                       self_inductance(cfg.ring.radius, cfg.ring.wire_radius, "circular")),
        ConsistencyRow("max_resonator_current", ref.max_resonator_current,
                       current_gradient(cfg.equilibrium_height, cfg)[1]),
        ConsistencyRow("max_coupling_hz", ref.max_coupling_hz, implied_max_coupling / TWO_PI),
        ConsistencyRow("min_coupling_hz", ref.min_coupling_hz, derived.lambda0 / TWO_PI),
        ConsistencyRow("mutual_inductance", ref.mutual_inductance,
                       mutual_inductance(cfg.ring.radius, cfg.qubit.radius, cfg.geometry.ring_qubit_separation)),
        ConsistencyRow("flux", ref.flux, ring_flux(cfg.equilibrium_height, cfg)),
        ConsistencyRow("mass", ref.mass, derived.mass),
        ConsistencyRow("ground_state_width", ref.ground_state_width, derived.z0),
        ConsistencyRow("sphere_volume", ref.sphere_volume, cfg.sphere.volume),
        ConsistencyRow("magnetization", ref.magnetization, cfg.sphere.magnetization),
        ConsistencyRow("experiment_time", ref.experiment_time, derived.tau_exp),
    ]
    return ConsistencyReport(rows=rows)
