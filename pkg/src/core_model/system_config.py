"""
System configuration: every physical symbol of the gravimeter, loaded from a flat
``key = value`` text file with SI units.

Cyclic frequencies are stored with a ``_hz`` suffix exactly as written in the
file, and exposed in rad/s through properties; everything downstream is angular.
"""
import math
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from scipy import constants as sc

from exceptions import ConfigError
from inductance_coupling.inductance import self_inductance
from utils import get_logger

logger = get_logger(__name__)

# Critical field of lead; the sphere magnetization is limited to it
LEAD_CRITICAL_FIELD = 0.08
OMEGA_MODES = ("pinned", "derived")
# Gate time as a fraction of tau beyond which the whole run dephases the qubit
GATE_TIME_THRESHOLD = 0.05
# Lets 4 us gates on a 40 us period keep the two-slosh window, f of about 0.254
TWO_SLOSH_GATE_THRESHOLD = 0.25
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = sc.hbar
    mu0: float = sc.mu_0
    k_b: float = sc.k
    c: float = sc.c
    vacuum_impedance: float = sc.physical_constants["characteristic impedance of vacuum"][0]
    flux_quantum: float = sc.physical_constants["mag. flux quantum"][0]


CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class MagnetSphere:
    radius: float
    mu0_magnetization: float
    resistivity: float

    @property
    def volume(self) -> float:
        return 4.0 * math.pi * self.radius ** 3 / 3.0

    @property
    def magnetization(self) -> float:
        return self.mu0_magnetization / CONSTANTS.mu0

    @property
    def moment_factor(self) -> float:
        """mu0 M V, the combination every field expression carries (T m^3)."""
        return self.mu0_magnetization * self.volume


@dataclass(frozen=True)
class ResonatorRing:
    radius: float
    wire_radius: float
    density: float
    youngs_modulus: float

    @property
    def mass(self) -> float:
        return self.density * TWO_PI * self.radius * math.pi * self.wire_radius ** 2

    @property
    def self_inductance(self) -> float:
        return self_inductance(self.radius, self.wire_radius, "circular")


@dataclass(frozen=True)
class QubitParams:
    radius: float
    self_inductance: float
    splitting_hz: float
    min_current: float
    max_current: float
    t1: float
    t2: float
    temperature: float
    reset_time: float
    rotation_time: float
    measurement_time: float
    init_error: float
    rotation_error: float
    measurement_error: float

    @property
    def splitting(self) -> float:
        return TWO_PI * self.splitting_hz


@dataclass(frozen=True)
class Geometry:
    sphere_ring_gap: float
    ring_qubit_separation: float
    max_displacement: float


@dataclass(frozen=True)
class Environment:
    gas_pressure: float
    gas_temperature: float
    gas_molecule_mass: float


@dataclass(frozen=True)
class ReferenceValues:
    """Pinned reference-device entries. Only ``validate`` and the pinned ω mode read these."""
    trap_frequency_hz: float
    ring_self_inductance: float
    max_resonator_current: float
    max_coupling_hz: float
    min_coupling_hz: float
    mutual_inductance: float
    flux: float
    mass: float
    ground_state_width: float
    sphere_volume: float
    magnetization: float
    experiment_time: float

    @property
    def trap_frequency(self) -> float:
        return TWO_PI * self.trap_frequency_hz

    @property
    def max_coupling(self) -> float:
        return TWO_PI * self.max_coupling_hz

    @property
    def min_coupling(self) -> float:
        return TWO_PI * self.min_coupling_hz


@dataclass(frozen=True)
class SystemConfig:
    sphere: MagnetSphere
    ring: ResonatorRing
    qubit: QubitParams
    geometry: Geometry
    environment: Environment
    reference: ReferenceValues
    gravity: float = 9.81
    omega_mode: str = "pinned"
    gate_time_threshold: float = GATE_TIME_THRESHOLD
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)

    @property
    def equilibrium_height(self) -> float:
        """z_eq = R_s + r0, distance from sphere centre to ring plane."""
        return self.sphere.radius + self.geometry.sphere_ring_gap

    @property
    def is_pinned(self) -> bool:
        return self.omega_mode == "pinned"

    @property
    def resonator_inductance(self) -> float:
        """L_r in force for the trap: the pinned table value or the circular formula."""
        if self.is_pinned:
            return self.reference.ring_self_inductance
        return self.ring.self_inductance

    def updated(self, **overrides: Any) -> "SystemConfig":
        """
        Returns a copy with flat config keys replaced, e.g. ``cfg.updated(wire_radius=0.5e-6)``.
        Keys and units follow the file format.
        """
        values = config_to_dict(self)
        for key, value in overrides.items():
            if key not in FIELD_SPECS:
                raise ConfigError(f"unknown field: {key}", field=key)
            values[key] = value
        return _build_config(values)


# key -> (section, attribute); "system" means a top-level SystemConfig field
FIELD_SPECS: Dict[str, Tuple[str, str]] = {
    "sphere_radius": ("sphere", "radius"),
    "sphere_mu0_magnetization": ("sphere", "mu0_magnetization"),
    "sphere_resistivity": ("sphere", "resistivity"),
    "ring_radius": ("ring", "radius"),
    "wire_radius": ("ring", "wire_radius"),
    "ring_density": ("ring", "density"),
    "ring_youngs_modulus": ("ring", "youngs_modulus"),
    "qubit_radius": ("qubit", "radius"),
    "qubit_self_inductance": ("qubit", "self_inductance"),
    "qubit_splitting_hz": ("qubit", "splitting_hz"),
    "qubit_min_current": ("qubit", "min_current"),
    "qubit_max_current": ("qubit", "max_current"),
    "qubit_t1": ("qubit", "t1"),
    "qubit_t2": ("qubit", "t2"),
    "qubit_temperature": ("qubit", "temperature"),
    "reset_time": ("qubit", "reset_time"),
    "rotation_time": ("qubit", "rotation_time"),
    "measurement_time": ("qubit", "measurement_time"),
    "init_error": ("qubit", "init_error"),
    "rotation_error": ("qubit", "rotation_error"),
    "measurement_error": ("qubit", "measurement_error"),
    "sphere_ring_gap": ("geometry", "sphere_ring_gap"),
    "ring_qubit_separation": ("geometry", "ring_qubit_separation"),
    "max_displacement": ("geometry", "max_displacement"),
    "gas_pressure": ("environment", "gas_pressure"),
    "gas_temperature": ("environment", "gas_temperature"),
    "gas_molecule_mass": ("environment", "gas_molecule_mass"),
    "gravity": ("system", "gravity"),
    "omega_mode": ("system", "omega_mode"),
    "gate_time_threshold": ("system", "gate_time_threshold"),
    "ref_trap_frequency_hz": ("reference", "trap_frequency_hz"),
    "ref_ring_self_inductance": ("reference", "ring_self_inductance"),
    "ref_max_resonator_current": ("reference", "max_resonator_current"),
    "ref_max_coupling_hz": ("reference", "max_coupling_hz"),
    "ref_min_coupling_hz": ("reference", "min_coupling_hz"),
    "ref_mutual_inductance": ("reference", "mutual_inductance"),
    "ref_flux": ("reference", "flux"),
    "ref_mass": ("reference", "mass"),
    "ref_ground_state_width": ("reference", "ground_state_width"),
    "ref_sphere_volume": ("reference", "sphere_volume"),
    "ref_magnetization": ("reference", "magnetization"),
    "ref_experiment_time": ("reference", "experiment_time"),
}

_STRING_FIELDS = {"omega_mode"}
# Fields allowed to be zero; every other numeric field must be strictly positive
_NON_NEGATIVE = {"init_error", "rotation_error", "measurement_error", "gravity", "qubit_splitting_hz",
                 "sphere_mu0_magnetization", "qubit_min_current"}
_PROBABILITIES = {"init_error", "rotation_error", "measurement_error"}


def parse_config_text(text: str) -> Tuple[Dict[str, str], List[str]]:
    """
    Parses ``key = value`` lines. ``#`` starts a comment anywhere on a line.

    Returns:
        Tuple of (raw values by key, unknown keys in file order).

    Raises:
        ConfigError: For a non-empty line without ``=``.
    """
    raw: Dict[str, str] = {}
    unknown: List[str] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigError(f"line {line_no}: expected 'key = value', got '{content}'")
        key, value = (part.strip() for part in content.split("=", 1))
        if key in FIELD_SPECS:
            raw[key] = value
        else:
            unknown.append(key)
    return raw, unknown


def _coerce(key: str, raw_value: Any) -> Any:
    if key in _STRING_FIELDS:
        value = str(raw_value).strip()
        if value not in OMEGA_MODES:
            raise ConfigError(f"invalid value for {key}: {value} (expected one of {OMEGA_MODES})", field=key)
        return value
    try:
        value = float(raw_value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid number for {key}: {raw_value}", field=key) from exc
    if math.isnan(value) or math.isinf(value):
        raise ConfigError(f"non-finite value for {key}: {raw_value}", field=key)
    if value < 0 or (value == 0 and key not in _NON_NEGATIVE):
        raise ConfigError(f"value for {key} must be positive, got {raw_value}", field=key)
    if key in _PROBABILITIES and value > 1:
        raise ConfigError(f"probability {key} must lie in [0, 1], got {raw_value}", field=key)
    return value


def _build_config(values: Dict[str, Any]) -> SystemConfig:
    sections: Dict[str, Dict[str, Any]] = {
        name: {} for name in ("sphere", "ring", "qubit", "geometry", "environment", "reference", "system")}
    for key, (section, attribute) in FIELD_SPECS.items():
        if key not in values:
            raise ConfigError(f"missing field: {key}", field=key)
        sections[section][attribute] = _coerce(key, values[key])

    cfg = SystemConfig(
        sphere=MagnetSphere(**sections["sphere"]),
        ring=ResonatorRing(**sections["ring"]),
        qubit=QubitParams(**sections["qubit"]),
        geometry=Geometry(**sections["geometry"]),
        environment=Environment(**sections["environment"]),
        reference=ReferenceValues(**sections["reference"]),
        **sections["system"],
    )
    _check_invariants(cfg)
    return cfg


def _check_invariants(cfg: SystemConfig) -> None:
    if cfg.ring.wire_radius >= cfg.ring.radius:
        raise ConfigError("wire_radius must be smaller than ring_radius", field="wire_radius")
    if cfg.qubit.t2 > 2.0 * cfg.qubit.t1:
        raise ConfigError("qubit_t2 cannot exceed 2 * qubit_t1", field="qubit_t2")
    if cfg.sphere.mu0_magnetization > LEAD_CRITICAL_FIELD:
        # the reference device sits just above the cap; reported, not fatal
        logger.warning("mu0*M = %.4g T exceeds the lead critical field %.2g T",
                       cfg.sphere.mu0_magnetization, LEAD_CRITICAL_FIELD)


def read_config(path: str) -> Tuple[SystemConfig, List[str]]:
    """
    Loads a system configuration file and returns the unknown keys it contained.

    Derived quantities (sphere volume, ring mass, z_eq, L_r) are computed from
    geometry, never read.

    Args:
        path (str): Path to a ``key = value`` configuration file.

    Returns:
        Tuple[SystemConfig, List[str]]: The configuration and the ignored keys.

    Raises:
        ConfigError: For missing, non-numeric, NaN or negative fields.
        FileNotFoundError: If the file does not exist.
    """
    if not os.path.isfile(path):
        raise FileNotFoundError(f"Config file does not exist: {path}")
    with open(path, "r", encoding="utf-8") as file:
        raw, unknown = parse_config_text(file.read())
    for key in unknown:
        logger.warning("unknown config key ignored: %s", key)
    return _build_config(raw), unknown


def load_config(path: str) -> SystemConfig:
    """Loads a system configuration file (see ``read_config``)."""
    return read_config(path)[0]


def config_to_dict(cfg: SystemConfig) -> Dict[str, Any]:
    """Flattens a SystemConfig back to file keys and file units."""
    values: Dict[str, Any] = {}
    for key, (section, attribute) in FIELD_SPECS.items():
        owner = cfg if section == "system" else getattr(cfg, section)
        values[key] = getattr(owner, attribute)
    return values


def save_config(cfg: SystemConfig, path: str, header: Optional[str] = None) -> None:
    """
    Writes a configuration file that ``load_config`` reads back to an equal SystemConfig.
    Floats are written with ``repr`` so the round trip is exact.
    """
    lines = [f"# {line}" for line in (header or "").splitlines()]
    for key, value in config_to_dict(cfg).items():
        lines.append(f"{key} = {value if isinstance(value, str) else repr(float(value))}")
    try:
        with open(path, "w", encoding="utf-8") as file:
            file.write("\n".join(lines) + "\n")
    except IOError as exc:
        raise IOError(f"Error saving config file {path}: {exc}") from exc
