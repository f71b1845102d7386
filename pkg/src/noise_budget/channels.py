"""
Damping channels of the levitated ring: eddy currents in the sphere, magnetic
dipole radiation and background-gas collisions.

Rates are cyclic (Hz), Gamma_i = (omega / 2 pi) / Q_i. The decoherence exponent of a
channel over one slosh at l_max is 4 pi l_max^2 Gamma_i / z0^2 omega.
"""
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Optional

import pandas as pd

from core_model.derived import DerivedQuantities, derive
from core_model.system_config import SystemConfig
from exceptions import DomainError
from open_dynamics.analytic import dephasing_exponent
from open_dynamics.fidelity import round_fidelity
from utils import save_dataframe_as_csv, save_json

CHANNELS = ("dipole", "eddy", "gas")
# kinetic diameter of N2, for the mean free path
GAS_MOLECULE_DIAMETER = 3.7e-10
MIN_KNUDSEN = 10.0


@dataclass(frozen=True)
class ChannelBudget:
    name: str
    power: float
    quality_factor: float
    rate_hz: float
    exponent: float


@dataclass(frozen=True)
class NoiseBudget:
    channels: Dict[str, ChannelBudget]
    knudsen: float
    total_rate_hz: float
    fidelity: float
    l_max: float = 0.0

    @property
    def exponents(self) -> Dict[str, float]:
        return {name: channel.exponent for name, channel in self.channels.items()}

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame(
            [[c.name, c.power, c.quality_factor, c.rate_hz, c.exponent] for c in self.channels.values()],
            columns=["channel", "power_w", "quality_factor", "rate_hz", "exponent"],
        )

    def as_dict(self) -> Dict:
        return {
            "channels": self.to_dataframe().to_dict(orient="records"),
            "knudsen": self.knudsen,
            "total_rate_hz": self.total_rate_hz,
            "fidelity": self.fidelity,
            "l_max": self.l_max,
        }

    def save(self, csv_path: str, json_path: str, header_lines: Optional[Dict[str, str]] = None) -> None:
        save_dataframe_as_csv(self.to_dataframe(), csv_path, header_lines=header_lines)
        save_json(json_path, self.as_dict())


def _displaced_state_q(cfg: SystemConfig, derived: DerivedQuantities, power: float) -> float:
    """Q = hbar lambda_max^2 / 4 P, the energy of the displaced state over the loss per radian."""
    if power == 0:
        return math.inf
    return cfg.constants.hbar * derived.lambda_max ** 2 / (4.0 * power)


def _channel(name: str, power: float, quality: float, derived: DerivedQuantities) -> ChannelBudget:
    rate = derived.omega / (2.0 * math.pi) / quality
    return ChannelBudget(
        name=name,
        power=power,
        quality_factor=quality,
        rate_hz=rate,
        exponent=dephasing_exponent(derived.l_max, rate, derived.z0, derived.omega),
    )


def eddy_budget(cfg: SystemConfig, current: Optional[float] = None,
                derived: Optional[DerivedQuantities] = None) -> ChannelBudget:
    """
    Upper bound on eddy-current loss in the sphere driven by the oscillating ring current:

    P = (mu0 / 4 pi)^2 (2 pi^3 R_r^4 I_r^2 omega^2 / rho) 4 R_s^5 / 15 r0^3 (r0 + 2 R_s)^3

    Args:
        cfg (SystemConfig): System configuration.
        current (float, optional): Ring current amplitude, defaults to I_rmax.
        derived (DerivedQuantities, optional): Precomputed derived quantities.

    Returns:
        ChannelBudget: Power, Q = hbar lambda_max^2 / 4 P, rate and exponent.
    """
    derived = derived or derive(cfg)
    current = derived.max_resonator_current if current is None else current
    r_s, r_r, r0 = cfg.sphere.radius, cfg.ring.radius, cfg.geometry.sphere_ring_gap
    prefactor = (cfg.constants.mu0 / (4.0 * math.pi)) ** 2
    drive = 2.0 * math.pi ** 3 * r_r ** 4 * current ** 2 * derived.omega ** 2 / cfg.sphere.resistivity
    geometry = 4.0 * r_s ** 5 / (15.0 * r0 ** 3 * (r0 + 2.0 * r_s) ** 3)
    power = prefactor * drive * geometry
    return _channel("eddy", power, _displaced_state_q(cfg, derived, power), derived)


def radiation_resistance(cfg: SystemConfig, omega: float) -> float:
    """R_rad = (pi / 6) (R_r omega / c)^4 Z0."""
    c = cfg.constants
    return math.pi / 6.0 * (cfg.ring.radius * omega / c.c) ** 4 * c.vacuum_impedance


def dipole_budget(cfg: SystemConfig, current: Optional[float] = None, omega: Optional[float] = None,
                  derived: Optional[DerivedQuantities] = None) -> ChannelBudget:
    """Magnetic dipole radiation of the oscillating ring current, P = R_rad I^2 / 2."""
    derived = derived or derive(cfg)
    current = derived.max_resonator_current if current is None else current
    omega = derived.omega if omega is None else omega
    power = 0.5 * radiation_resistance(cfg, omega) * current ** 2
    return _channel("dipole", power, _displaced_state_q(cfg, derived, power), derived)


def knudsen_number(cfg: SystemConfig) -> float:
    """Gas mean free path k_B T / (sqrt(2) pi d^2 P) over the wire diameter."""
    env = cfg.environment
    mean_free_path = cfg.constants.k_b * env.gas_temperature / (
        math.sqrt(2.0) * math.pi * GAS_MOLECULE_DIAMETER ** 2 * env.gas_pressure)
    return mean_free_path / (2.0 * cfg.ring.wire_radius)


def gas_budget(cfg: SystemConfig, derived: Optional[DerivedQuantities] = None) -> ChannelBudget:
    """
    Free-molecular gas damping Gamma = 2 rho_gas A u_av / m, with A = 2 pi R_r 2a,
    u_av = sqrt(2 k_B T / m_g) and rho_gas = P m_g / k_B T. The denominator is the
    ring mass. Q = (omega / 2 pi) / Gamma.

    Raises:
        DomainError: If the Knudsen number is 10 or less.
    """
    derived = derived or derive(cfg)
    knudsen = knudsen_number(cfg)
    if knudsen <= MIN_KNUDSEN:
        raise DomainError(f"Knudsen number {knudsen:.3g} <= {MIN_KNUDSEN}: gas is not free-molecular")
    env = cfg.environment
    k_b = cfg.constants.k_b
    gas_density = env.gas_pressure * env.gas_molecule_mass / (k_b * env.gas_temperature)
    mean_speed = math.sqrt(2.0 * k_b * env.gas_temperature / env.gas_molecule_mass)
    area = 2.0 * math.pi * cfg.ring.radius * 2.0 * cfg.ring.wire_radius
    rate = 2.0 * gas_density * area * mean_speed / derived.mass
    quality = derived.omega / (2.0 * math.pi) / rate
    # loss of the displaced state in the same Q convention as the other channels
    power = cfg.constants.hbar * derived.lambda_max ** 2 / (4.0 * quality)
    return _channel("gas", power, quality, derived)


def full_budget(cfg: SystemConfig, channels: Iterable[str] = CHANNELS,
                derived: Optional[DerivedQuantities] = None) -> NoiseBudget:
    """
    Aggregates the enabled channels and the per-round fidelity at l_max.

    Args:
        cfg (SystemConfig): System configuration.
        channels (Iterable[str]): Subset of ``dipole``, ``eddy``, ``gas``; others are off.
        derived (DerivedQuantities, optional): Precomputed derived quantities.

    Returns:
        NoiseBudget: Channels, Knudsen number, total rate and fidelity.
    """
    derived = derived or derive(cfg)
    builders = {"dipole": dipole_budget, "eddy": eddy_budget, "gas": gas_budget}
    enabled = list(channels)
    unknown = [name for name in enabled if name not in builders]
    if unknown:
        raise DomainError(f"unknown noise channels: {unknown}")
    budgets = {name: builders[name](cfg, derived=derived) for name in CHANNELS if name in enabled}
    total = math.fsum(channel.rate_hz for channel in budgets.values())
    return NoiseBudget(
        channels=budgets,
        knudsen=knudsen_number(cfg),
        total_rate_hz=total,
        fidelity=round_fidelity(cfg, derived.l_max, total, derived),
        l_max=derived.l_max,
    )
