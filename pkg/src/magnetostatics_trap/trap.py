"""
Three-dimensional trapping of the flux-conserving ring below the sphere.

The ring keeps its enclosed flux fixed, so displacing it stores the energy
U = (Phi(r) - Phi_eq)^2 / 2 L. The vertical force, the trap frequency and the
transverse coefficients all follow from that energy.
"""
from dataclasses import dataclass
from typing import Dict

import numpy as np
import pandas as pd
from scipy.special import gamma as gamma_fn

from core_model.system_config import SystemConfig
from exceptions import DomainError
from inductance_coupling.inductance import self_inductance
from magnetostatics_trap.field import (
    current_gradient,
    ring_flux,
    ring_flux_gradient,
    square_flux_curvature,
    square_flux_height_gradient,
)
from utils import get_logger

logger = get_logger(__name__)

# integral of (1 - u^4)^(-1/2) over [0, 1]
QUARTIC_PERIOD_INTEGRAL = gamma_fn(0.25) ** 2 / (4.0 * np.sqrt(2.0 * np.pi))
MODE_SEPARATION_GUARD = 10.0


@dataclass(frozen=True)
class TrapProfile:
    trap_frequency: float
    stiffness: float
    current_gradient: float
    max_resonator_current: float
    half_m_omega_sq: float
    transverse_gamma: float
    transverse_beta: float
    square_loop_inductance: float
    torsional_frequencies: np.ndarray
    horizontal_period: float

    @property
    def mode_separation(self) -> float:
        return float(self.torsional_frequencies[0] / self.trap_frequency)

    def as_dict(self) -> Dict[str, float]:
        return {
            "trap_frequency_rad_s": self.trap_frequency,
            "trap_frequency_hz": self.trap_frequency / (2.0 * np.pi),
            "stiffness_n_per_m": self.stiffness,
            "current_gradient_a_per_m": self.current_gradient,
            "max_resonator_current_a": self.max_resonator_current,
            "half_m_omega_sq": self.half_m_omega_sq,
            "transverse_gamma": self.transverse_gamma,
            "transverse_beta": self.transverse_beta,
            "square_loop_inductance_h": self.square_loop_inductance,
            "torsional_frequencies_rad_s": self.torsional_frequencies,
            "mode_separation": self.mode_separation,
            "horizontal_period_s": self.horizontal_period,
        }


def trap_stiffness(cfg: SystemConfig) -> float:
    """
    k = 9 mu0^2 M^2 V^2 R_r^4 z_eq^2 / 4 L_r (R_r^2 + z_eq^2)^5, so that F_z = -k (z - z_eq).
    """
    return ring_flux_gradient(cfg.equilibrium_height, cfg) ** 2 / cfg.resonator_inductance


def trap_frequency(cfg: SystemConfig) -> float:
    """
    Vertical trap frequency from geometry (rad/s):

    omega = 3 mu0 M V R_r^2 z_eq / 2 sqrt(m L_r (R_r^2 + z_eq^2)^5)
    """
    stiffness = trap_stiffness(cfg)
    if stiffness <= 0:
        raise DomainError("trap stiffness is not positive; the ring is not trapped")
    return float(np.sqrt(stiffness / cfg.ring.mass))


def vertical_force(z, cfg: SystemConfig):
    """
    Vertical force on the ring at height z (N), from flux conservation.

    F_z = -(Phi(z) - Phi(z_eq)) Phi'(z) / L_r. Near z_eq this is -k (z - z_eq).
    """
    flux_change = ring_flux(z, cfg) - ring_flux(cfg.equilibrium_height, cfg)
    return -flux_change * ring_flux_gradient(z, cfg) / cfg.resonator_inductance


def force_table(cfg: SystemConfig, z_min: float, z_max: float, points: int = 101) -> pd.DataFrame:
    """F_z over a height range together with the linear restoring force, as a dataframe."""
    heights = np.linspace(z_min, z_max, points)
    linear = -trap_stiffness(cfg) * (heights - cfg.equilibrium_height)
    return pd.DataFrame({"z": heights, "force": vertical_force(heights, cfg), "linear_force": linear})


def transverse_coefficients(cfg: SystemConfig) -> Dict[str, float]:
    """
    Coefficients of V = m omega^2 z^2 / 2 + gamma (x^2 + y^2) z / 3 + beta (x^4 + y^4) / 4.

    The ring is mapped to a square loop of half-width w = R_r. With c2 the dx^2
    coefficient of the square-loop flux, expanding the flux-conservation energy
    gives gamma = 3 (dPhi/dz) c2 / L and beta = 2 c2^2 / L, where L is the
    resonator inductance that also sets the vertical mode.

    Both are SI coefficients of V: gamma in J/m^3, beta in J/m^4. The reference
    device gives gamma = 3.87e3 and beta = 1.73e8.
    """
    z_eq = cfg.equilibrium_height
    half_width = cfg.ring.radius
    curvature = square_flux_curvature(z_eq, half_width, cfg)
    height_gradient = square_flux_height_gradient(z_eq, half_width, cfg)
    inductance = cfg.resonator_inductance
    return {
        "gamma": 3.0 * height_gradient * curvature / inductance,
        "beta": 2.0 * curvature ** 2 / inductance,
        "flux_curvature": curvature,
        "square_loop_inductance": self_inductance(half_width, cfg.ring.wire_radius, "square"),
    }


def torsional_frequencies(cfg: SystemConfig, modes: int = 5) -> np.ndarray:
    """
    Torsional mode frequencies sqrt(E A / 2 mu R_r^2) sqrt(1 + n^2), n = 1..modes, in rad/s.
    A = pi a^2 is the wire cross-section and mu = rho pi a^2 the mass per length, so
    the result depends on R_r but not on a. No 1 / 2 pi is applied: for the reference
    ring the lowest mode is 2.38e8 rad/s, about 1500 omega.
    """
    area = np.pi * cfg.ring.wire_radius ** 2
    linear_density = cfg.ring.density * area
    n = np.arange(1, modes + 1)
    base = np.sqrt(cfg.ring.youngs_modulus * area / (2.0 * linear_density * cfg.ring.radius ** 2))
    return base * np.sqrt(1.0 + n ** 2)


def horizontal_period(cfg: SystemConfig, amplitude: float, beta: float = None) -> float:
    """
    Period of the pure quartic transverse oscillation U = beta x^4 / 4 at the given amplitude.

    T = 4 sqrt(2 m / beta) / A * integral_0^1 (1 - u^4)^(-1/2) du; larger amplitudes are faster.
    With the reference beta a 10 um swing takes about 60 us, comparable to the vertical
    period, and only amplitudes below about 0.1 um leave the transverse motion frozen.
    """
    if amplitude <= 0:
        raise DomainError("oscillation amplitude must be positive")
    if beta is None:
        beta = transverse_coefficients(cfg)["beta"]
    return float(4.0 * np.sqrt(2.0 * cfg.ring.mass / beta) / amplitude * QUARTIC_PERIOD_INTEGRAL)


def trap_profile(cfg: SystemConfig, horizontal_amplitude: float = 10.0e-6) -> TrapProfile:
    """
    Vertical, transverse and torsional description of the trap.

    The trap frequency is always the geometric value from the inductance in force,
    whatever the omega mode; ``derive`` decides which omega the protocol uses.

    Args:
        cfg (SystemConfig): System configuration.
        horizontal_amplitude (float): Amplitude for the transverse period estimate (m).

    Returns:
        TrapProfile: The assembled profile.
    """
    omega = trap_frequency(cfg)
    gradient, max_current = current_gradient(cfg.equilibrium_height, cfg)
    transverse = transverse_coefficients(cfg)
    torsional = torsional_frequencies(cfg)
    if torsional[0] / omega <= MODE_SEPARATION_GUARD:
        logger.warning("torsional mode at %.3g rad/s is within %.0fx of the trap frequency",
                       torsional[0], MODE_SEPARATION_GUARD)
    period = horizontal_period(cfg, horizontal_amplitude, transverse["beta"])
    if period < MODE_SEPARATION_GUARD * 2.0 * np.pi / omega:
        logger.warning("transverse period %.3g s at %.3g m amplitude is within %.0fx of the trap period",
                       period, horizontal_amplitude, MODE_SEPARATION_GUARD)
    return TrapProfile(
        trap_frequency=omega,
        stiffness=trap_stiffness(cfg),
        current_gradient=gradient,
        max_resonator_current=max_current,
        half_m_omega_sq=0.5 * cfg.ring.mass * omega ** 2,
        transverse_gamma=transverse["gamma"],
        transverse_beta=transverse["beta"],
        square_loop_inductance=transverse["square_loop_inductance"],
        torsional_frequencies=torsional,
        horizontal_period=period,
    )
