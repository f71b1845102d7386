"""
Quantities that follow from a SystemConfig: trap frequency, ground-state width,
slosh period, displacement ladder and the doubling count of the protocol.
"""
import math
from dataclasses import dataclass
from typing import Dict

import numpy as np

from core_model.system_config import TWO_PI, SystemConfig
from exceptions import DomainError
from magnetostatics_trap.field import current_gradient
from magnetostatics_trap.trap import trap_frequency


@dataclass(frozen=True)
class DerivedQuantities:
    """
    Attributes:
        omega: Trap angular frequency (rad/s).
        mass: Ring mass (kg).
        z0: Ground-state width sqrt(hbar / 2 m omega) (m).
        tau: Slosh period 2 pi / omega (s).
        l_max: Largest cat-state half separation (m).
        l0_bound: hbar omega / 2 m g, the largest l0 keeping phi0 below 2 pi (m).
        doublings_exact: log2(l_max / l0_bound) before rounding up.
        doublings: K, the number of coupling doublings.
        l0: l_max / 2^K (m).
        lambda_max: Coupling producing l_max (rad/s).
        lambda0: lambda_max / 2^K (rad/s).
        lambda0_bound: sqrt(omega^5 hbar / 2 m g^2) (rad/s).
        alpha: 2 m g l_max / hbar omega.
        tau_exp: One prepare / evolve / echo / evolve / measure run (s).
        max_resonator_current: I_rmax (A).
        accrued_phase: Gravitational phase 2 m g l_max tau / hbar of one slosh at l_max (rad).
    """
    omega: float
    mass: float
    z0: float
    tau: float
    l_max: float
    l0_bound: float
    doublings_exact: float
    doublings: int
    l0: float
    lambda_max: float
    lambda0: float
    lambda0_bound: float
    alpha: float
    tau_exp: float
    max_resonator_current: float
    accrued_phase: float

    def displacement(self, coupling):
        """l = lambda z0 / omega."""
        return np.asarray(coupling) * self.z0 / self.omega

    def coupling_for(self, displacement):
        """Inverse of ``displacement``."""
        return np.asarray(displacement) * self.omega / self.z0

    def as_dict(self) -> Dict[str, float]:
        return dict(self.__dict__)


def select_omega(cfg: SystemConfig) -> float:
    """The trap frequency in force: the pinned reference or the geometric value."""
    omega = cfg.reference.trap_frequency if cfg.is_pinned else trap_frequency(cfg)
    if not omega > 0:
        raise DomainError(f"trap frequency must be positive, got {omega}")
    return omega


def experiment_time(cfg: SystemConfig, tau: float) -> float:
    """tau_exp = tau_reset + 3 tau_rot + 2 tau + tau_meas."""
    q = cfg.qubit
    return q.reset_time + 3.0 * q.rotation_time + 2.0 * tau + q.measurement_time


def derive(cfg: SystemConfig) -> DerivedQuantities:
    """
    Computes every dependent quantity of the system.

    In ``pinned`` mode omega, I_rmax and lambda_max are the reference values; in
    ``derived`` mode they come from geometry, with lambda_max = l_max omega / z0.
    The doubling count is K = ceil(log2(l_max / l0_bound)), so
    2^K >= l_max / l0_bound > 2^(K-1), and l0, lambda0 are exact binary fractions
    of l_max and lambda_max.

    lambda0 = lambda_max / 2^K (0.63 Hz for the reference device) is the coupling the
    ladder starts from; sqrt(omega^5 hbar / 2 m g^2) (about 1.07 Hz) is only reported,
    as ``lambda0_bound``.

    Args:
        cfg (SystemConfig): System configuration.

    Returns:
        DerivedQuantities: The derived quantities.

    Raises:
        DomainError: If omega is not positive.
    """
    hbar = cfg.constants.hbar
    g = cfg.gravity
    mass = cfg.ring.mass
    omega = select_omega(cfg)
    z0 = math.sqrt(hbar / (2.0 * mass * omega))
    tau = TWO_PI / omega
    l_max = cfg.geometry.max_displacement

    if g > 0:
        l0_bound = hbar * omega / (2.0 * mass * g)
        doublings_exact = math.log2(l_max / l0_bound)
        doublings = max(0, math.ceil(doublings_exact))
        lambda0_bound = math.sqrt(omega ** 5 * hbar / (2.0 * mass * g ** 2))
    else:
        # no gravitational phase to resolve
        l0_bound, doublings_exact, doublings, lambda0_bound = math.inf, -math.inf, 0, math.inf

    if cfg.is_pinned:
        lambda_max = cfg.reference.max_coupling
        max_current = cfg.reference.max_resonator_current
    else:
        lambda_max = l_max * omega / z0
        max_current = current_gradient(cfg.equilibrium_height, cfg)[1]

    return DerivedQuantities(
        omega=omega,
        mass=mass,
        z0=z0,
        tau=tau,
        l_max=l_max,
        l0_bound=l0_bound,
        doublings_exact=doublings_exact,
        doublings=doublings,
        l0=math.ldexp(l_max, -doublings),
        lambda_max=lambda_max,
        lambda0=math.ldexp(lambda_max, -doublings),
        lambda0_bound=lambda0_bound,
        alpha=2.0 * mass * g * l_max / (hbar * omega),
        tau_exp=experiment_time(cfg, tau),
        max_resonator_current=max_current,
        accrued_phase=2.0 * mass * g * l_max * tau / hbar,
    )
