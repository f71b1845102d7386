"""
Closed-form evolution of the qubit coherence over one slosh.

``analytic_round`` is the weak-damping map used by the protocol: the oscillator
returns to its ground state after tau = 2 pi / omega and the qubit keeps a phase
and a decay factor. ``coupled_branch_coherence`` is the exact off-diagonal
element of the joint master equation with two damped coherent branches, valid
at any time and damping.
"""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from core_model.derived import DerivedQuantities, derive
from core_model.system_config import SystemConfig
from exceptions import DomainError
from utils import get_logger

logger = get_logger(__name__)

# Gamma * tau above which the map is flagged as approximate
DAMPING_WARNING_LEVEL = 0.1


@dataclass(frozen=True)
class RoundOutcome:
    phase: float
    decay_factor: float
    qubit_density: np.ndarray

    @property
    def sigma_x(self) -> float:
        return float(2.0 * self.qubit_density[0, 1].real)

    @property
    def off_diagonal(self) -> complex:
        return complex(self.qubit_density[0, 1])


def qubit_density_from_coherence(coherence: complex) -> np.ndarray:
    """Qubit state with equal populations and the given off-diagonal element."""
    return np.array([[0.5, coherence], [np.conj(coherence), 0.5]], dtype=complex)


def analytic_round(
    l: float,
    cfg: SystemConfig,
    damping_rate: float = 0.0,
    t2: Optional[float] = None,
    derived: Optional[DerivedQuantities] = None,
) -> RoundOutcome:
    """
    One slosh at separation l starting from the qubit in |+>.

    phase = tau (2 m g l / hbar - omega_q) and the coherence decays by
    exp(-gamma tau) exp(-tau / T2) with gamma = 2 Gamma l^2 / z0^2.

    Args:
        l (float): Half separation of the two branches (m).
        cfg (SystemConfig): System configuration.
        damping_rate (float): Resonator damping Gamma (1/s).
        t2 (float, optional): Qubit coherence time; defaults to the config T2.
        derived (DerivedQuantities, optional): Precomputed derived quantities.

    Returns:
        RoundOutcome: Phase, decay factor and qubit density matrix.

    Raises:
        DomainError: If Gamma tau >= 1, where the map no longer applies.
    """
    derived = derived or derive(cfg)
    tau = derived.tau
    damping_tau = damping_rate * tau
    if damping_tau >= 1.0:
        raise DomainError(f"Gamma * tau = {damping_tau:.3g} >= 1: the single-slosh map is invalid")
    if damping_tau >= DAMPING_WARNING_LEVEL:
        logger.warning("Gamma * tau = %.3g: single-slosh map is only approximate", damping_tau)

    t2 = cfg.qubit.t2 if t2 is None else t2
    hbar = cfg.constants.hbar
    phase = tau * (2.0 * derived.mass * cfg.gravity * l / hbar - cfg.qubit.splitting)
    gamma = 2.0 * damping_rate * l ** 2 / derived.z0 ** 2
    decay = math.exp(-gamma * tau) * math.exp(-tau / t2)
    coherence = 0.5 * decay * np.exp(-1j * phase)
    return RoundOutcome(phase=phase, decay_factor=decay, qubit_density=qubit_density_from_coherence(coherence))


def dephasing_exponent(l: float, damping_rate: float, z0: float, omega: float) -> float:
    """gamma tau = 4 pi Gamma l^2 / z0^2 omega."""
    return 4.0 * math.pi * damping_rate * l ** 2 / (z0 ** 2 * omega)


def weak_damping_coherence(t: float, omega: float, coupling: float, damping: float, dephasing: float) -> float:
    """
    |rho_+-| / |rho_+-(0)| from the weak-damping map in scaled units:
    exp[-2 lambda^2 / omega^2 (1 - e^(-Gamma t))] e^(-Gamma_par t).
    It bounds the exact decay from below.
    """
    return math.exp(-2.0 * coupling ** 2 / omega ** 2 * -math.expm1(-damping * t)) * math.exp(-dephasing * t)


def branch_amplitude(t, omega: float, coupling: float, damping: float):
    """
    Coherent amplitude of the sigma_z = +1 branch,
    alpha(t) = -(i g / z)(1 - e^(-z t)), z = Gamma/2 + i omega, g = lambda / 2.
    The other branch is -alpha(t).
    """
    z = 0.5 * damping + 1j * omega
    g = 0.5 * coupling
    return -(1j * g / z) * -np.expm1(-z * np.asarray(t, dtype=float))


def coupled_branch_coherence(
    t: float,
    omega: float,
    coupling: float,
    damping: float,
    dephasing: float = 0.0,
    qubit_splitting: float = 0.0,
) -> complex:
    """
    Exact qubit off-diagonal element for H = omega a^dag a + omega_q sigma_z / 2
    + (lambda / 2) sigma_z (a + a^dag) with resonator damping Gamma D[a] and qubit
    dephasing at rate Gamma_par, starting from |+> |0>.

    rho_+-(t) = 1/2 exp( int_0^t (2 g Im alpha - Gamma |alpha|^2) ds - |alpha(t)|^2
                         - Gamma_par t - i omega_q t ),
    where both integrals are evaluated in closed form.

    Args:
        t (float): Evolution time.
        omega (float): Oscillator frequency.
        coupling (float): Coupling lambda.
        damping (float): Resonator energy damping Gamma.
        dephasing (float): Qubit off-diagonal decay rate Gamma_par.
        qubit_splitting (float): omega_q.

    Returns:
        complex: rho_+- of the reduced qubit state.
    """
    z = 0.5 * damping + 1j * omega
    g = 0.5 * coupling
    growth = -np.expm1(-z * t) / z  # int_0^t e^(-z s) ds
    amplitude_integral = -(1j * g / z) * (t - growth)
    damped = -math.expm1(-damping * t) / damping if damping > 0 else t
    norm_integral = (g ** 2 / abs(z) ** 2) * (t - 2.0 * growth.real + damped)
    alpha_t = branch_amplitude(t, omega, coupling, damping)
    exponent = (2.0 * g * amplitude_integral.imag - damping * norm_integral
                - abs(alpha_t) ** 2 - dephasing * t)
    return 0.5 * complex(np.exp(exponent - 1j * qubit_splitting * t))
