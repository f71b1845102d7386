"""
Fluctuation spectrum of a driven, damped qubit and the sideband cooling rate it
produces on the resonator.

The qubit Bloch vector s = (<sigma_x>, <sigma_y>, <sigma_z>) obeys ds/dt = A s + b
with

    A = [[-g2, delta, 0], [-delta, -g2, -Omega], [0, Omega, -g1]],  b = (0, 0, -Gamma_perp),

g1 = Gamma_perp (2 N_q + 1) = 1 / T1 and g2 = g1 / 2 + Gamma_par = 1 / T2. Correlation
functions follow from the same matrix by the quantum regression theorem.
"""
import math
from dataclasses import dataclass, replace
import numpy as np
from scipy import constants as sc

from core_model.derived import select_omega
from core_model.system_config import TWO_PI, SystemConfig
from exceptions import DomainError


@dataclass(frozen=True)
class CoolingParams:
    """
    Attributes:
        rabi_frequency: Drive Omega (rad/s).
        detuning: delta (rad/s).
        coupling: lambda (rad/s).
        gamma_perp: Qubit relaxation rate Gamma_perp (1/s).
        gamma_par: Qubit pure dephasing rate Gamma_par (1/s).
        resonator_damping: Gamma (1/s).
        qubit_occupation: N_q.
        trap_frequency: omega (rad/s).
    """
    rabi_frequency: float
    detuning: float
    coupling: float
    gamma_perp: float
    gamma_par: float
    resonator_damping: float
    qubit_occupation: float
    trap_frequency: float

    def __post_init__(self):
        if self.rabi_frequency < 0 or self.coupling < 0:
            raise DomainError("Rabi frequency and coupling must be non-negative")
        if self.qubit_occupation < 0 or self.resonator_damping < 0:
            raise DomainError("occupations and damping must be non-negative")

    @property
    def longitudinal_rate(self) -> float:
        return self.gamma_perp * (2.0 * self.qubit_occupation + 1.0)

    @property
    def transverse_rate(self) -> float:
        return 0.5 * self.longitudinal_rate + self.gamma_par

    def with_coupling(self, coupling: float) -> "CoolingParams":
        return replace(self, coupling=coupling)

    def with_detuning(self, detuning: float) -> "CoolingParams":
        return replace(self, detuning=detuning)

    @classmethod
    def from_config(
        cls,
        cfg: SystemConfig,
        coupling_hz: float = 1.0e4,
        resonator_damping: float = 0.0,
        rabi_fraction: float = 0.5,
    ) -> "CoolingParams":
        """
        Operating point Omega = omega / 2, delta = -sqrt(omega^2 - Omega^2) for the
        config's qubit and trap.
        """
        omega = select_omega(cfg)
        rabi = rabi_fraction * omega
        if rabi > omega:
            raise DomainError("Rabi frequency must not exceed the trap frequency")
        q = cfg.qubit
        occupation = thermal_occupation(q.splitting, q.temperature)
        return cls(
            rabi_frequency=rabi,
            detuning=-math.sqrt(omega ** 2 - rabi ** 2),
            coupling=TWO_PI * coupling_hz,
            gamma_perp=1.0 / (q.t1 * (2.0 * occupation + 1.0)),
            gamma_par=1.0 / q.t2 - 0.5 / q.t1,
            resonator_damping=resonator_damping,
            qubit_occupation=occupation,
            trap_frequency=omega,
        )


def thermal_occupation(frequency: float, temperature: float) -> float:
    """Bose occupation 1 / (exp(hbar omega / k_B T) - 1)."""
    if frequency <= 0 or temperature <= 0:
        return 0.0
    return 1.0 / math.expm1(sc.hbar * frequency / (sc.k * temperature))


def bloch_matrix(p: CoolingParams) -> np.ndarray:
    g1, g2 = p.longitudinal_rate, p.transverse_rate
    return np.array([
        [-g2, p.detuning, 0.0],
        [-p.detuning, -g2, -p.rabi_frequency],
        [0.0, p.rabi_frequency, -g1],
    ])


def bloch_offset(p: CoolingParams) -> np.ndarray:
    return np.array([0.0, 0.0, -p.gamma_perp])


def steady_state(p: CoolingParams) -> np.ndarray:
    """Steady Bloch vector s0 = -A^-1 b."""
    if p.gamma_perp <= 0:
        raise DomainError("qubit relaxation rate must be positive for a steady state")
    return -np.linalg.solve(bloch_matrix(p), bloch_offset(p))


def correlation_seed(s0: np.ndarray) -> np.ndarray:
    """
    <sigma(0) sigma_z(0)> - <sigma> <sigma_z>, the initial condition of the regression
    equations for the sigma_z correlation function.
    """
    x0, y0, z0 = s0
    return np.array([-z0 * x0 - 1j * y0, -z0 * y0 + 1j * x0, 1.0 - z0 ** 2])


def qubit_spectrum(nu, p: CoolingParams):
    """
    S(nu) = (lambda^2 / 2) Re int_0^inf e^(i nu t) [<sigma_z(t) sigma_z(0)> - <sigma_z>^2] dt.

    The integral is the resolvent -(A + i nu)^-1 applied to the regression seed.

    Args:
        nu: Frequency or array of frequencies (rad/s).
        p (CoolingParams): Operating point.

    Returns:
        S(nu) in 1/s, with the shape of ``nu``.

    Raises:
        DomainError: If the Bloch matrix has no dissipation.
    """
    matrix = bloch_matrix(p)
    if np.max(np.linalg.eigvals(matrix).real) >= 0:
        raise DomainError("Bloch matrix is not decaying; the spectrum does not exist")
    seed = correlation_seed(steady_state(p))
    nus = np.atleast_1d(np.asarray(nu, dtype=float))
    values = np.empty(nus.shape)
    identity = np.eye(3)
    for index, frequency in enumerate(nus):
        response = -np.linalg.solve(matrix + 1j * frequency * identity, seed)
        values[index] = 0.5 * p.coupling ** 2 * response[2].real
    return values if np.ndim(nu) else float(values[0])


def cooling_rate(p: CoolingParams) -> float:
    """Gamma_c = S(omega) - S(-omega)."""
    return qubit_spectrum(p.trap_frequency, p) - qubit_spectrum(-p.trap_frequency, p)


def backaction_occupation(p: CoolingParams) -> float:
    """N0 = S(-omega) / Gamma_c, the occupation reached from a zero-temperature bath."""
    rate = cooling_rate(p)
    if rate <= 0:
        raise DomainError(f"operating point heats the resonator (Gamma_c = {rate:.4g} 1/s)")
    return qubit_spectrum(-p.trap_frequency, p) / rate
