"""
Brute-force master-equation integration of the qubit and a truncated oscillator.

Used in scaled units (omega ~ 1) to check the closed-form coherence results.
Hilbert space ordering is qubit (x) Fock(n_cut); the qubit basis state 0 is the
sigma_z = +1 eigenstate.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
import qutip

from exceptions import ConvergenceError, DomainError
from utils import get_logger

logger = get_logger(__name__)

DEFAULT_FOCK_CUTOFF = 64
MAX_FOCK_CUTOFF = 512
LEAKAGE_TOLERANCE = 1e-8
TRACE_TOLERANCE = 1e-9
SOLVER_OPTIONS = {"atol": 1e-12, "rtol": 1e-11, "nsteps": 100000}


@dataclass(frozen=True)
class ScaledParams:
    """Rates and frequencies in units where the oscillator frequency is of order one."""
    omega: float
    coupling: float
    damping: float = 0.0
    qubit_decay: float = 0.0
    dephasing: float = 0.0
    qubit_occupation: float = 0.0
    qubit_splitting: float = 0.0


@dataclass(frozen=True)
class QubitOscillatorState:
    density: np.ndarray
    n_cut: int

    @property
    def trace(self) -> float:
        return float(np.trace(self.density).real)

    @property
    def qubit_density(self) -> np.ndarray:
        return np.trace(self.density.reshape(2, self.n_cut, 2, self.n_cut), axis1=1, axis2=3)

    @property
    def oscillator_density(self) -> np.ndarray:
        return np.trace(self.density.reshape(2, self.n_cut, 2, self.n_cut), axis1=0, axis2=2)

    @property
    def off_diagonal(self) -> complex:
        return complex(self.qubit_density[0, 1])

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.density + self.density.conj().T)).min())

    @property
    def hermiticity_error(self) -> float:
        return float(np.abs(self.density - self.density.conj().T).max())

    def ground_state_fidelity(self) -> float:
        """<0|rho_osc|0>, the oscillator ground-state population."""
        return float(self.oscillator_density[0, 0].real)

    def top_level_population(self, levels: int = 3) -> float:
        return float(np.diag(self.oscillator_density).real[-levels:].sum())


def _operators(params: ScaledParams, n_cut: int):
    a = qutip.tensor(qutip.qeye(2), qutip.destroy(n_cut))
    sz = qutip.tensor(qutip.sigmaz(), qutip.qeye(n_cut))
    sm = qutip.tensor(qutip.sigmam(), qutip.qeye(n_cut))  # sigma_z = +1 -> -1
    hamiltonian = (params.omega * a.dag() * a + 0.5 * params.qubit_splitting * sz
                   + 0.5 * params.coupling * sz * (a + a.dag()))
    c_ops = []
    if params.damping > 0:
        c_ops.append(np.sqrt(params.damping) * a)
    if params.dephasing > 0:
        c_ops.append(np.sqrt(0.5 * params.dephasing) * sz)
    if params.qubit_decay > 0:
        c_ops.append(np.sqrt(params.qubit_decay * (params.qubit_occupation + 1.0)) * sm)
        if params.qubit_occupation > 0:
            c_ops.append(np.sqrt(params.qubit_decay * params.qubit_occupation) * sm.dag())
    return hamiltonian, c_ops


def _initial_state(n_cut: int) -> qutip.Qobj:
    plus = (qutip.basis(2, 0) + qutip.basis(2, 1)).unit()
    return qutip.tensor(plus * plus.dag(), qutip.fock_dm(n_cut, 0))


def _evolve(params: ScaledParams, n_cut: int, t: float):
    hamiltonian, c_ops = _operators(params, n_cut)
    times = np.linspace(0.0, t, 65)
    result = qutip.mesolve(hamiltonian, _initial_state(n_cut), times, c_ops, options=SOLVER_OPTIONS)
    for step, state in zip(times, result.states):
        drift = abs(state.tr() - 1.0)
        if drift > TRACE_TOLERANCE:
            raise ConvergenceError(
                f"trace drifted by {drift:.2e} at t={step:.4g}",
                diagnostics={"time": step, "trace": state.tr(), "n_cut": n_cut},
            )
    leakage = max(QubitOscillatorState(state.full(), n_cut).top_level_population() for state in result.states)
    return QubitOscillatorState(density=result.states[-1].full(), n_cut=n_cut), leakage


def lindblad_oracle(
    params: ScaledParams,
    t: float,
    n_cut: int = DEFAULT_FOCK_CUTOFF,
    max_cut: Optional[int] = MAX_FOCK_CUTOFF,
) -> QubitOscillatorState:
    """
    Integrates the joint master equation from |+> |0> up to time t.

    H = omega a^dag a + omega_q sigma_z / 2 + (lambda / 2) sigma_z (a + a^dag),
    with Gamma D[a], Gamma_par / 2 D[sigma_z] and thermal qubit relaxation.
    When the top three Fock levels hold more than 1e-8 of the population the
    cutoff is doubled, up to ``max_cut``.

    Args:
        params (ScaledParams): Frequencies and rates.
        t (float): Final time.
        n_cut (int): Initial Fock cutoff.
        max_cut (int, optional): Largest cutoff tried; ``None`` disables doubling.

    Returns:
        QubitOscillatorState: Joint density matrix at time t.

    Raises:
        DomainError: If lambda / omega exceeds n_cut / 10.
        ConvergenceError: On truncation leakage at the largest cutoff or trace drift.
    """
    if params.omega <= 0:
        raise DomainError("oscillator frequency must be positive")
    if abs(params.coupling) / params.omega > n_cut / 10.0:
        raise DomainError(
            f"coherent amplitude lambda/omega = {params.coupling / params.omega:.3g} "
            f"needs n_cut >= {int(np.ceil(10 * params.coupling / params.omega))}")
    while True:
        state, leakage = _evolve(params, n_cut, t)
        if leakage <= LEAKAGE_TOLERANCE:
            return state
        if max_cut is None or 2 * n_cut > max_cut:
            raise ConvergenceError(
                f"Fock truncation leakage {leakage:.2e} at n_cut={n_cut}; use a larger n_cut",
                diagnostics={"n_cut": n_cut, "leakage": leakage},
            )
        logger.warning("Fock leakage %.2e at n_cut=%d, doubling the cutoff", leakage, n_cut)
        n_cut *= 2
