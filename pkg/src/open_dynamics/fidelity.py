"""
Per-round fidelity of the prepare / rotate / slosh / echo / slosh / rotate / measure
sequence, and the single-stage Ramsey sensitivity.
"""
import math
from typing import Dict, Optional

import numpy as np
from scipy.linalg import expm

from core_model.derived import DerivedQuantities, derive
from core_model.system_config import SystemConfig
from exceptions import DomainError
from open_dynamics.analytic import dephasing_exponent

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)


def fidelity_factors(
    cfg: SystemConfig,
    l: float,
    damping_rate: float = 0.0,
    derived: Optional[DerivedQuantities] = None,
) -> Dict[str, float]:
    """
    The individual factors of the per-round fidelity.

    The qubit dephasing window is two sloshes, exp(-4 pi / omega T2), unless the
    gate time tau_rot + tau_meas exceeds ``gate_time_threshold`` * tau, in which
    case the whole run exp(-tau_exp / T2) is used.
    """
    derived = derived or derive(cfg)
    q = cfg.qubit
    gate_time = q.rotation_time + q.measurement_time
    if gate_time > cfg.gate_time_threshold * derived.tau:
        qubit_dephasing = math.exp(-derived.tau_exp / q.t2)
    else:
        qubit_dephasing = math.exp(-4.0 * math.pi / (derived.omega * q.t2))
    return {
        "qubit_dephasing": qubit_dephasing,
        "resonator_damping": math.exp(-dephasing_exponent(l, damping_rate, derived.z0, derived.omega)),
        "preparation": 1.0 - 2.0 * q.init_error,
        "rotations": (1.0 - q.rotation_error) ** 3,
        "measurement": 1.0 - 2.0 * q.measurement_error,
    }


def round_fidelity(
    cfg: SystemConfig,
    l: float,
    damping_rate: float = 0.0,
    derived: Optional[DerivedQuantities] = None,
) -> float:
    """
    Cumulative per-round fidelity
    f = e^(-4 pi / omega T2) e^(-4 pi Gamma l^2 / z0^2 omega) (1 - 2 p_init)(1 - p_rot)^3 (1 - 2 p_meas).

    Args:
        cfg (SystemConfig): System configuration.
        l (float): Branch half separation (m).
        damping_rate (float): Total resonator damping Gamma, as the cyclic channel rate.
        derived (DerivedQuantities, optional): Precomputed derived quantities.

    Returns:
        float: The fidelity f, read out as <sigma_x> = f cos(phi).
    """
    return float(np.prod(list(fidelity_factors(cfg, l, damping_rate, derived).values())))


def _rotation(angle: float, axis: np.ndarray) -> np.ndarray:
    return expm(-0.5j * angle * axis)


def _noisy_gate(rho: np.ndarray, unitary: np.ndarray, error: float) -> np.ndarray:
    """Unitary followed by depolarisation with probability ``error``."""
    rotated = unitary @ rho @ unitary.conj().T
    return (1.0 - error) * rotated + error * 0.5 * IDENTITY


def _slosh(rho: np.ndarray, phase: float, decay: float) -> np.ndarray:
    out = rho.copy()
    out[0, 1] = rho[0, 1] * decay * np.exp(1j * phase)
    out[1, 0] = np.conj(out[0, 1])
    return out


def composed_round(
    phi: float,
    cfg: SystemConfig,
    l: float,
    damping_rate: float = 0.0,
    derived: Optional[DerivedQuantities] = None,
) -> float:
    """
    Applies the error maps of one round to a 2x2 density matrix and returns the
    read-out value of <sigma_x> after the sequence.

    Preparation flips the qubit with p_init; each of the three rotations
    depolarises with p_rot; each slosh multiplies the coherence by the square root
    of the dephasing and damping factors and adds half the phase; the echo flip
    swaps the branches so the second half accrues the phase with the opposite
    sign in the lab frame; readout is a bit flip with p_meas.
    """
    derived = derived or derive(cfg)
    q = cfg.qubit
    factors = fidelity_factors(cfg, l, damping_rate, derived)
    half_decay = math.sqrt(factors["qubit_dephasing"] * factors["resonator_damping"])

    rho = np.diag([1.0 - q.init_error, q.init_error]).astype(complex)
    rho = _noisy_gate(rho, _rotation(math.pi / 2, SIGMA_Y), q.rotation_error)
    rho = _slosh(rho, 0.5 * phi, half_decay)
    rho = _noisy_gate(rho, SIGMA_X, q.rotation_error)
    rho = _slosh(rho, -0.5 * phi, half_decay)
    rho = _noisy_gate(rho, _rotation(-math.pi / 2, SIGMA_Y), q.rotation_error)
    z_expectation = float(np.trace(SIGMA_Z @ rho).real)
    return (1.0 - 2.0 * q.measurement_error) * z_expectation


def ramsey_sensitivity(
    n: int,
    cfg: SystemConfig,
    l: float,
    coherence_time: Optional[float] = None,
    derived: Optional[DerivedQuantities] = None,
) -> Dict[str, float]:
    """
    Sensitivity of n repeated sloshes read out once.

    delta_phi = 1 / 2n and delta_g = hbar omega delta_phi / 4 pi m l. The qubit
    coherence time tau_c (default T2) bounds delta_g / g from below by
    hbar omega / (2 tau_c m g lambda z0) = hbar / (2 tau_c l m g).

    Args:
        n (int): Number of sloshes, at least one.
        cfg (SystemConfig): System configuration.
        l (float): Branch half separation (m).
        coherence_time (float, optional): tau_c, defaults to the config T2.
        derived (DerivedQuantities, optional): Precomputed derived quantities.

    Returns:
        dict: delta_phi, delta_g, delta_g_over_g, the two forms of the coherence bound.
    """
    if n < 1:
        raise DomainError(f"at least one slosh is needed, got n={n}")
    derived = derived or derive(cfg)
    hbar = cfg.constants.hbar
    tau_c = cfg.qubit.t2 if coherence_time is None else coherence_time
    delta_phi = 1.0 / (2.0 * n)
    delta_g = hbar * derived.omega * delta_phi / (4.0 * math.pi * derived.mass * l)
    coupling = float(derived.coupling_for(l))
    return {
        "delta_phi": delta_phi,
        "delta_g": delta_g,
        "delta_g_over_g": delta_g / cfg.gravity,
        "coherence_bound": hbar / (2.0 * tau_c * l * derived.mass * cfg.gravity),
        "coherence_bound_from_coupling": hbar * derived.omega / (
            2.0 * tau_c * derived.mass * cfg.gravity * coupling * derived.z0),
    }
