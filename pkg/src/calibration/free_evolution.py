"""
Undriven joint evolution of the qubit and the resonator in the mean-field picture.

With the resonator starting in its ground state the equations of motion

    da/dt = -i omega a - (i lambda / 2) sigma_z
    d sigma_x/dt = (2 omega_q - lambda (a + a*)) sigma_y
    d sigma_y/dt = -(2 omega_q - lambda (a + a*)) sigma_x
    d sigma_z/dt = 0

integrate to a rotation of the transverse Bloch components by

    xi(t) = 2 omega_q t + sigma_z(0) lambda^2 t / omega - sigma_z(0) lambda^2 sin(omega t) / omega^2.

The constant gravitational drive only shifts the resonator equilibrium and is left out.
"""
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from exceptions import ConvergenceError, DomainError


@dataclass(frozen=True)
class CalibrationParams:
    """Qubit splitting omega_q, trap frequency omega and coupling lambda (rad/s)."""
    qubit_splitting: float
    trap_frequency: float
    coupling: float

    def __post_init__(self):
        if self.trap_frequency <= 0:
            raise DomainError(f"trap frequency must be positive, got {self.trap_frequency}")

    @property
    def kappa(self) -> float:
        """lambda^2 / omega, the combination that sets the phase offset."""
        return self.coupling ** 2 / self.trap_frequency

    def as_array(self) -> np.ndarray:
        return np.array([self.qubit_splitting, self.trap_frequency, self.coupling])


@dataclass(frozen=True)
class FreeEvolution:
    times: np.ndarray
    bloch: np.ndarray
    quadrature: np.ndarray

    @property
    def sigma_x(self) -> np.ndarray:
        return self.bloch[:, 0]


def rotation_angle(t, sigma_z0, qubit_splitting: float, trap_frequency: float, kappa: float):
    """xi(t) for the given initial sigma_z, with kappa = lambda^2 / omega."""
    t = np.asarray(t, dtype=float)
    return (2.0 * qubit_splitting * t
            + sigma_z0 * kappa * t
            - sigma_z0 * kappa * np.sin(trap_frequency * t) / trap_frequency)


def free_evolution(t, initial_bloch, params: CalibrationParams) -> FreeEvolution:
    """
    Closed-form Bloch vector and resonator quadrature a + a* at the requested times.

    Args:
        t: Time or array of times (s).
        initial_bloch: (sigma_x, sigma_y, sigma_z) at t = 0.
        params (CalibrationParams): omega_q, omega, lambda.

    Returns:
        FreeEvolution: Bloch vectors of shape (n, 3) and a + a* of shape (n,).
    """
    times = np.atleast_1d(np.asarray(t, dtype=float))
    sx0, sy0, sz0 = np.asarray(initial_bloch, dtype=float)
    xi = rotation_angle(times, sz0, params.qubit_splitting, params.trap_frequency, params.kappa)
    cos_xi, sin_xi = np.cos(xi), np.sin(xi)
    bloch = np.column_stack([
        sx0 * cos_xi + sy0 * sin_xi,
        sy0 * cos_xi - sx0 * sin_xi,
        np.full(times.shape, sz0),
    ])
    omega = params.trap_frequency
    quadrature = params.coupling * sz0 / omega * (np.cos(omega * times) - 1.0)
    return FreeEvolution(times=times, bloch=bloch, quadrature=quadrature)


def _mean_field_rhs(_, state, params: CalibrationParams):
    re_a, im_a, sx, sy, sz = state
    omega, coupling = params.trap_frequency, params.coupling
    # a' = -i omega a - i (lambda / 2) sz
    d_re = omega * im_a
    d_im = -omega * re_a - 0.5 * coupling * sz
    precession = 2.0 * params.qubit_splitting - coupling * 2.0 * re_a
    return [d_re, d_im, precession * sy, -precession * sx, 0.0]


def mean_field_evolution(t, initial_bloch, params: CalibrationParams,
                         rtol: float = 1e-12, atol: float = 1e-13) -> FreeEvolution:
    """Numerical integration of the mean-field equations of motion from a = 0."""
    times = np.atleast_1d(np.asarray(t, dtype=float))
    state0 = [0.0, 0.0, *np.asarray(initial_bloch, dtype=float)]
    solution = solve_ivp(_mean_field_rhs, (0.0, float(times.max())), state0, method="DOP853",
                         t_eval=times, rtol=rtol, atol=atol, args=(params,))
    if not solution.success:
        raise ConvergenceError(f"mean-field integration failed: {solution.message}",
                               diagnostics={"status": solution.status})
    re_a, _, sx, sy, sz = solution.y
    return FreeEvolution(times=times, bloch=np.column_stack([sx, sy, sz]), quadrature=2.0 * re_a)
