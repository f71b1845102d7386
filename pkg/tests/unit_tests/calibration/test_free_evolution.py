import math

import numpy as np
import pytest

from calibration.free_evolution import (
    CalibrationParams,
    free_evolution,
    mean_field_evolution,
    rotation_angle,
)
from exceptions import DomainError

INITIAL_BLOCH = (1.0 / math.sqrt(2.0), 0.0, 1.0 / math.sqrt(2.0))


@pytest.mark.parametrize("initial_bloch", [INITIAL_BLOCH, (0.6, 0.0, -0.8), (0.0, 1.0, 0.0)])
def test_closed_form_matches_mean_field_integration(calibration_params, initial_bloch):
    """The closed-form rotation solves the mean-field equations of motion."""
    times = np.linspace(0.0, 20.0, 201)
    closed = free_evolution(times, initial_bloch, calibration_params)
    integrated = mean_field_evolution(times, initial_bloch, calibration_params)

    assert np.allclose(closed.bloch, integrated.bloch, atol=1e-7)
    assert np.allclose(closed.quadrature, integrated.quadrature, atol=1e-9)


def test_bloch_norm_is_conserved(calibration_params):
    """Free evolution only rotates the transverse components."""
    evolution = free_evolution(np.linspace(0.0, 100.0, 501), INITIAL_BLOCH, calibration_params)

    assert np.allclose(np.linalg.norm(evolution.bloch, axis=1), 1.0, atol=1e-12)
    assert np.all(evolution.bloch[:, 2] == INITIAL_BLOCH[2])


def test_quadrature_returns_after_each_period(calibration_params):
    """a + a* = (lambda sigma_z / omega)(cos(omega t) - 1) vanishes at every period."""
    periods = 2.0 * math.pi / calibration_params.trap_frequency * np.arange(1, 5)
    evolution = free_evolution(periods, INITIAL_BLOCH, calibration_params)

    assert np.allclose(evolution.quadrature, 0.0, atol=1e-12)


def test_rotation_angle_offset_per_period(calibration_params):
    """Over one period the angle advances by (2 omega_q + sigma_z kappa) tau."""
    tau = 2.0 * math.pi / calibration_params.trap_frequency
    p = calibration_params
    angle = rotation_angle(tau, 1.0, p.qubit_splitting, p.trap_frequency, p.kappa)

    assert angle == pytest.approx((2.0 * p.qubit_splitting + p.kappa) * tau, rel=1e-12)


def test_no_coupling_is_bare_precession():
    """At lambda = 0 the qubit precesses at 2 omega_q."""
    params = CalibrationParams(qubit_splitting=3.0, trap_frequency=1.0, coupling=0.0)
    evolution = free_evolution(0.5, (1.0, 0.0, 0.0), params)

    assert evolution.sigma_x[0] == pytest.approx(math.cos(3.0))
    assert evolution.quadrature[0] == 0.0


def test_kappa_and_array(calibration_params):
    """kappa = lambda^2 / omega and the parameters export in order."""
    assert calibration_params.kappa == pytest.approx(0.09)
    assert np.allclose(calibration_params.as_array(), [50.0, 1.0, 0.3])


def test_non_positive_trap_frequency_raises():
    """omega must be positive."""
    with pytest.raises(DomainError):
        CalibrationParams(qubit_splitting=1.0, trap_frequency=0.0, coupling=0.1)
