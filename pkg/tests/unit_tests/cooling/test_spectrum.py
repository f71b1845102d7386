import math

import numpy as np
import pytest
from scipy import constants as sc
from scipy.integrate import solve_ivp

from cooling.spectrum import (
    CoolingParams,
    backaction_occupation,
    bloch_matrix,
    bloch_offset,
    correlation_seed,
    cooling_rate,
    qubit_spectrum,
    steady_state,
    thermal_occupation,
)
from exceptions import DomainError


@pytest.fixture
def scaled_params():
    """Operating point in units of the trap frequency"""
    return CoolingParams(
        rabi_frequency=0.5,
        detuning=-math.sqrt(0.75),
        coupling=0.1,
        gamma_perp=0.1,
        gamma_par=0.05,
        resonator_damping=0.0,
        qubit_occupation=0.0,
        trap_frequency=1.0,
    )


def _spectrum_by_integration(nu, p, horizon=500.0):
    """Integrates the regression equations and their Fourier transform together."""
    matrix = bloch_matrix(p)
    seed = correlation_seed(steady_state(p))

    def rhs(t, y):
        correlation = y[:3]
        return np.concatenate([matrix @ correlation, [np.exp(1j * nu * t) * correlation[2]]])

    y0 = np.concatenate([seed, [0.0]]).astype(complex)
    solution = solve_ivp(rhs, (0.0, horizon), y0, method="DOP853", rtol=1e-11, atol=1e-13)
    return 0.5 * p.coupling ** 2 * solution.y[3, -1].real


def test_steady_state_solves_bloch_equations(scaled_params):
    """A s0 + b = 0 and the Bloch vector stays inside the sphere."""
    s0 = steady_state(scaled_params)

    assert np.allclose(bloch_matrix(scaled_params) @ s0 + bloch_offset(scaled_params), 0.0, atol=1e-14)
    assert np.linalg.norm(s0) <= 1.0


@pytest.mark.parametrize("nu", [-1.0, -0.3, 0.0, 0.7, 1.0])
def test_spectrum_matches_time_domain_integration(scaled_params, nu):
    """The resolvent form equals the transform of the integrated correlation function."""
    assert qubit_spectrum(nu, scaled_params) == pytest.approx(
        _spectrum_by_integration(nu, scaled_params), rel=1e-6, abs=1e-9)


def test_spectrum_accepts_arrays(scaled_params):
    """Array input returns an array of the same shape."""
    nus = np.linspace(-2.0, 2.0, 9)
    values = qubit_spectrum(nus, scaled_params)

    assert values.shape == nus.shape
    assert values[3] == pytest.approx(qubit_spectrum(nus[3], scaled_params))


def test_red_detuning_cools(scaled_params):
    """With delta < 0 the spectrum favours absorption at +omega."""
    assert cooling_rate(scaled_params) > 0
    assert 0.0 < backaction_occupation(scaled_params) < 1.0


def test_detuning_sign_mirrors_the_spectrum(scaled_params):
    """Flipping delta exchanges S(omega) and S(-omega), so the resonator is heated."""
    mirrored = scaled_params.with_detuning(-scaled_params.detuning)

    assert qubit_spectrum(0.8, mirrored) == pytest.approx(qubit_spectrum(-0.8, scaled_params), rel=1e-10)
    assert cooling_rate(mirrored) == pytest.approx(-cooling_rate(scaled_params), rel=1e-10)
    with pytest.raises(DomainError):
        backaction_occupation(mirrored)


def test_cooling_rate_scales_with_coupling_squared(scaled_params):
    """Doubling lambda multiplies Gamma_c by four."""
    doubled = scaled_params.with_coupling(2.0 * scaled_params.coupling)

    assert cooling_rate(doubled) / cooling_rate(scaled_params) == pytest.approx(4.0, rel=0.01)
    assert backaction_occupation(doubled) == pytest.approx(backaction_occupation(scaled_params), rel=1e-10)


def test_reference_cooling_rate(reference_config):
    """At the reference operating point Gamma_c is about 27 kHz."""
    params = CoolingParams.from_config(reference_config, coupling_hz=1.0e4)

    assert params.rabi_frequency == pytest.approx(0.5 * params.trap_frequency)
    assert params.detuning == pytest.approx(-math.sqrt(0.75) * params.trap_frequency)
    assert cooling_rate(params) == pytest.approx(27.0e3, rel=0.3)
    assert backaction_occupation(params) == pytest.approx(0.157, rel=0.05)


def test_rates_follow_qubit_times(reference_config):
    """g1 = 1 / T1 and g2 = 1 / T2 whatever the qubit occupation."""
    params = CoolingParams.from_config(reference_config)

    assert params.longitudinal_rate == pytest.approx(1.0 / reference_config.qubit.t1)
    assert params.transverse_rate == pytest.approx(1.0 / reference_config.qubit.t2)


def test_rabi_above_trap_frequency_raises(reference_config):
    """The operating point needs Omega <= omega."""
    with pytest.raises(DomainError):
        CoolingParams.from_config(reference_config, rabi_fraction=1.5)


def test_negative_coupling_raises(scaled_params):
    """Couplings and occupations cannot be negative."""
    with pytest.raises(DomainError):
        scaled_params.with_coupling(-0.1)


def test_thermal_occupation():
    """Bose occupation of the qubit at 6 GHz and 100 mK, and zero at zero temperature."""
    frequency = 2.0 * math.pi * 6.0e9
    expected = 1.0 / math.expm1(sc.hbar * frequency / (sc.k * 0.1))

    assert thermal_occupation(frequency, 0.1) == pytest.approx(expected)
    assert thermal_occupation(frequency, 0.1) == pytest.approx(0.0596, rel=0.01)
    assert thermal_occupation(frequency, 0.0) == 0.0
