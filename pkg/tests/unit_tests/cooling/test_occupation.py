import math
from dataclasses import replace

import numpy as np
import pytest

from cooling.occupation import (
    CURVE_COLUMNS,
    amplitude_cutoff,
    amplitude_integral,
    cooling_curve,
    full_occupation,
    harmonic_balance,
    lamb_dicke_occupation,
    rate_table,
    renormalized_rate,
    steady_state_occupation,
    truncation_error,
)
from cooling.spectrum import CoolingParams, backaction_occupation, cooling_rate
from exceptions import DomainError


@pytest.fixture
def scaled_params():
    """Damped operating point in units of the trap frequency"""
    return CoolingParams(
        rabi_frequency=0.5,
        detuning=-math.sqrt(0.75),
        coupling=0.1,
        gamma_perp=0.1,
        gamma_par=0.05,
        resonator_damping=1.0e-4,
        qubit_occupation=0.0,
        trap_frequency=1.0,
    )


def test_small_amplitude_rate_is_the_linear_rate(scaled_params):
    """Gamma_c(alpha) tends to S(omega) - S(-omega) as alpha goes to zero."""
    tiny = 1.0e-6 * scaled_params.trap_frequency / scaled_params.coupling

    assert renormalized_rate(scaled_params, tiny) == pytest.approx(cooling_rate(scaled_params), rel=1e-6)
    assert renormalized_rate(scaled_params, 0.0) == cooling_rate(scaled_params)


def test_harmonic_balance_shape_and_mean(scaled_params):
    """The zeroth component is real and reduces to the steady state without modulation."""
    components = harmonic_balance(scaled_params, 1.0e-8, harmonics=2)

    assert components.shape == (5, 3)
    assert np.allclose(components[2].imag, 0.0, atol=1e-12)


def test_harmonic_balance_needs_a_harmonic(scaled_params):
    """Zero harmonics is not a truncation."""
    with pytest.raises(DomainError):
        harmonic_balance(scaled_params, 1.0, harmonics=0)


def test_truncation_error_small_at_small_amplitude(scaled_params):
    """Second harmonics barely change the rate while lambda alpha << omega."""
    assert truncation_error(scaled_params, 0.01) < 1e-4


def test_rate_falls_at_large_amplitude(scaled_params):
    """A large coherent amplitude detunes the qubit out of the sideband."""
    scale = scaled_params.trap_frequency / scaled_params.coupling
    table = rate_table(scaled_params, [0.01 * scale, 100.0 * scale])

    assert list(table.columns) == ["amplitude", "rate", "relative_rate"]
    # lambda alpha = 0.01 omega already trims the rate by about 0.25 %
    assert table["relative_rate"].iloc[0] == pytest.approx(0.9975, rel=1e-3)
    assert abs(table["relative_rate"].iloc[1]) < 0.01


def test_amplitude_integral_is_positive_and_cached(scaled_params):
    """The integral converges below the search limit and is computed once per operating point."""
    amplitude_integral.cache_clear()
    value, cutoff = amplitude_integral(scaled_params)
    again = amplitude_integral(scaled_params)

    assert value > 0
    assert cutoff == amplitude_cutoff(scaled_params)
    assert again == (value, cutoff)
    assert amplitude_integral.cache_info().hits >= 1


def test_amplitude_integral_needs_coupling(scaled_params):
    """Without coupling there is no cooling to integrate."""
    with pytest.raises(DomainError):
        amplitude_integral(scaled_params.with_coupling(0.0))


def test_lamb_dicke_branch(scaled_params):
    """n_LD = zeta N_th + N0."""
    zeta = scaled_params.resonator_damping / cooling_rate(scaled_params)
    n_th = np.array([0.0, 10.0, 1000.0])

    expected = zeta * n_th + backaction_occupation(scaled_params)
    assert np.allclose(lamb_dicke_occupation(scaled_params, n_th), expected, rtol=1e-12)


def test_full_branch_matches_lamb_dicke_at_low_occupation(scaled_params):
    """The two branches agree within 5 % while zeta e^x stays large, here up to N_th = 10."""
    n_th = np.logspace(0.0, 1.0, 3)
    full = full_occupation(scaled_params, n_th)
    small_amplitude = lamb_dicke_occupation(scaled_params, n_th)

    assert np.allclose(full, small_amplitude, rtol=0.05)


def test_full_branch_leaves_lamb_dicke_once_zeta_e_x_is_small(scaled_params):
    """With zeta of order 1e-2 the amplitude integral no longer holds a bath of 1e3 and n_f heads for N_th."""
    n_th = np.array([1.0e3])

    assert full_occupation(scaled_params, n_th)[0] > 10.0 * lamb_dicke_occupation(scaled_params, n_th)[0]


def test_full_branch_saturates_where_lamb_dicke_grows(scaled_params):
    """At a hot bath the full solution stays bounded by N_th while n_LD keeps climbing."""
    n_th = np.array([1.0e6, 1.0e8])
    full = full_occupation(scaled_params, n_th)

    assert np.all(full <= n_th)
    assert np.all(full >= backaction_occupation(scaled_params))


def test_undamped_resonator_sits_at_backaction(scaled_params):
    """zeta = 0 disconnects the bath and leaves N0."""
    undamped = replace(scaled_params, resonator_damping=0.0)

    assert np.allclose(full_occupation(undamped, [1.0, 1.0e9]), backaction_occupation(undamped))


def test_reference_final_occupation(cooling_params):
    """The reference device cools to about 0.16 phonons from a bath of up to 1e9."""
    curve = cooling_curve(cooling_params, np.logspace(0.0, 9.0, 10))

    assert list(curve.columns) == CURVE_COLUMNS
    assert curve["n_f"].iloc[-1] == pytest.approx(0.16, abs=0.05)
    assert np.all(np.diff(curve["n_f"]) >= -1e-12)


def test_cooling_curve_parallel_matches_serial(cooling_params):
    """Chunking and workers do not change the curve."""
    grid = np.logspace(0.0, 9.0, 6)
    serial = cooling_curve(cooling_params, grid, n_jobs=1, chunks=1)
    parallel = cooling_curve(cooling_params, grid, n_jobs=2, chunks=3)

    assert np.allclose(serial.to_numpy(), parallel.to_numpy(), rtol=1e-12)


def test_steady_state_occupation(cooling_params):
    """The single-point result carries both branches, the spectrum and Gamma_cool."""
    result = steady_state_occupation(cooling_params, 1.0e3, spectrum_points=21)

    assert len(result.spectrum) == 21
    assert result.cooling_total == pytest.approx(result.cooling_rate + cooling_params.resonator_damping)
    assert result.n_f == pytest.approx(result.n_ld, rel=0.05)
    assert result.zeta < 1e-9


def test_negative_bath_occupation_raises(cooling_params):
    """Bath occupations are non-negative."""
    with pytest.raises(DomainError):
        steady_state_occupation(cooling_params, -1.0)
    with pytest.raises(DomainError):
        cooling_curve(cooling_params, [-1.0, 1.0])


def test_heating_point_raises(scaled_params):
    """Blue detuning heats and has no steady occupation."""
    heating = scaled_params.with_detuning(-scaled_params.detuning)

    with pytest.raises(DomainError):
        steady_state_occupation(heating, 1.0)
