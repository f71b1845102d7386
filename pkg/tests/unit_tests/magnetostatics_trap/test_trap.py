import logging
import math

import numpy as np
import pytest

from exceptions import DomainError
from magnetostatics_trap.trap import (
    MODE_SEPARATION_GUARD,
    force_table,
    horizontal_period,
    torsional_frequencies,
    trap_frequency,
    trap_profile,
    trap_stiffness,
    transverse_coefficients,
    vertical_force,
)


def test_force_is_linear_near_equilibrium(reference_config):
    """Close to z_eq the flux-conservation force equals -k (z - z_eq)."""
    z_eq = reference_config.equilibrium_height
    table = force_table(reference_config, z_eq - 1.0e-9, z_eq + 1.0e-9, points=11)

    assert list(table.columns) == ["z", "force", "linear_force"]
    assert np.allclose(table["force"], table["linear_force"], rtol=1e-3, atol=1e-18)


def test_force_restores_towards_equilibrium(reference_config):
    """The force points back to z_eq on both sides."""
    z_eq = reference_config.equilibrium_height
    gap = reference_config.geometry.sphere_ring_gap

    assert vertical_force(z_eq + 0.3 * gap, reference_config) < 0
    assert vertical_force(z_eq - 0.3 * gap, reference_config) > 0
    assert vertical_force(z_eq, reference_config) == 0.0


def test_geometric_trap_frequency(derived_config):
    """With the circular-loop inductance the trap runs at about 27 kHz."""
    omega = trap_frequency(derived_config)

    assert omega / (2.0 * math.pi) == pytest.approx(27.1e3, rel=0.01)
    assert trap_stiffness(derived_config) == pytest.approx(derived_config.ring.mass * omega ** 2)


def test_torsional_modes_sit_far_above_trap(reference_config):
    """Torsional modes scale as sqrt(1 + n^2) and are well separated from omega."""
    modes = torsional_frequencies(reference_config, modes=3)

    assert modes[1] / modes[0] == pytest.approx(math.sqrt(5.0 / 2.0))
    assert modes[0] / trap_frequency(reference_config) > MODE_SEPARATION_GUARD


def test_reference_torsional_mode(reference_config):
    """sqrt(E / 2 rho R_r^2) sqrt(2) in rad/s: 2.38e8 for the 5 um lead ring, about 1525 omega."""
    lowest = torsional_frequencies(reference_config, modes=1)[0]
    ring = reference_config.ring

    assert lowest == pytest.approx(math.sqrt(ring.youngs_modulus / (ring.density * ring.radius ** 2)), rel=1e-12)
    assert lowest == pytest.approx(2.376e8, rel=1e-3)
    assert lowest / reference_config.reference.trap_frequency == pytest.approx(1525.0, rel=2e-3)


def test_horizontal_period_shrinks_with_amplitude(reference_config):
    """A quartic oscillator is faster at larger amplitude, T proportional to 1/A."""
    short = horizontal_period(reference_config, 2.0e-6)
    long = horizontal_period(reference_config, 1.0e-6)

    assert short == pytest.approx(long / 2.0)


def test_horizontal_period_needs_positive_amplitude(reference_config):
    """Zero amplitude has no period."""
    with pytest.raises(DomainError):
        horizontal_period(reference_config, 0.0)


def test_transverse_coefficients(reference_config):
    """The quartic coefficient is positive and follows from the flux curvature."""
    coefficients = transverse_coefficients(reference_config)

    assert coefficients["beta"] > 0
    assert coefficients["beta"] == pytest.approx(
        2.0 * coefficients["flux_curvature"] ** 2 / reference_config.resonator_inductance)
    assert coefficients["square_loop_inductance"] > 0


def test_reference_transverse_figures(reference_config):
    """SI coefficients gamma = 3.87e3 J/m^3 and beta = 1.73e8 J/m^4 make a 10 um swing last about 60 us."""
    coefficients = transverse_coefficients(reference_config)

    assert coefficients["gamma"] == pytest.approx(3867.1, rel=2e-3)
    assert coefficients["beta"] == pytest.approx(1.7286e8, rel=2e-3)
    assert horizontal_period(reference_config, 10.0e-6) == pytest.approx(5.97e-5, rel=2e-3)


def test_fast_transverse_swing_warns(reference_config, caplog):
    """A 10 um swing is not slow next to the trap period; a 1 nm one is."""
    with caplog.at_level(logging.WARNING):
        trap_profile(reference_config, horizontal_amplitude=1.0e-9)
    assert "transverse period" not in caplog.text

    with caplog.at_level(logging.WARNING):
        profile = trap_profile(reference_config, horizontal_amplitude=10.0e-6)
    assert "transverse period" in caplog.text
    assert profile.horizontal_period == pytest.approx(horizontal_period(reference_config, 10.0e-6))


def test_trap_profile_as_dict(reference_config):
    """The profile serialises every quantity including the mode separation."""
    profile = trap_profile(reference_config)
    values = profile.as_dict()

    assert values["trap_frequency_hz"] == pytest.approx(profile.trap_frequency / (2.0 * math.pi))
    assert values["mode_separation"] == pytest.approx(profile.mode_separation)
    assert values["half_m_omega_sq"] == pytest.approx(0.5 * reference_config.ring.mass * profile.trap_frequency ** 2)
    assert profile.max_resonator_current > 0
