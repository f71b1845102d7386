import math

import numpy as np
import pytest
from scipy.integrate import quad

from exceptions import DomainError
from magnetostatics_trap.field import (
    FieldPoint,
    current_gradient,
    ring_flux,
    ring_flux_gradient,
    sphere_field,
    square_flux_curvature,
    square_flux_height_gradient,
    square_loop_flux,
)

OUTSIDE_POINTS = [(3.0e-6, 1.0e-6, 12.0e-6), (-8.0e-6, 4.0e-6, -9.0e-6), (15.0e-6, 0.0, 2.0e-6)]


def _field(cfg, x, y, z):
    return sphere_field(FieldPoint(x, y, z), cfg)[1]


def _potential(cfg, x, y, z):
    return sphere_field(FieldPoint(x, y, z), cfg)[0]


@pytest.mark.parametrize("point", OUTSIDE_POINTS)
def test_field_is_divergence_and_curl_free_outside(reference_config, point):
    """Outside the sphere div B = 0 and curl B = 0 to finite-difference accuracy."""
    h = 1.0e-10
    jac = np.zeros((3, 3))
    for axis in range(3):
        step = np.zeros(3)
        step[axis] = h
        plus = _field(reference_config, *(np.array(point) + step))
        minus = _field(reference_config, *(np.array(point) - step))
        jac[:, axis] = (plus - minus) / (2.0 * h)
    scale = np.abs(jac).max()

    assert abs(np.trace(jac)) / scale < 1e-6
    assert np.allclose(jac, jac.T, atol=1e-6 * scale)


@pytest.mark.parametrize("point", OUTSIDE_POINTS)
def test_field_is_curl_of_vector_potential(reference_config, point):
    """B = curl A for the closed-form pair."""
    h = 1.0e-10
    jac = np.zeros((3, 3))
    for axis in range(3):
        step = np.zeros(3)
        step[axis] = h
        plus = _potential(reference_config, *(np.array(point) + step))
        minus = _potential(reference_config, *(np.array(point) - step))
        jac[:, axis] = (plus - minus) / (2.0 * h)
    curl = np.array([jac[2, 1] - jac[1, 2], jac[0, 2] - jac[2, 0], jac[1, 0] - jac[0, 1]])
    field = _field(reference_config, *point)

    assert np.allclose(curl, field, rtol=1e-6, atol=1e-6 * np.abs(field).max())


def test_point_inside_sphere_raises(reference_config):
    """The exterior solution is not evaluated inside the sphere."""
    with pytest.raises(DomainError):
        sphere_field(FieldPoint(0.0, 0.0, 5.0e-6), reference_config)


def test_ring_flux_matches_surface_integral(reference_config):
    """The closed-form flux equals the quadrature of B_z over the ring disc."""
    z = reference_config.equilibrium_height
    radius = reference_config.ring.radius

    def integrand(rho):
        return _field(reference_config, rho, 0.0, z)[2] * 2.0 * math.pi * rho

    numeric, _ = quad(integrand, 0.0, radius, epsabs=0.0, epsrel=1e-13)

    assert ring_flux(z, reference_config) == pytest.approx(numeric, rel=1e-10)


def test_ring_flux_matches_line_integral(reference_config):
    """The closed-form flux equals the circulation of A around the ring."""
    z = reference_config.equilibrium_height
    radius = reference_config.ring.radius

    def integrand(phi):
        vector_potential = _potential(reference_config, radius * math.cos(phi), radius * math.sin(phi), z)
        tangent = np.array([-math.sin(phi), math.cos(phi), 0.0]) * radius
        return float(vector_potential @ tangent)

    numeric, _ = quad(integrand, 0.0, 2.0 * math.pi, epsabs=0.0, epsrel=1e-13)

    assert ring_flux(z, reference_config) == pytest.approx(numeric, rel=1e-10)


def test_reference_flux(reference_config):
    """Flux at equilibrium lands near the reference entry."""
    flux = ring_flux(reference_config.equilibrium_height, reference_config)

    assert flux == pytest.approx(reference_config.reference.flux, rel=0.15)


def test_flux_gradient_matches_finite_difference(reference_config):
    """dPhi/dz agrees with a central difference of the flux."""
    z = reference_config.equilibrium_height
    h = 1.0e-11
    numeric = (ring_flux(z + h, reference_config) - ring_flux(z - h, reference_config)) / (2.0 * h)

    assert ring_flux_gradient(z, reference_config) == pytest.approx(numeric, rel=1e-6)


def test_flux_requires_nonzero_height(reference_config):
    """The ring plane cannot pass through the sphere centre."""
    with pytest.raises(DomainError):
        ring_flux(0.0, reference_config)


def test_current_gradient_sets_max_current(reference_config):
    """I_rmax = (dI_r/dz) 2 l_max with a positive gradient."""
    gradient, max_current = current_gradient(reference_config.equilibrium_height, reference_config)

    assert gradient > 0
    assert max_current == pytest.approx(gradient * 2.0 * reference_config.geometry.max_displacement)


def test_square_loop_flux_centred_form(reference_config):
    """At dx = 0 the square-loop flux reduces to its centred closed form."""
    z, w = reference_config.equilibrium_height, reference_config.ring.radius
    moment = reference_config.sphere.moment_factor
    expected = 2.0 * moment * w ** 2 / (math.pi * (w ** 2 + z ** 2) * math.sqrt(2.0 * w ** 2 + z ** 2))

    assert square_loop_flux(0.0, z, w, reference_config) == pytest.approx(expected, rel=1e-12)


def test_square_loop_flux_is_even_in_dx(reference_config):
    """Sideways displacement lowers the flux symmetrically."""
    z, w = reference_config.equilibrium_height, reference_config.ring.radius
    flux = square_loop_flux(np.array([-1.0e-6, 0.0, 1.0e-6]), z, w, reference_config)

    assert flux[0] == pytest.approx(flux[2], rel=1e-12)


def test_square_flux_curvature_matches_second_difference(reference_config):
    """The dx^2 coefficient equals half the second derivative of the flux."""
    z, w = reference_config.equilibrium_height, reference_config.ring.radius
    h = 1.0e-8
    values = square_loop_flux(np.array([-h, 0.0, h]), z, w, reference_config)
    numeric = (values[2] - 2.0 * values[1] + values[0]) / (2.0 * h ** 2)

    assert square_flux_curvature(z, w, reference_config) == pytest.approx(numeric, rel=1e-5)


def test_square_flux_height_gradient_matches_finite_difference(reference_config):
    """d/dz of the centred square-loop flux agrees with a central difference."""
    z, w = reference_config.equilibrium_height, reference_config.ring.radius
    h = 1.0e-11
    numeric = (square_loop_flux(0.0, z + h, w, reference_config)
               - square_loop_flux(0.0, z - h, w, reference_config)) / (2.0 * h)

    assert square_flux_height_gradient(z, w, reference_config) == pytest.approx(numeric, rel=1e-6)
