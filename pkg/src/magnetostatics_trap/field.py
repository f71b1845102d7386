"""
Closed-form magnetostatics of a uniformly magnetized sphere and the flux it
threads through the resonator ring.

Coordinates have their origin at the sphere centre with the magnetization along
+z. The ring hangs at height z (its sign is irrelevant, the flux is even in z).
Outside the sphere the field is exactly that of a point dipole of moment M V.
"""
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from core_model.system_config import SystemConfig
from exceptions import DomainError

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class FieldPoint:
    """A point in Cartesian coordinates (m)."""
    x: float
    y: float
    z: float

    @classmethod
    def from_cylindrical(cls, rho: float, phi: float, z: float) -> "FieldPoint":
        return cls(rho * np.cos(phi), rho * np.sin(phi), z)

    @property
    def rho(self) -> float:
        return float(np.hypot(self.x, self.y))

    @property
    def radius(self) -> float:
        return float(np.sqrt(self.x ** 2 + self.y ** 2 + self.z ** 2))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)


def _prefactor(cfg: SystemConfig) -> float:
    return cfg.sphere.moment_factor / (4.0 * np.pi)


def sphere_field(point: FieldPoint, cfg: SystemConfig) -> Tuple[np.ndarray, np.ndarray]:
    """
    Vector potential and magnetic field of the magnetized sphere.

    A = mu0 M V (-y, x, 0) / 4 pi r^3, which is mu0 M V rho / 4 pi r^3 along phi-hat;
    B = mu0 M V (3xz, 3yz, 2z^2 - x^2 - y^2) / 4 pi r^5.

    Args:
        point (FieldPoint): Evaluation point, outside the sphere.
        cfg (SystemConfig): System configuration.

    Returns:
        Tuple[np.ndarray, np.ndarray]: Cartesian A (T m) and B (T).

    Raises:
        DomainError: If the point lies inside the sphere (or at its centre).
    """
    r = point.radius
    if r < cfg.sphere.radius:
        raise DomainError(f"field point at r={r:.3e} m lies inside the sphere (R_s={cfg.sphere.radius:.3e} m)")
    k = _prefactor(cfg)
    x, y, z = point.x, point.y, point.z
    vector_potential = k * np.array([-y, x, 0.0]) / r ** 3
    field = k * np.array([3.0 * x * z, 3.0 * y * z, 2.0 * z ** 2 - x ** 2 - y ** 2]) / r ** 5
    return vector_potential, field


def ring_flux(z: ArrayLike, cfg: SystemConfig, ring_radius: float = None) -> ArrayLike:
    """
    Flux through a horizontal coaxial ring at height z.

    Phi = mu0 M V R^2 / 2 (R^2 + z^2)^(3/2), the circulation of A around the ring.

    Args:
        z: Height of the ring plane relative to the sphere centre (m), |z| > 0.
        cfg (SystemConfig): System configuration.
        ring_radius (float, optional): Defaults to the resonator ring radius.

    Returns:
        Flux in weber.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z == 0):
        raise DomainError("ring flux requires |z| > 0")
    radius = cfg.ring.radius if ring_radius is None else ring_radius
    flux = cfg.sphere.moment_factor * radius ** 2 / (2.0 * (radius ** 2 + z ** 2) ** 1.5)
    return flux if flux.ndim else float(flux)


def ring_flux_gradient(z: ArrayLike, cfg: SystemConfig) -> ArrayLike:
    """dPhi/dz = -3 mu0 M V R^2 z / 2 (R^2 + z^2)^(5/2)."""
    z = np.asarray(z, dtype=float)
    radius = cfg.ring.radius
    grad = -3.0 * cfg.sphere.moment_factor * radius ** 2 * z / (2.0 * (radius ** 2 + z ** 2) ** 2.5)
    return grad if grad.ndim else float(grad)


def current_gradient(z_eq: float, cfg: SystemConfig) -> Tuple[float, float]:
    """
    Rate at which the ring supercurrent changes with vertical position.

    dI_r/dz = -(1/L_r) dPhi/dz = 3 mu0 M V R_r^2 z_eq / 2 L_r (R_r^2 + z_eq^2)^(5/2),
    with L_r the resonator inductance in force (pinned or formula).

    Args:
        z_eq (float): Equilibrium height (m).
        cfg (SystemConfig): System configuration.

    Returns:
        Tuple[float, float]: (dI_r/dz in A/m, I_rmax = dI_r/dz * 2 l_max in A).
    """
    inductance = cfg.resonator_inductance
    if inductance <= 0:
        raise DomainError("resonator inductance must be positive")
    gradient = -ring_flux_gradient(z_eq, cfg) / inductance
    return gradient, gradient * 2.0 * cfg.geometry.max_displacement


def square_loop_flux(dx: ArrayLike, z: float, half_width: float, cfg: SystemConfig) -> ArrayLike:
    """
    Flux through a horizontal square loop of half-width w centred at (dx, 0, z).

    Exact circulation of the dipole vector potential around the four sides.
    At dx = 0 it reduces to 2 mu0 M V w^2 / pi (w^2 + z^2) sqrt(2 w^2 + z^2).
    """
    dx = np.asarray(dx, dtype=float)
    w = half_width
    xp, xm = dx + w, dx - w
    sp = np.sqrt(xp ** 2 + w ** 2 + z ** 2)
    sm = np.sqrt(xm ** 2 + w ** 2 + z ** 2)
    sides_x = 2.0 * w * xp / ((xp ** 2 + z ** 2) * sp) - 2.0 * w * xm / ((xm ** 2 + z ** 2) * sm)
    sides_y = 2.0 * w / (w ** 2 + z ** 2) * (xp / sp - xm / sm)
    flux = _prefactor(cfg) * (sides_x + sides_y)
    return flux if flux.ndim else float(flux)


def square_flux_curvature(z: float, half_width: float, cfg: SystemConfig) -> float:
    """
    Coefficient c2 of dx^2 in the sideways expansion of the square-loop flux:

    c2 = mu0 M V w^2 (5w^6 - 11w^4z^2 - 18w^2z^4 - 6z^6) / pi (w^2+z^2)^3 (2w^2+z^2)^(5/2)
    """
    w2, z2 = half_width ** 2, z ** 2
    poly = 5 * w2 ** 3 - 11 * w2 ** 2 * z2 - 18 * w2 * z2 ** 2 - 6 * z2 ** 3
    return cfg.sphere.moment_factor * w2 * poly / (np.pi * (w2 + z2) ** 3 * (2 * w2 + z2) ** 2.5)


def square_flux_height_gradient(z: float, half_width: float, cfg: SystemConfig) -> float:
    """d/dz of the centred square-loop flux."""
    w2 = half_width ** 2
    a, b = w2 + z ** 2, 2 * w2 + z ** 2
    return -2.0 * cfg.sphere.moment_factor * w2 / np.pi * (
        2.0 * z / (a ** 2 * np.sqrt(b)) + z / (a * b ** 1.5))
