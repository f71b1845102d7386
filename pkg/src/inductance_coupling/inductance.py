"""
Self- and mutual inductance of thin superconducting loops.

The mutual inductance of two coaxial circular filaments is written with the
complete elliptic integrals in the *parameter* convention used by
``scipy.special.ellipk``:

    M = mu0 * sqrt(4 R1 R2 / eta) * (K(eta) / (1 + beta) - E(eta))
    beta = 2 R1 R2 / (R1^2 + R2^2 + d^2),   eta = 2 beta / (1 + beta)

Only the K term is divided by (1 + beta). ``eta`` equals the usual k^2, so this
is the classical Maxwell formula mu0 sqrt(R1 R2) [(2/k - k) K - (2/k) E].
"""
from typing import Union

import numpy as np
from scipy.constants import mu_0
from scipy.special import ellipe, ellipk

from exceptions import DomainError

ArrayLike = Union[float, np.ndarray]

# constant of a square loop of round wire
SQUARE_LOOP_CONSTANT = 0.774


def self_inductance(radius: float, wire_radius: float, shape: str = "circular") -> float:
    """
    Self-inductance of a single-turn loop of round wire.

    Args:
        radius (float): Loop radius R for ``circular``; half-width w for ``square`` (m).
        wire_radius (float): Wire radius a (m).
        shape (str): ``circular`` uses mu0 R (ln(8R/a) - 2), current on the wire
            surface. ``square`` uses 2 mu0 w (ln(w/a) - 0.774) / pi.

    Returns:
        float: Inductance in henry.

    Raises:
        DomainError: If a >= R, either length is non-positive, or shape is unknown.
    """
    if radius <= 0 or wire_radius <= 0:
        raise DomainError(f"loop and wire radii must be positive, got R={radius}, a={wire_radius}")
    if wire_radius >= radius:
        raise DomainError(f"wire radius {wire_radius} must be smaller than loop size {radius}")
    if shape == "circular":
        return mu_0 * radius * (np.log(8.0 * radius / wire_radius) - 2.0)
    if shape == "square":
        return 2.0 * mu_0 * radius * (np.log(radius / wire_radius) - SQUARE_LOOP_CONSTANT) / np.pi
    raise DomainError(f"unknown loop shape: {shape}")


def mutual_inductance(r1: ArrayLike, r2: ArrayLike, separation: ArrayLike) -> ArrayLike:
    """
    Mutual inductance of two coaxial circular filaments.

    Wire radius is ignored (filament approximation); the error is of order a/d.

    Args:
        r1: Radius of the first loop (m).
        r2: Radius of the second loop (m).
        separation: Axial separation d >= 0 (m).

    Returns:
        Mutual inductance in henry, broadcast over the inputs.

    Raises:
        DomainError: For non-positive radii, negative separation, or coincident
            filaments (d = 0 and R1 = R2) where the integral diverges.
    """
    r1, r2, d = np.broadcast_arrays(
        np.asarray(r1, dtype=float), np.asarray(r2, dtype=float), np.asarray(separation, dtype=float))
    if np.any(r1 <= 0) or np.any(r2 <= 0):
        raise DomainError("loop radii must be positive")
    if np.any(d < 0):
        raise DomainError("separation must be non-negative")
    if np.any((d == 0) & (r1 == r2)):
        raise DomainError("coincident filaments: mutual inductance is singular")

    beta = 2.0 * r1 * r2 / (r1 ** 2 + r2 ** 2 + d ** 2)
    eta = 2.0 * beta / (1.0 + beta)
    value = mu_0 * np.sqrt(4.0 * r1 * r2 / eta) * (ellipk(eta) / (1.0 + beta) - ellipe(eta))
    return value if value.ndim else float(value)
