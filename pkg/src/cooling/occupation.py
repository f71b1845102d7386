"""
Steady-state phonon occupation of the resonator under qubit-mediated cooling.

Two branches are provided. The Lamb-Dicke occupation n_LD = Gamma N_th / Gamma_c + N0
holds while the resonator amplitude stays small. The full solution follows the
cooling rate as the amplitude grows: a coherent amplitude alpha modulates the qubit
detuning by 2 lambda alpha cos(omega t), the Bloch equations are solved by harmonic
balance and the renormalised rate Gamma_c(alpha) enters the occupation through

    n_f = N_th [zeta + (1 - zeta) / (1 + zeta e^x)] + N0,
    x = 2 int_0^inf u Gamma_c(u) / Gamma_c(0) du / (N_th zeta),   zeta = Gamma / Gamma_c(0).
"""
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.integrate import quad
from scipy.special import expit

from cooling.spectrum import (
    CoolingParams,
    backaction_occupation,
    bloch_matrix,
    bloch_offset,
    cooling_rate,
    qubit_spectrum,
)
from exceptions import ConvergenceError, DomainError
from utils import get_logger

logger = get_logger(__name__)

# generator of the detuning modulation acting on (sigma_x, sigma_y)
MODULATION_GENERATOR = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
RATE_FLOOR = 1e-6
# Gamma_c(u) falls off as u^-2 beyond u ~ omega / lambda
AMPLITUDE_SEARCH_LIMIT = 1.0e4
MAX_CONDITION_NUMBER = 1e13
CURVE_COLUMNS = ["N_th", "n_LD", "n_f"]


@dataclass(frozen=True)
class CoolingResult:
    """
    Attributes:
        spectrum: Samples of S(nu), columns ``nu`` and ``S``.
        cooling_rate: Gamma_c = S(omega) - S(-omega) (1/s).
        backaction: N0 = S(-omega) / Gamma_c.
        n_th: Bath occupation of the resonator.
        zeta: Gamma / Gamma_c.
        n_ld: Lamb-Dicke occupation.
        n_f: Occupation of the full solution.
        cooling_total: Gamma_cool = Gamma_c + Gamma (1/s).
        amplitude_integral: int_0^u_cut u Gamma_c(u) / Gamma_c(0) du.
        amplitude_cutoff: u_cut.
    """
    spectrum: pd.DataFrame
    cooling_rate: float
    backaction: float
    n_th: float
    zeta: float
    n_ld: float
    n_f: float
    cooling_total: float
    amplitude_integral: float
    amplitude_cutoff: float


def harmonic_balance(p: CoolingParams, amplitude: float, harmonics: int = 1) -> np.ndarray:
    """
    Fourier components v_n of the Bloch vector s(t) = sum_n v_n e^(-i n omega t) under a
    detuning modulated by 2 lambda alpha cos(omega t).

    The components solve (A + i n omega) v_n + lambda alpha G (v_(n-1) + v_(n+1)) = -b delta_n0,
    truncated at |n| <= harmonics.

    Args:
        p (CoolingParams): Operating point.
        amplitude (float): Coherent amplitude alpha of the resonator.
        harmonics (int): Truncation order, at least one.

    Returns:
        np.ndarray: Complex array of shape (2 * harmonics + 1, 3), row n + harmonics holds v_n.

    Raises:
        ConvergenceError: If the truncated system is singular or its solution is not finite.
    """
    if harmonics < 1:
        raise DomainError(f"harmonic balance needs at least one harmonic, got {harmonics}")
    orders = np.arange(-harmonics, harmonics + 1)
    size = len(orders)
    matrix = np.zeros((3 * size, 3 * size), dtype=complex)
    bloch = bloch_matrix(p)
    mixing = p.coupling * amplitude * MODULATION_GENERATOR
    for row, order in enumerate(orders):
        block = slice(3 * row, 3 * row + 3)
        matrix[block, block] = bloch + 1j * order * p.trap_frequency * np.eye(3)
        if row > 0:
            matrix[block, 3 * (row - 1):3 * row] = mixing
        if row < size - 1:
            matrix[block, 3 * (row + 1):3 * (row + 2)] = mixing
    rhs = np.zeros(3 * size, dtype=complex)
    rhs[3 * harmonics:3 * harmonics + 3] = -bloch_offset(p)

    condition = np.linalg.cond(matrix)
    diagnostics = {"amplitude": amplitude, "harmonics": harmonics, "condition": condition}
    if not np.isfinite(condition) or condition > MAX_CONDITION_NUMBER:
        raise ConvergenceError(f"harmonic balance system is singular (cond = {condition:.3g})", diagnostics)
    solution = np.linalg.solve(matrix, rhs)
    if not np.all(np.isfinite(solution)):
        raise ConvergenceError("harmonic balance produced a non-finite solution", diagnostics)
    return solution.reshape(size, 3)


def renormalized_rate(p: CoolingParams, amplitude: float, harmonics: int = 1) -> float:
    """
    Gamma_c(alpha) = -lambda Im(v_1^z) / alpha, the cooling rate seen by a coherent
    amplitude alpha. Tends to Gamma_c at alpha -> 0.
    """
    if amplitude == 0:
        return cooling_rate(p)
    components = harmonic_balance(p, amplitude, harmonics)
    first = components[harmonics + 1]
    return float(-p.coupling * first[2].imag / amplitude)


def truncation_error(p: CoolingParams, amplitude: float) -> float:
    """Relative change of Gamma_c(alpha) when second harmonics are included."""
    first = renormalized_rate(p, amplitude, harmonics=1)
    second = renormalized_rate(p, amplitude, harmonics=2)
    return abs(second - first) / max(abs(second), np.finfo(float).tiny)


def rate_table(
    p: CoolingParams,
    amplitudes: Iterable[float],
    harmonics: int = 1,
    n_jobs: int = 1,
) -> pd.DataFrame:
    """
    Gamma_c(alpha) and Gamma_c(alpha) / Gamma_c(0) over a grid of amplitudes.

    Returns:
        pd.DataFrame: Columns ``amplitude``, ``rate``, ``relative_rate``.
    """
    values = [float(a) for a in amplitudes]
    rates = Parallel(n_jobs=n_jobs)(delayed(renormalized_rate)(p, a, harmonics) for a in values)
    base = cooling_rate(p)
    return pd.DataFrame({
        "amplitude": values,
        "rate": rates,
        "relative_rate": np.asarray(rates) / base,
    })


def _relative_rate(p: CoolingParams, base: float, harmonics: int, amplitude: float) -> float:
    return renormalized_rate(p, amplitude, harmonics) / base


def amplitude_cutoff(p: CoolingParams, harmonics: int = 1) -> float:
    """
    Smallest amplitude u = 2^j omega / lambda at which |Gamma_c(u)| / Gamma_c(0) < 1e-6,
    searched up to 1e4 omega / lambda.
    """
    base = cooling_rate(p)
    scale = p.trap_frequency / p.coupling
    limit = AMPLITUDE_SEARCH_LIMIT * scale
    u = scale
    while u < limit:
        if abs(_relative_rate(p, base, harmonics, u)) < RATE_FLOOR:
            return u
        u *= 2.0
    logger.warning(
        "Gamma_c(u) / Gamma_c(0) = %.3g at u = %.3g; integrating the amplitude tail only up to there",
        _relative_rate(p, base, harmonics, limit), limit)
    return limit


@lru_cache(maxsize=64)
def amplitude_integral(p: CoolingParams, harmonics: int = 1) -> Tuple[float, float]:
    """
    int_0^u_cut u Gamma_c(u) / Gamma_c(0) du by adaptive quadrature.

    Returns:
        tuple: (integral, u_cut).
    """
    if p.coupling == 0:
        raise DomainError("the amplitude integral needs a non-zero coupling")
    base = cooling_rate(p)
    if base <= 0:
        raise DomainError(f"operating point heats the resonator (Gamma_c = {base:.4g} 1/s)")
    cutoff = amplitude_cutoff(p, harmonics)
    # peak structure sits near u ~ omega / lambda, then a slow tail
    scale = p.trap_frequency / p.coupling
    breakpoints = [scale * k for k in (0.5, 1.0, 2.0, 10.0, 100.0, 1000.0) if scale * k < cutoff]
    value, error = quad(
        lambda u: u * _relative_rate(p, base, harmonics, u),
        0.0,
        cutoff,
        points=breakpoints or None,
        limit=400,
    )
    logger.debug("amplitude integral %.6g +- %.2g up to u = %.4g", value, error, cutoff)
    return value, cutoff


def lamb_dicke_occupation(p: CoolingParams, n_th) -> np.ndarray:
    """n_LD = Gamma N_th / Gamma_c + N0."""
    rate = cooling_rate(p)
    if rate <= 0:
        raise DomainError(f"operating point heats the resonator (Gamma_c = {rate:.4g} 1/s)")
    return p.resonator_damping * np.asarray(n_th, dtype=float) / rate + backaction_occupation(p)


def full_occupation(p: CoolingParams, n_th, harmonics: int = 1,
                    integral: Optional[float] = None) -> np.ndarray:
    """
    n_f = N_th [zeta + (1 - zeta) / (1 + zeta e^x)] + N0 with the amplitude integral in x.

    At zeta = 0 (undamped resonator) the bath is disconnected and n_f = N0. A
    precomputed ``integral`` skips the quadrature.
    """
    rate = cooling_rate(p)
    if rate <= 0:
        raise DomainError(f"operating point heats the resonator (Gamma_c = {rate:.4g} 1/s)")
    floor = backaction_occupation(p)
    n_th = np.asarray(n_th, dtype=float)
    zeta = p.resonator_damping / rate
    if zeta == 0:
        return np.full(n_th.shape, floor)
    if integral is None:
        integral, _ = amplitude_integral(p, harmonics)
    with np.errstate(divide="ignore"):
        x = np.where(n_th > 0, 2.0 * integral / (np.where(n_th > 0, n_th, 1.0) * zeta), np.inf)
    # (1 - zeta) / (1 + zeta e^x) written as a logistic to survive large x
    tail = (1.0 - zeta) * expit(-(x + math.log(zeta)))
    return n_th * (zeta + tail) + floor


def steady_state_occupation(
    p: CoolingParams,
    n_th: float,
    harmonics: int = 1,
    spectrum_points: int = 201,
) -> CoolingResult:
    """
    Both occupation branches at one bath occupation.

    Args:
        p (CoolingParams): Operating point.
        n_th (float): Bath occupation of the resonator.
        harmonics (int): Harmonic-balance truncation order.
        spectrum_points (int): Samples of S(nu) over [-2 omega, 2 omega].

    Returns:
        CoolingResult: Rates, occupations and the sampled spectrum.

    Raises:
        DomainError: If the operating point does not cool (Gamma_c <= 0) or N_th < 0.
        ConvergenceError: If the harmonic-balance system cannot be solved.
    """
    if n_th < 0:
        raise DomainError(f"bath occupation must be non-negative, got {n_th}")
    rate = cooling_rate(p)
    if rate <= 0:
        raise DomainError(f"operating point heats the resonator (Gamma_c = {rate:.4g} 1/s)")
    nus = np.linspace(-2.0 * p.trap_frequency, 2.0 * p.trap_frequency, spectrum_points)
    spectrum = pd.DataFrame({"nu": nus, "S": qubit_spectrum(nus, p)})
    if p.resonator_damping > 0 and p.coupling > 0:
        integral, cutoff = amplitude_integral(p, harmonics)
    else:
        integral, cutoff = 0.0, 0.0
    return CoolingResult(
        spectrum=spectrum,
        cooling_rate=rate,
        backaction=backaction_occupation(p),
        n_th=n_th,
        zeta=p.resonator_damping / rate,
        n_ld=float(lamb_dicke_occupation(p, n_th)),
        n_f=float(full_occupation(p, n_th, harmonics, integral)),
        cooling_total=rate + p.resonator_damping,
        amplitude_integral=integral,
        amplitude_cutoff=cutoff,
    )


def cooling_curve(
    p: CoolingParams,
    n_th_values: Iterable[float],
    harmonics: int = 1,
    n_jobs: int = 1,
    chunks: Optional[int] = None,
) -> pd.DataFrame:
    """
    Lamb-Dicke and full occupations over a grid of bath occupations.

    The amplitude integral does not depend on N_th and is computed once; the grid is
    then split into chunks evaluated in parallel.

    Returns:
        pd.DataFrame: Columns ``N_th``, ``n_LD``, ``n_f``.
    """
    values = np.asarray(list(n_th_values), dtype=float)
    if np.any(values < 0):
        raise DomainError("bath occupations must be non-negative")
    integral = None
    if p.resonator_damping > 0 and p.coupling > 0:
        integral, _ = amplitude_integral(p, harmonics)
    parts = np.array_split(values, chunks or max(1, min(len(values), 8)))
    rows = Parallel(n_jobs=n_jobs)(
        delayed(_curve_chunk)(p, part, harmonics, integral) for part in parts if len(part))
    table = pd.concat(rows, ignore_index=True)
    logger.info("cooling curve: %d points, n_f(max N_th) = %.4g", len(table), table["n_f"].iloc[-1])
    return table[CURVE_COLUMNS]


def _curve_chunk(p: CoolingParams, n_th: np.ndarray, harmonics: int,
                 integral: Optional[float]) -> pd.DataFrame:
    return pd.DataFrame({
        "N_th": n_th,
        "n_LD": lamb_dicke_occupation(p, n_th),
        "n_f": full_occupation(p, n_th, harmonics, integral),
    })
