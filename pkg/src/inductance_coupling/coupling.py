"""
Qubit-resonator coupling strength, the doubling ladder of couplings used by the
protocol, and the geometry sweeps behind the coupling design figures.
"""
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from core_model.derived import DerivedQuantities, derive, select_omega
from core_model.system_config import TWO_PI, SystemConfig, config_to_dict
from exceptions import DomainError, ScheduleInfeasibleError
from inductance_coupling.inductance import mutual_inductance
from magnetostatics_trap.field import current_gradient, ring_flux_gradient
from utils import get_logger

logger = get_logger(__name__)

SWEEP_VARIABLES = ("qubit_radius", "sphere_radius", "system_scale")
# config keys carrying a length, scaled together by the system_scale sweep
LENGTH_KEYS = ("sphere_radius", "ring_radius", "wire_radius", "qubit_radius",
               "sphere_ring_gap", "ring_qubit_separation", "max_displacement")


@dataclass(frozen=True)
class CouplingResult:
    mutual_inductance: float
    coupling: float
    closed_form_coupling: float
    current_gradient: float
    qubit_current: float
    z0: float
    mass: float
    omega: float

    @property
    def coupling_hz(self) -> float:
        return self.coupling / TWO_PI


@dataclass(frozen=True)
class LambdaSchedule:
    lambda0: float
    couplings: np.ndarray
    qubit_currents: np.ndarray
    cap: float

    @property
    def doublings(self) -> int:
        return len(self.couplings) - 1

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame({
            "k": np.arange(len(self.couplings)),
            "coupling_hz": self.couplings / TWO_PI,
            "qubit_current": self.qubit_currents,
        })


@dataclass(frozen=True)
class SweepResult:
    variable: str
    table: pd.DataFrame
    argmax: float
    max_coupling_hz: float


def coupling_strength(cfg: SystemConfig, qubit_current: float) -> CouplingResult:
    """
    Coupling lambda = sqrt(2 / m hbar omega) M_rq (dI_r/dz)|z_eq I_q.

    Substituting the geometric trap frequency gives the closed form
    lambda = sqrt(2) M_rq I_q sqrt(|dPhi/dz|) / (hbar^(1/2) m^(1/4) L_r^(3/4)),
    which is reported alongside; the two agree exactly in derived mode.

    Args:
        cfg (SystemConfig): System configuration.
        qubit_current (float): Qubit persistent current I_q (A).

    Returns:
        CouplingResult: The coupling and its ingredients.

    Raises:
        DomainError: If I_q is negative or exceeds the qubit critical current I_qmax.
    """
    if qubit_current < 0:
        raise DomainError(f"qubit current must be non-negative, got {qubit_current}")
    if qubit_current > cfg.qubit.max_current:
        raise DomainError(
            f"qubit current {qubit_current:.4g} A exceeds the critical-current cap "
            f"I_qmax = {cfg.qubit.max_current:.4g} A")
    hbar = cfg.constants.hbar
    mass = cfg.ring.mass
    omega = select_omega(cfg)
    z_eq = cfg.equilibrium_height
    mutual = mutual_inductance(cfg.ring.radius, cfg.qubit.radius, cfg.geometry.ring_qubit_separation)
    gradient, _ = current_gradient(z_eq, cfg)
    coupling = math.sqrt(2.0 / (mass * hbar * omega)) * mutual * gradient * qubit_current

    flux_slope = abs(ring_flux_gradient(z_eq, cfg))
    closed_form = (math.sqrt(2.0) * mutual * qubit_current * math.sqrt(flux_slope)
                   / (math.sqrt(hbar) * mass ** 0.25 * cfg.resonator_inductance ** 0.75))
    return CouplingResult(
        mutual_inductance=mutual,
        coupling=coupling,
        closed_form_coupling=closed_form,
        current_gradient=gradient,
        qubit_current=qubit_current,
        z0=math.sqrt(hbar / (2.0 * mass * omega)),
        mass=mass,
        omega=omega,
    )


def coupling_cap(cfg: SystemConfig) -> float:
    """Largest coupling the qubit can drive: the pinned lambda_max, or lambda at I_qmax."""
    if cfg.is_pinned:
        return cfg.reference.max_coupling
    return coupling_strength(cfg, cfg.qubit.max_current).coupling


def achievable_displacement(cfg: SystemConfig, derived: Optional[DerivedQuantities] = None) -> float:
    """min(l_max, cap z0 / omega): the largest separation the qubit can actually produce."""
    derived = derived or derive(cfg)
    return min(derived.l_max, float(derived.displacement(coupling_cap(cfg))))


def lambda_schedule(cfg: SystemConfig, derived: Optional[DerivedQuantities] = None) -> LambdaSchedule:
    """
    Couplings lambda_k = 2^k lambda0 for k = 0..K with the qubit currents producing them.

    Every lambda_k is computed as ldexp(lambda0, k), so consecutive ratios are exactly 2.

    Raises:
        ScheduleInfeasibleError: If lambda_K exceeds the coupling cap. The ladder is
            never clamped.
    """
    derived = derived or derive(cfg)
    cap = coupling_cap(cfg)
    couplings = np.array([math.ldexp(derived.lambda0, k) for k in range(derived.doublings + 1)])
    if couplings[-1] > cap * (1.0 + 1e-12):
        raise ScheduleInfeasibleError(
            f"lambda_K/2pi = {couplings[-1] / TWO_PI:.4g} Hz exceeds the coupling cap "
            f"{cap / TWO_PI:.4g} Hz at I_qmax = {cfg.qubit.max_current:.4g} A")
    currents = np.minimum(cfg.qubit.max_current * couplings / cap, cfg.qubit.max_current)
    return LambdaSchedule(lambda0=derived.lambda0, couplings=couplings, qubit_currents=currents, cap=cap)


def scaled_config(cfg: SystemConfig, scale: float) -> SystemConfig:
    """
    Every length multiplied by ``scale``. The qubit inductance scales with its loop
    and the qubit current follows I_q = Phi0 / 2 L_q.
    """
    overrides = {key: value * scale for key, value in _length_values(cfg).items()}
    qubit_inductance = cfg.qubit.self_inductance * scale
    overrides["qubit_self_inductance"] = qubit_inductance
    overrides["qubit_max_current"] = cfg.constants.flux_quantum / (2.0 * qubit_inductance)
    return cfg.updated(**overrides)


def _length_values(cfg: SystemConfig):
    values = config_to_dict(cfg)
    return {key: values[key] for key in LENGTH_KEYS}


def _sweep_point(cfg: SystemConfig, variable: str, value: float) -> dict:
    if variable == "system_scale":
        point_cfg = scaled_config(cfg, value)
    else:
        point_cfg = cfg.updated(**{variable: value})
    result = coupling_strength(point_cfg, point_cfg.qubit.max_current)
    return {
        "value": value,
        "qubit_radius": point_cfg.qubit.radius,
        "sphere_radius": point_cfg.sphere.radius,
        "mutual_inductance": result.mutual_inductance,
        "qubit_current": result.qubit_current,
        "trap_frequency_hz": result.omega / TWO_PI,
        "coupling_hz": result.coupling_hz,
    }


def sweep(cfg: SystemConfig, variable: str, values: Iterable[float], n_jobs: int = 1) -> SweepResult:
    """
    Coupling at I_qmax over a range of one geometric variable.

    Sweeps change the geometry, so they run in derived mode (omega and L_r from
    geometry). ``qubit_radius`` and ``sphere_radius`` replace a single length;
    ``system_scale`` multiplies all lengths by the value.

    Args:
        cfg (SystemConfig): Base configuration.
        variable (str): One of ``qubit_radius``, ``sphere_radius``, ``system_scale``.
        values (Iterable[float]): Sweep points (m, or dimensionless for the scale).
        n_jobs (int): joblib worker count.

    Returns:
        SweepResult: Table in sweep order and the value maximising the coupling.
    """
    if variable not in SWEEP_VARIABLES:
        raise DomainError(f"unknown sweep variable: {variable} (expected one of {SWEEP_VARIABLES})")
    values = [float(v) for v in values]
    if not values:
        raise DomainError("sweep needs at least one point")
    base = cfg.updated(omega_mode="derived")
    rows = Parallel(n_jobs=n_jobs)(delayed(_sweep_point)(base, variable, v) for v in values)
    table = pd.DataFrame(rows)
    best = int(table["coupling_hz"].idxmax())
    logger.info("%s sweep: max coupling %.4g Hz at %.4g", variable,
                table.loc[best, "coupling_hz"], table.loc[best, "value"])
    return SweepResult(
        variable=variable,
        table=table,
        argmax=float(table.loc[best, "value"]),
        max_coupling_hz=float(table.loc[best, "coupling_hz"]),
    )
