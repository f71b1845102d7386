"""
Closed-form sensitivity of the gravimeter and its dependence on the resonator wire radius.
"""
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Optional

import pandas as pd
from joblib import Parallel, delayed

from core_model.derived import DerivedQuantities, derive
from core_model.system_config import TWO_PI, SystemConfig
from estimation.schedule import ProtocolSchedule, schedule
from exceptions import DomainError, ScheduleInfeasibleError
from inductance_coupling.coupling import lambda_schedule
from noise_budget.channels import NoiseBudget, full_budget
from open_dynamics.fidelity import ramsey_sensitivity
from utils import get_logger

logger = get_logger(__name__)

MICRO_GAL = 1e-8
WIRE_SWEEP_COLUMNS = [
    "a", "omega_hz", "ideal_prhz", "corrected_prhz", "tau_phi_s",
    "fidelity", "doublings", "cycle_time_s", "coupling_feasible",
]


@dataclass(frozen=True)
class SensitivityReport:
    """
    Attributes:
        resource: N, cumulative accrued phase of one cycle in units of phi0.
        delta_phi0: 2 pi / N.
        delta_g_over_g: hbar omega / (2 m g l0 N), one cycle.
        delta_g_over_g_limit: hbar omega / (20 m g l_max), the large-K form of the above.
        tau_exp: One run (s).
        tau_phi: One estimation cycle (s).
        ideal_prhz: Per-root-Hz Delta g / g at unit fidelity (1/sqrt(Hz)).
        corrected_prhz: Per-root-Hz Delta g / g at the budget fidelity (1/sqrt(Hz)).
        asymptotic_prhz: sqrt(3 tau_exp / 2) log2(alpha) / 10 alpha.
        doublings: K in use.
        doublings_bound: log2(alpha), the lower bound on K.
        l0: Smallest separation (m).
        lambda0: Smallest coupling (rad/s).
        fidelity: Per-round fidelity f.
        cycle_time: tau_phi / f^2 (s).
        ideal_ugal_prhz: ideal_prhz in microGal per root Hz.
        corrected_ugal_prhz: corrected_prhz in microGal per root Hz.
        ramsey_bound: Coherence-limited Delta g / g of a single Ramsey slosh at l_max.
    """
    resource: int
    delta_phi0: float
    delta_g_over_g: float
    delta_g_over_g_limit: float
    tau_exp: float
    tau_phi: float
    ideal_prhz: float
    corrected_prhz: float
    asymptotic_prhz: float
    doublings: int
    doublings_bound: float
    l0: float
    lambda0: float
    fidelity: float
    cycle_time: float
    ideal_ugal_prhz: float
    corrected_ugal_prhz: float
    ramsey_bound: float

    def as_dict(self) -> Dict[str, float]:
        return dict(self.__dict__)


def cycle_time(tau_exp: float, sched: ProtocolSchedule) -> float:
    """tau_phi = tau_exp sum_k M(K, k) = (tau_exp / 2)(3K^2 + 7K + 4) for M_K = 2, mu = 3."""
    return tau_exp * sum(sched.nominal_count(k) for k in sched.stages)


def sensitivity(
    cfg: SystemConfig,
    budget: Optional[NoiseBudget] = None,
    derived: Optional[DerivedQuantities] = None,
    final_count: int = 2,
    increment: int = 3,
) -> SensitivityReport:
    """
    Evaluates the sensitivity ladder of one configuration.

    Args:
        cfg (SystemConfig): System configuration.
        budget (NoiseBudget, optional): Damping budget supplying f; computed when omitted.
        derived (DerivedQuantities, optional): Precomputed derived quantities.
        final_count (int): M_K.
        increment (int): mu.

    Returns:
        SensitivityReport: Per-cycle and per-root-Hz sensitivities with their times.

    Raises:
        DomainError: If the fidelity is not positive or g is zero.
    """
    derived = derived or derive(cfg)
    budget = budget or full_budget(cfg, derived=derived)
    fidelity = budget.fidelity
    if not fidelity > 0:
        raise DomainError(f"per-round fidelity must be positive, got {fidelity}")
    g = cfg.gravity
    if g <= 0:
        raise DomainError("sensitivity to g needs a positive gravitational acceleration")

    hbar, mass, omega = cfg.constants.hbar, derived.mass, derived.omega
    sched = schedule(derived.doublings, final_count, increment)
    resource = sched.total_resource
    tau_phi = cycle_time(derived.tau_exp, sched)
    limit = hbar * omega / (20.0 * mass * g * derived.l_max)
    ideal = limit * math.sqrt(tau_phi)
    corrected = hbar * omega / (10.0 * fidelity * mass * g * derived.l_max) * math.sqrt(tau_phi)
    alpha = derived.alpha
    ramsey = ramsey_sensitivity(1, cfg, derived.l_max, derived=derived)
    return SensitivityReport(
        resource=resource,
        delta_phi0=TWO_PI / resource,
        delta_g_over_g=hbar * omega / (2.0 * mass * g * derived.l0 * resource),
        delta_g_over_g_limit=limit,
        tau_exp=derived.tau_exp,
        tau_phi=tau_phi,
        ideal_prhz=ideal,
        corrected_prhz=corrected,
        asymptotic_prhz=math.sqrt(1.5 * derived.tau_exp) * math.log2(alpha) / (10.0 * alpha),
        doublings=derived.doublings,
        doublings_bound=math.log2(alpha),
        l0=derived.l0,
        lambda0=derived.lambda0,
        fidelity=fidelity,
        cycle_time=tau_phi / fidelity ** 2,
        ideal_ugal_prhz=ideal * g / MICRO_GAL,
        corrected_ugal_prhz=corrected * g / MICRO_GAL,
        ramsey_bound=ramsey["coherence_bound"],
    )


def phase_from_gravity(g: float, cfg: SystemConfig, derived: Optional[DerivedQuantities] = None) -> float:
    """
    phi0 = 2 m g l0 tau / hbar mod 2 pi. The qubit term omega_q tau is known exactly
    and is taken as already subtracted.
    """
    derived = derived or derive(cfg)
    phase = 2.0 * derived.mass * g * derived.l0 * derived.tau / cfg.constants.hbar
    return phase % TWO_PI


def gravity_from_phase(phi0: float, cfg: SystemConfig, derived: Optional[DerivedQuantities] = None) -> float:
    """Inverse of ``phase_from_gravity`` on the branch 0 <= phi0 < 2 pi."""
    derived = derived or derive(cfg)
    return phi0 * cfg.constants.hbar / (2.0 * derived.mass * derived.l0 * derived.tau)


def _wire_point(cfg: SystemConfig, radius: float) -> dict:
    point_cfg = cfg.updated(wire_radius=radius, omega_mode="derived")
    derived = derive(point_cfg)
    report = sensitivity(point_cfg, derived=derived)
    try:
        lambda_schedule(point_cfg, derived)
        feasible = True
    except ScheduleInfeasibleError:
        feasible = False
    return {
        "a": radius,
        "omega_hz": derived.omega / TWO_PI,
        "ideal_prhz": report.ideal_prhz,
        "corrected_prhz": report.corrected_prhz,
        "tau_phi_s": report.tau_phi,
        "fidelity": report.fidelity,
        "doublings": report.doublings,
        "cycle_time_s": report.cycle_time,
        "coupling_feasible": feasible,
    }


def wire_radius_sweep(cfg: SystemConfig, radii: Iterable[float], n_jobs: int = 1) -> pd.DataFrame:
    """
    Sensitivity as a function of the resonator wire radius a.

    Each point recomputes mass, omega, the coupling ladder, the damping budget and f
    from geometry (derived mode). Points whose ladder exceeds the qubit's coupling cap
    are kept and flagged in ``coupling_feasible``.

    Args:
        cfg (SystemConfig): Base configuration.
        radii (Iterable[float]): Wire radii, each below the ring radius (m).
        n_jobs (int): joblib worker count.

    Returns:
        pd.DataFrame: One row per radius, columns as ``WIRE_SWEEP_COLUMNS``.
    """
    radii = [float(a) for a in radii]
    if not radii:
        raise DomainError("wire sweep needs at least one radius")
    too_thick = [a for a in radii if not 0.0 < a < cfg.ring.radius]
    if too_thick:
        raise DomainError(f"wire radii must lie in (0, R_r = {cfg.ring.radius:.3g} m): {too_thick}")
    rows = Parallel(n_jobs=n_jobs)(delayed(_wire_point)(cfg, a) for a in radii)
    table = pd.DataFrame(rows, columns=WIRE_SWEEP_COLUMNS)
    logger.info("wire sweep: %d radii, %d with a feasible coupling ladder",
                len(table), int(table["coupling_feasible"].sum()))
    return table
