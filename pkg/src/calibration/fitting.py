"""
Determination of (omega_q, omega, lambda) from measured <sigma_x> of the freely evolving qubit.

The fit runs in (omega_q, omega, kappa = lambda^2 / omega), where the three parameters
decorrelate: kappa sets the mean precession offset sigma_z(0) kappa and omega only the
small modulation. Records that mix initial states with opposite sigma_z(0) separate
kappa from omega_q through the two carrier frequencies.
"""
import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import least_squares, minimize_scalar
from scipy.signal import lombscargle

from calibration.free_evolution import CalibrationParams, rotation_angle
from exceptions import ConvergenceError, DomainError
from utils import get_logger

logger = get_logger(__name__)

MIN_SAMPLES = 100
MIN_SHOTS = 100
CONFIDENCE_Z = 1.959963984540054
DEFAULT_INITIAL_BLOCH = (1.0 / math.sqrt(2.0), 0.0, 1.0 / math.sqrt(2.0))
# half width of the seed search windows, relative to the prior
SEARCH_WINDOW = 0.05
PERIODOGRAM_OVERSAMPLING = 10
RECORD_COLUMNS = ["t", "sigma_x", "shots", "sigma_x0", "sigma_y0", "sigma_z0"]


@dataclass(frozen=True)
class CalibrationRecord:
    """
    Attributes:
        times: Sample times t_i (s).
        sigma_x: Measured <sigma_x> at each time.
        shots: Shots per sample; ``None`` marks noiseless data.
        initial_bloch: Initial Bloch vector of each sample, shape (n, 3).
        true_params: Parameters that generated synthetic data, if known.
    """
    times: np.ndarray
    sigma_x: np.ndarray
    shots: Optional[np.ndarray]
    initial_bloch: np.ndarray
    true_params: Optional[CalibrationParams] = None

    def __post_init__(self):
        if np.any(np.abs(self.sigma_x) > 1.0 + 1e-12):
            raise DomainError("measured <sigma_x> must lie in [-1, 1]")
        if self.initial_bloch.shape != (len(self.times), 3) or len(self.sigma_x) != len(self.times):
            raise DomainError("times, sigma_x and initial states must have matching lengths")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def span(self) -> float:
        return float(self.times.max() - self.times.min())

    def to_dataframe(self) -> pd.DataFrame:
        shots = self.shots if self.shots is not None else np.zeros(len(self))
        return pd.DataFrame(
            np.column_stack([self.times, self.sigma_x, shots, self.initial_bloch]),
            columns=RECORD_COLUMNS,
        )

    @classmethod
    def from_dataframe(cls, frame: pd.DataFrame) -> "CalibrationRecord":
        """
        Reads ``t``, ``sigma_x`` and ``shots`` columns; the initial Bloch columns default
        to (1, 0, 1) / sqrt(2). A shot count of zero marks noiseless data.
        """
        missing = [c for c in ("t", "sigma_x", "shots") if c not in frame.columns]
        if missing:
            raise DomainError(f"calibration data is missing columns: {missing}")
        bloch = np.column_stack([
            frame[column].to_numpy(float) if column in frame.columns else np.full(len(frame), default)
            for column, default in zip(RECORD_COLUMNS[3:], DEFAULT_INITIAL_BLOCH)
        ])
        shots = frame["shots"].to_numpy(float)
        return cls(
            times=frame["t"].to_numpy(float),
            sigma_x=frame["sigma_x"].to_numpy(float),
            shots=None if np.all(shots == 0) else shots,
            initial_bloch=bloch,
        )


@dataclass(frozen=True)
class CalibrationFit:
    params: CalibrationParams
    covariance: np.ndarray
    residual_norm: float
    kappa: float
    kappa_std: float
    evaluations: int

    @property
    def std_errors(self) -> Dict[str, float]:
        """One-sigma errors of omega_q, omega and lambda (delta method for lambda)."""
        std = np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))
        omega = self.params.trap_frequency
        if self.params.coupling > 0:
            coupling_std = 0.5 * math.sqrt(
                (self.kappa_std * omega) ** 2 + (self.kappa * std[1]) ** 2) / self.params.coupling
        else:
            coupling_std = math.sqrt(max(self.kappa_std, 0.0) * omega)
        return {"qubit_splitting": float(std[0]), "trap_frequency": float(std[1]), "coupling": coupling_std}

    def confidence_intervals(self) -> Dict[str, Tuple[float, float]]:
        """95 % intervals; the coupling interval is mapped from the kappa interval."""
        errors = self.std_errors
        omega_q, omega = self.params.qubit_splitting, self.params.trap_frequency
        low_kappa = self.kappa - CONFIDENCE_Z * self.kappa_std
        high_kappa = self.kappa + CONFIDENCE_Z * self.kappa_std
        return {
            "qubit_splitting": (omega_q - CONFIDENCE_Z * errors["qubit_splitting"],
                                omega_q + CONFIDENCE_Z * errors["qubit_splitting"]),
            "trap_frequency": (omega - CONFIDENCE_Z * errors["trap_frequency"],
                               omega + CONFIDENCE_Z * errors["trap_frequency"]),
            "coupling": (math.sqrt(max(low_kappa, 0.0) * omega), math.sqrt(max(high_kappa, 0.0) * omega)),
        }

    def as_dict(self) -> Dict:
        intervals = self.confidence_intervals()
        return {
            "qubit_splitting": self.params.qubit_splitting,
            "trap_frequency": self.params.trap_frequency,
            "coupling": self.params.coupling,
            "kappa": self.kappa,
            "std_errors": self.std_errors,
            "confidence_intervals": {name: list(bounds) for name, bounds in intervals.items()},
            "covariance": self.covariance.tolist(),
            "residual_norm": self.residual_norm,
            "evaluations": self.evaluations,
        }


def model_sigma_x(times, initial_bloch, qubit_splitting: float, trap_frequency: float, kappa: float):
    """<sigma_x>(t) for per-sample initial states, parameterised by kappa = lambda^2 / omega."""
    sx0, sy0, sz0 = initial_bloch[:, 0], initial_bloch[:, 1], initial_bloch[:, 2]
    xi = rotation_angle(times, sz0, qubit_splitting, trap_frequency, kappa)
    return sx0 * np.cos(xi) + sy0 * np.sin(xi)


def synthetic_record(
    params: CalibrationParams,
    samples: int = 200,
    shots: Optional[int] = 10_000,
    span_periods: float = 300.0,
    seed: Optional[int] = None,
    tilt: float = math.pi / 4.0,
) -> CalibrationRecord:
    """
    Samples <sigma_x> at random times over ``span_periods`` trap periods.

    Initial states alternate between (sin tilt, 0, cos tilt) and (sin tilt, 0, -cos tilt).
    Each value is the mean of ``shots`` projective +-1 outcomes, or exact when shots is None.
    """
    rng = np.random.default_rng(seed)
    span = span_periods * 2.0 * math.pi / params.trap_frequency
    times = np.sort(rng.uniform(0.0, span, samples))
    signs = np.where(np.arange(samples) % 2 == 0, 1.0, -1.0)
    bloch = np.column_stack([
        np.full(samples, math.sin(tilt)), np.zeros(samples), signs * math.cos(tilt)])
    exact = model_sigma_x(times, bloch, params.qubit_splitting, params.trap_frequency, params.kappa)
    if shots is None:
        return CalibrationRecord(times, exact, None, bloch, params)
    hits = rng.binomial(shots, np.clip(0.5 * (1.0 + exact), 0.0, 1.0))
    return CalibrationRecord(times, 2.0 * hits / shots - 1.0, np.full(samples, float(shots)), bloch, params)


def _carrier_frequency(times, values, center: float, span: float) -> float:
    """Periodogram peak of a sigma_x series near ``center`` (rad/s)."""
    half = SEARCH_WINDOW * abs(center) + 4.0 * math.pi / span
    step = 2.0 * math.pi / (span * PERIODOGRAM_OVERSAMPLING)
    grid = np.arange(max(center - half, step), center + half, step)
    centered = values - values.mean()
    power = lombscargle(times, centered, grid)
    peak = grid[int(np.argmax(power))]
    refined = minimize_scalar(
        lambda nu: -lombscargle(times, centered, np.array([nu]))[0],
        bounds=(peak - step, peak + step),
        method="bounded",
        options={"xatol": step * 1e-6},
    )
    return float(refined.x) if refined.success else float(peak)


def seed_parameters(record: CalibrationRecord, prior: CalibrationParams) -> Tuple[float, float, float]:
    """
    Starting point (omega_q, omega, kappa) from the data.

    Each initial sigma_z(0) group precesses at nu = 2 omega_q + sigma_z(0) kappa; the
    periodogram peaks of the groups give omega_q and kappa by linear regression. omega
    is then picked on a grid around the prior whose spacing resolves one radian of
    modulation phase over the record.
    """
    span = record.span
    sz = record.initial_bloch[:, 2]
    groups = np.unique(np.round(sz, 12))
    carriers, offsets = [], []
    for level in groups:
        mask = np.isclose(sz, level, atol=1e-12)
        center = 2.0 * prior.qubit_splitting + level * prior.kappa
        carriers.append(_carrier_frequency(record.times[mask], record.sigma_x[mask], center, span))
        offsets.append(level)
    if len(groups) >= 2:
        design = np.column_stack([np.full(len(offsets), 2.0), offsets])
        (omega_q, kappa), *_ = np.linalg.lstsq(design, np.array(carriers), rcond=None)
    else:
        kappa = prior.kappa
        omega_q = 0.5 * (carriers[0] - offsets[0] * kappa)

    half = SEARCH_WINDOW * prior.trap_frequency
    points = int(min(max(8.0 * half * span / math.pi, 16), 20000))
    omegas = np.linspace(prior.trap_frequency - half, prior.trap_frequency + half, points)
    costs = [np.sum((model_sigma_x(record.times, record.initial_bloch, omega_q, w, kappa)
                     - record.sigma_x) ** 2) for w in omegas]
    omega = float(omegas[int(np.argmin(costs))])
    logger.debug("calibration seed: omega_q=%.9g omega=%.9g kappa=%.6g", omega_q, omega, kappa)
    return float(omega_q), omega, float(kappa)


def fit_parameters(record: CalibrationRecord, prior: CalibrationParams) -> CalibrationFit:
    """
    Nonlinear least-squares fit of the closed-form free evolution to a record.

    Args:
        record (CalibrationRecord): Measured <sigma_x> with its sample times and initial states.
        prior (CalibrationParams): Design values used to bound the seed search, each
            within a few percent of the truth.

    Returns:
        CalibrationFit: Fitted (omega_q, omega, lambda), covariance of (omega_q, omega) and
            the kappa uncertainty, residual norm.

    Raises:
        DomainError: With fewer than 100 samples or 100 shots per sample.
        ConvergenceError: If the optimiser does not converge; diagnostics hold the last iterate.
    """
    if len(record) < MIN_SAMPLES:
        raise DomainError(f"calibration needs at least {MIN_SAMPLES} samples, got {len(record)}")
    if record.shots is not None and np.min(record.shots) < MIN_SHOTS:
        raise DomainError(f"calibration needs at least {MIN_SHOTS} shots per sample")

    start = np.array(seed_parameters(record, prior))
    scale = np.abs(start)
    scale[2] = max(scale[2], prior.kappa)
    scale[scale == 0] = 1.0
    weights = np.ones(len(record)) if record.shots is None else np.sqrt(record.shots)

    def residuals(x):
        omega_q, omega, kappa = x * scale
        model = model_sigma_x(record.times, record.initial_bloch, omega_q, omega, kappa)
        return (model - record.sigma_x) * weights

    result = least_squares(residuals, start / scale, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                           max_nfev=20000)
    if not result.success or not np.all(np.isfinite(result.x)):
        raise ConvergenceError(
            f"calibration fit did not converge: {result.message}",
            diagnostics={"best_iterate": (result.x * scale).tolist(), "status": result.status,
                         "cost": float(result.cost), "evaluations": int(result.nfev)},
        )
    omega_q, omega, kappa = result.x * scale
    dof = max(len(record) - 3, 1)
    variance = 2.0 * result.cost / dof
    jacobian = result.jac / scale
    covariance = np.linalg.pinv(jacobian.T @ jacobian) * variance
    coupling = math.sqrt(max(kappa, 0.0) * omega)
    params = CalibrationParams(qubit_splitting=float(omega_q), trap_frequency=float(omega), coupling=coupling)
    fit = CalibrationFit(
        params=params,
        covariance=covariance[:2, :2],
        residual_norm=float(np.linalg.norm(record.sigma_x - model_sigma_x(
            record.times, record.initial_bloch, omega_q, omega, kappa))),
        kappa=float(kappa),
        kappa_std=float(math.sqrt(max(covariance[2, 2], 0.0))),
        evaluations=int(result.nfev),
    )
    logger.info("calibration fit: omega_q=%.9g omega=%.9g lambda=%.6g (residual %.3g)",
                omega_q, omega, coupling, fit.residual_norm)
    return fit
