"""
Measurement schedule of the non-adaptive binary-doubling protocol.

Stage k applies the phase 2^k phi0 and is measured M(K, k) = M_K + mu (K - k) times,
split between the +-x basis and an offset basis.
"""
import math
from dataclasses import dataclass
from typing import List, Tuple

import pandas as pd

from exceptions import DomainError

OFFSET_MODES = ("quadrature", "literal")


@dataclass(frozen=True)
class ProtocolSchedule:
    """
    Attributes:
        doublings: K, the index of the last stage.
        final_count: M_K, measurements of the 2^K stage.
        increment: mu, extra measurements per coarser stage.
        offset_mode: ``quadrature`` measures the second basis at pi / 2, ``literal``
            at pi / M(K, k).
        inflation: Multiplier applied to every stage count, 1 / f^2 for a noisy coin.
    """
    doublings: int
    final_count: int = 2
    increment: int = 3
    offset_mode: str = "quadrature"
    inflation: float = 1.0

    def __post_init__(self):
        if self.doublings < 0:
            raise DomainError(f"K must be non-negative, got {self.doublings}")
        if self.final_count < 1 or self.increment < 0:
            raise DomainError("M_K must be positive and mu non-negative")
        if self.offset_mode not in OFFSET_MODES:
            raise DomainError(f"offset_mode must be one of {OFFSET_MODES}, got {self.offset_mode!r}")
        if self.inflation < 1.0:
            raise DomainError(f"inflation must be at least 1, got {self.inflation}")

    @property
    def stages(self) -> range:
        return range(self.doublings + 1)

    def nominal_count(self, k: int) -> int:
        """M(K, k) = M_K + mu (K - k)."""
        return self.final_count + self.increment * (self.doublings - k)

    def count(self, k: int) -> int:
        """Measurements actually taken at stage k, after inflation."""
        return math.ceil(self.nominal_count(k) * self.inflation - 1e-9)

    def counts(self) -> List[int]:
        return [self.count(k) for k in self.stages]

    def basis_split(self, k: int) -> Tuple[int, int]:
        """(ceil(M / 2), floor(M / 2)): measurements in the +-x and offset bases."""
        total = self.count(k)
        return (total + 1) // 2, total // 2

    def offset(self, k: int) -> float:
        if self.offset_mode == "quadrature":
            return math.pi / 2.0
        return math.pi / self.count(k)

    @property
    def mirror_information(self) -> float:
        """
        Mean log-likelihood ratio, in nats, between phi0 and -phi0 at f = 1.

        The +-x basis is blind to the sign of phi0; each offset-basis shot adds
        2 sin^2(theta) on average over phi0.
        """
        return sum(2.0 * self.basis_split(k)[1] * math.sin(self.offset(k)) ** 2 for k in self.stages)

    @property
    def total_resource(self) -> int:
        """N = sum_k M(K, k) 2^k, the accrued phase in units of phi0."""
        return sum(self.nominal_count(k) << k for k in self.stages)

    @property
    def closed_form_resource(self) -> int:
        """M_K (2^(K+1) - 1) + mu (2^(K+1) - K - 2); equals 5 2^(K+1) - 3K - 8 at M_K = 2, mu = 3."""
        power = 1 << (self.doublings + 1)
        return self.final_count * (power - 1) + self.increment * (power - self.doublings - 2)

    @property
    def final_arc_width(self) -> float:
        return 2.0 * math.pi / (3.0 * 2 ** self.doublings)

    def to_dataframe(self) -> pd.DataFrame:
        rows = []
        for k in self.stages:
            n_x, n_offset = self.basis_split(k)
            rows.append([k, self.nominal_count(k), self.count(k), n_x, n_offset, self.offset(k)])
        return pd.DataFrame(rows, columns=["k", "nominal_count", "count", "x_basis", "offset_basis", "offset"])


def schedule(
    doublings: int,
    final_count: int = 2,
    increment: int = 3,
    offset_mode: str = "quadrature",
    fidelity: float = 1.0,
    inflate: bool = False,
) -> ProtocolSchedule:
    """
    Builds the schedule for K doublings.

    Args:
        doublings (int): K.
        final_count (int): M_K.
        increment (int): mu.
        offset_mode (str): Second-basis offset convention.
        fidelity (float): Per-round fidelity f, only used when ``inflate`` is set.
        inflate (bool): Multiply every stage count by 1 / f^2.

    Returns:
        ProtocolSchedule: The schedule.
    """
    inflation = 1.0
    if inflate:
        if not 0.0 < fidelity <= 1.0:
            raise DomainError(f"fidelity must lie in (0, 1] to inflate counts, got {fidelity}")
        inflation = 1.0 / fidelity ** 2
    return ProtocolSchedule(doublings, final_count, increment, offset_mode, inflation)
