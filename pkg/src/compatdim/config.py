"""Numerical tolerances shared by every module."""
from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    """One record of tolerances, threaded through all public functions.

    Absolute values; callers that compare matrices of large norm scale them
    by the operator norm where noted.
    """

    herm: float = 1e-10        # max-abs |M - M^dagger|
    iso: float = 1e-10         # max-abs |V^dagger V - I|
    psd: float = 1e-9          # lambda_min >= -psd
    norm_sum: float = 1e-9     # max-abs |sum_i A_i - I|
    sdp: float = 1e-8          # solver feasibility / gap tolerance
    kernel: float = 1e-9       # relative singular-value threshold
    solver_cap: int = 400      # total PSD block dimension allowed per SDP

    def with_(self, **changes) -> "Tolerances":
        return replace(self, **changes)


DEFAULT_TOL = Tolerances()
