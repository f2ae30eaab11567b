from __future__ import annotations

from dataclasses import dataclass

from toyaudit import ToyAuditError

SECONDS_PER_YEAR = 365.25 * 86400


class InvalidParameter(ToyAuditError):
    pass


@dataclass(frozen=True)
class RuntimeEstimate:
    seconds: float
    human: str

    @property
    def years(self) -> float:
        return self.seconds / SECONDS_PER_YEAR


def humanize_seconds(seconds: float) -> str:
    if seconds < 120:
        return f"{seconds:.1f} seconds"
    if seconds < 120 * 60:
        return f"{seconds / 60:.1f} minutes"
    if seconds < 48 * 3600:
        return f"{seconds / 3600:.1f} hours"
    if seconds < 730 * 86400:
        return f"{seconds / 86400:.1f} days"
    years = seconds / SECONDS_PER_YEAR
    return f"{years:,.0f} years ({years:.1e})" if years >= 1e4 else f"{years:,.1f} years"


def estimate_runtime(probes: int, rtt: float, workers: int = 1, fraction: float = 1.0) -> RuntimeEstimate:
    """Serial-equivalent wall time: probes * fraction * rtt / workers."""
    if probes < 0:
        raise InvalidParameter("probes must be >= 0")
    if rtt <= 0:
        raise InvalidParameter("rtt must be > 0")
    if workers < 1:
        raise InvalidParameter("workers must be >= 1")
    if not 0 < fraction <= 1:
        raise InvalidParameter("fraction must be in (0, 1]")
    seconds = probes * fraction * rtt / workers
    return RuntimeEstimate(seconds, humanize_seconds(seconds))
