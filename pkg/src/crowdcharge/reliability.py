"""Provider reliability: provision history times usage regularity."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelError, ReliabilityProfile

DEFAULT_BINS = 10


class InsufficientData(ValueError):
    pass


@dataclass(frozen=True)
class SocSeries:
    """State-of-charge samples ``(time_min, soc)`` of one provider."""

    owner_id: str
    samples: tuple[tuple[int, float], ...]

    def __post_init__(self):
        times = [t for t, _ in self.samples]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ModelError("samples", "times must be strictly increasing")
        if any(not 0.0 <= s <= 1.0 for _, s in self.samples):
            raise ModelError("samples", "soc must lie in [0, 1]")


def provision_success(ss: int, tps: int) -> float:
    """Share of successful provisions; providers without history score 1.0."""
    if ss < 0 or ss > tps:
        raise ModelError("ss", f"successful provisions {ss} outside [0, {tps}]")
    if tps == 0:
        return 1.0
    return ss / tps


def normalized_entropy(values, bins: int) -> float:
    """Shannon entropy of an equal-width histogram over the observed range,
    divided by ``log(bins)``."""
    values = np.asarray(values, dtype=float)
    lo, hi = float(values.min()), float(values.max())
    # spreads at rounding-noise level count as constant
    if hi - lo <= 1e-9 * max(abs(lo), abs(hi)):
        return 0.0
    counts, _ = np.histogram(values, bins=bins, range=(lo, hi))
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log(p)).sum() / math.log(bins))


def eub_from_soc(series: SocSeries, bins: int = DEFAULT_BINS) -> float:
    """Usage-regularity score from the discharge-rate deltas of a SoC series.

    Regular discharge concentrates the deltas in few histogram bins, which
    gives low entropy and a score near 1.
    """
    if len(series.samples) < 2:
        raise InsufficientData(f"{series.owner_id}: need at least 2 SoC samples")
    if bins < 2:
        raise ModelError("bins", "need at least 2 bins")
    t = np.array([s[0] for s in series.samples], dtype=float)
    soc = np.array([s[1] for s in series.samples], dtype=float)
    deltas = np.diff(soc) / np.diff(t)
    eub = 1.0 - normalized_entropy(deltas, bins)
    return min(1.0, max(0.0, eub))


def reliability_score(eub: float, pb: float) -> float:
    for name, value in (("eub", eub), ("pb", pb)):
        if not 0.0 <= value <= 1.0:
            raise ModelError(name, f"must lie in [0, 1], got {value!r}")
    return eub * pb


def profile_reliability(profile: ReliabilityProfile) -> float:
    pb = provision_success(profile.successful_services_SS, profile.total_services_TPS)
    return reliability_score(profile.eub, pb)
