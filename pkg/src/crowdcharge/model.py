"""Domain types for crowdsourced wireless-energy composition.

Units used throughout the package:

- time: integer minutes (epoch-relative)
- current: milliamperes (mA)
- energy: milliampere-hours (mAh)

All types are frozen dataclasses and safe to share between workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

IDLE_ID = "<idle>"
DEC_RTOL = 1e-9


class ModelError(ValueError):
    """An invariant of a domain type is violated; ``field`` names the culprit."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


def deliverable_energy(start: float, end: float, intensity: float, tsr: float) -> float:
    """Energy (mAh) delivered over ``[start, end]`` minutes at ``intensity`` mA."""
    return (end - start) / 60 * intensity * tsr


def _check_fraction(name: str, value: float) -> None:
    if not (0.0 <= value <= 1.0):
        raise ModelError(name, f"must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class EnergyService:
    """An advertised energy service. ``dec_advertised`` is always derived."""

    id: str
    owner_id: str
    area_id: str
    start_time: int
    end_time: int
    intensity_I: float
    tsr: float
    reliability: float = 1.0
    functionalities: str = ""
    dec_advertised: float = field(init=False, compare=False)

    def __post_init__(self):
        if self.end_time <= self.start_time:
            raise ModelError(
                "end_time",
                f"empty interval [{self.start_time}, {self.end_time}]",
            )
        if not self.intensity_I >= 0:
            raise ModelError("intensity_I", f"must be non-negative, got {self.intensity_I!r}")
        _check_fraction("tsr", self.tsr)
        _check_fraction("reliability", self.reliability)
        object.__setattr__(
            self,
            "dec_advertised",
            deliverable_energy(self.start_time, self.end_time, self.intensity_I, self.tsr),
        )

    @property
    def duration(self) -> int:
        return self.end_time - self.start_time

    @property
    def rate(self) -> float:
        """Effective delivery rate in mA (intensity times success rate)."""
        return self.intensity_I * self.tsr


@dataclass(frozen=True)
class EnergyQuery:
    """A consumer request. Deadlines are minutes relative to ``t_s``."""

    query_id: str
    t_s: int
    area_id: str
    required_energy_RE: float
    max_intensity_CI: float
    duration_du: int
    hard_deadline_Dlh: int

    def __post_init__(self):
        if self.duration_du <= 0:
            raise ModelError("duration_du", f"must be positive, got {self.duration_du!r}")
        if not self.required_energy_RE > 0:
            raise ModelError(
                "required_energy_RE", f"must be positive, got {self.required_energy_RE!r}"
            )
        if self.max_intensity_CI < 0:
            raise ModelError("max_intensity_CI", "must be non-negative")
        if self.hard_deadline_Dlh < self.duration_du:
            raise ModelError(
                "hard_deadline_Dlh",
                f"hard deadline {self.hard_deadline_Dlh} precedes soft deadline {self.duration_du}",
            )

    @property
    def soft_deadline(self) -> int:
        return self.t_s + self.duration_du

    @property
    def hard_deadline(self) -> int:
        return self.t_s + self.hard_deadline_Dlh

    @property
    def extension_budget(self) -> int:
        """Minutes the consumer tolerates past the soft deadline."""
        return self.hard_deadline_Dlh - self.duration_du

    @property
    def window(self) -> tuple[int, int]:
        return self.t_s, self.t_s + self.duration_du

    @property
    def extension_window(self) -> tuple[int, int]:
        return self.t_s + self.duration_du, self.t_s + 2 * self.duration_du


@dataclass(frozen=True)
class Chunk:
    index: int
    start: int
    end: int

    def __post_init__(self):
        if self.end <= self.start:
            raise ModelError("end", f"empty chunk [{self.start}, {self.end}]")

    @property
    def length(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class PartialService:
    """A service restricted to one chunk; QoS is inherited from the parent."""

    parent_id: str
    chunk_index: int
    start: int
    end: int
    intensity_I: float
    tsr: float
    reliability: float
    dec: float = field(init=False, compare=False)

    def __post_init__(self):
        if self.end <= self.start:
            raise ModelError("end", f"empty partial interval [{self.start}, {self.end}]")
        object.__setattr__(
            self, "dec", deliverable_energy(self.start, self.end, self.intensity_I, self.tsr)
        )

    @classmethod
    def idle(cls, chunk: Chunk) -> "PartialService":
        """Placeholder for a chunk in which no provider is available."""
        return cls(IDLE_ID, chunk.index, chunk.start, chunk.end, 0.0, 1.0, 1.0)

    @classmethod
    def of(cls, service: EnergyService, chunk: Chunk) -> "PartialService | None":
        start = max(service.start_time, chunk.start)
        end = min(service.end_time, chunk.end)
        if end <= start:
            return None
        return cls(
            service.id, chunk.index, start, end,
            service.intensity_I, service.tsr, service.reliability,
        )

    @property
    def is_idle(self) -> bool:
        return self.parent_id == IDLE_ID

    @property
    def duration(self) -> int:
        return self.end - self.start

    def key(self) -> tuple:
        return (self.parent_id, self.start, self.end)


@dataclass(frozen=True)
class CompositeService:
    """One partial per chunk plus (optionally) its assessment scores."""

    partials: tuple[PartialService, ...]
    tec: float | None = None
    agr: float | None = None
    rem_re: float | None = None
    ext_q: float | None = None
    utility: float | None = None

    def __post_init__(self):
        for left, right in zip(self.partials, self.partials[1:]):
            if right.start < left.end:
                raise ModelError("partials", "members overlap in time")

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(p.parent_id for p in self.partials)

    @property
    def members(self) -> tuple[PartialService, ...]:
        """Non-idle partials."""
        return tuple(p for p in self.partials if not p.is_idle)

    @property
    def assessed(self) -> bool:
        return self.ext_q is not None

    def sort_key(self) -> tuple:
        """Lower ExtQ, then higher AgR, then lexicographic member ids."""
        return (self.ext_q, -self.agr, self.ids)

    def to_dict(self) -> dict[str, Any]:
        return {
            "services": {str(p.chunk_index): p.parent_id for p in self.partials},
            "partials": [
                {"chunk": p.chunk_index, "service": p.parent_id, "start": p.start,
                 "end": p.end, "dec": p.dec}
                for p in self.partials
            ],
            "TEC": self.tec,
            "AgR": self.agr,
            "RemRE": self.rem_re,
            "ExtQ": self.ext_q,
            "utility": self.utility,
        }


@dataclass(frozen=True)
class ReliabilityProfile:
    owner_id: str
    eub: float
    successful_services_SS: int
    total_services_TPS: int

    def __post_init__(self):
        _check_fraction("eub", self.eub)
        if self.successful_services_SS < 0:
            raise ModelError("successful_services_SS", "must be non-negative")
        if self.successful_services_SS > self.total_services_TPS:
            raise ModelError(
                "successful_services_SS",
                f"{self.successful_services_SS} successes exceed "
                f"{self.total_services_TPS} provisions",
            )


RISK_BANDS: dict[str, tuple[float, ...]] = {
    "risk-taker": (0.1, 0.2, 0.3),
    "risk-neutral": (0.4, 0.5, 0.6),
    "risk-averse": (0.7, 0.8, 0.9),
}


@dataclass(frozen=True)
class PreferenceStrategy:
    """Energy/reliability weights with ``w_e + w_r == 1``."""

    w_e: float
    w_r: float

    def __post_init__(self):
        _check_fraction("w_e", self.w_e)
        _check_fraction("w_r", self.w_r)
        if not math.isclose(self.w_e + self.w_r, 1.0, abs_tol=1e-9):
            raise ModelError("w_r", f"weights must sum to 1, got {self.w_e} + {self.w_r}")

    @classmethod
    def from_reliability_weight(cls, w_r: float) -> "PreferenceStrategy":
        return cls(round(1.0 - w_r, 12), w_r)

    @classmethod
    def from_scale(cls, level: int) -> "PreferenceStrategy":
        """Map a 1..9 preference level onto ``w_r = level / 10``."""
        if not 1 <= level <= 9:
            raise ModelError("level", f"must be within 1..9, got {level}")
        return cls.from_reliability_weight(level / 10)


NEUTRAL = PreferenceStrategy(0.5, 0.5)


def _coerce(raw: Mapping[str, Any], name: str, kind, default=None):
    value = raw.get(name, default)
    if value is None or value == "":
        if default is not None:
            return default
        raise ModelError(name, "missing")
    try:
        if kind is int:
            number = float(value)
            if not number.is_integer():
                raise ModelError(name, f"expected integer minutes, got {value!r}")
            return int(number)
        return kind(value)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ModelError):
            raise
        raise ModelError(name, f"cannot parse {value!r}") from None


def validate_service(raw: Mapping[str, Any]) -> EnergyService:
    """Parse an external service record.

    Any ``dec_advertised`` present in ``raw`` is ignored and recomputed
    from the interval, intensity and transmission success rate.
    """
    return EnergyService(
        id=_coerce(raw, "id", str),
        owner_id=_coerce(raw, "owner_id", str),
        area_id=_coerce(raw, "area_id", str),
        start_time=_coerce(raw, "start_time", int),
        end_time=_coerce(raw, "end_time", int),
        intensity_I=_coerce(raw, "intensity_I", float),
        tsr=_coerce(raw, "tsr", float),
        reliability=_coerce(raw, "reliability", float, 1.0),
        functionalities=str(raw.get("functionalities") or ""),
    )


def validate_query(raw: Mapping[str, Any]) -> EnergyQuery:
    return EnergyQuery(
        query_id=_coerce(raw, "query_id", str),
        t_s=_coerce(raw, "t_s", int),
        area_id=_coerce(raw, "area_id", str),
        required_energy_RE=_coerce(raw, "required_energy_RE", float),
        max_intensity_CI=_coerce(raw, "max_intensity_CI", float),
        duration_du=_coerce(raw, "duration_du", int),
        hard_deadline_Dlh=_coerce(raw, "hard_deadline_Dlh", int),
    )
