"""Synthetic crowdsourced environments, failure injection and replay.

Environments follow the parameter ranges of a crowdsourced IoT energy
setting: queries last 5-120 minutes, services 10-60 minutes, services
provide 50-1000 mAh and queries require 100-800 mAh.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .model import CompositeService, EnergyQuery, EnergyService, ModelError
from .reliability import SocSeries, eub_from_soc, provision_success, reliability_score

FAILURE_EPSILON = 0.01
RELIABILITY_SOURCES = ("soc", "beta", "uniform")


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


def _range(name, value) -> tuple[float, float]:
    try:
        lo, hi = value
    except (TypeError, ValueError):
        raise ConfigError(name, f"expected a [low, high] pair, got {value!r}") from None
    if not (isinstance(lo, (int, float)) and isinstance(hi, (int, float))):
        raise ConfigError(name, "bounds must be numbers")
    if lo > hi:
        raise ConfigError(name, f"empty range [{lo}, {hi}]")
    return lo, hi


@dataclass(frozen=True)
class EnvironmentConfig:
    num_areas: int = 25
    num_queries: int = 100
    ratio_services_per_query: int = 3
    service_duration: tuple[int, int] = (10, 60)
    query_duration: tuple[int, int] = (5, 120)
    provided_energy: tuple[float, float] = (50.0, 1000.0)
    required_energy: tuple[float, float] = (100.0, 800.0)
    # hard deadline = du + Uniform(lo * du, hi * du)
    hard_deadline_extension: tuple[float, float] = (0.0, 1.0)
    tsr_range: tuple[float, float] = (0.7, 1.0)
    max_intensity: tuple[float, float] = (2000.0, 10000.0)
    # services start within [-lead, horizon]; queries within [0, horizon]
    horizon: int = 120
    service_lead: int = 30
    reliability_source: str = "soc"
    reliability_beta: tuple[float, float] = (4.0, 2.0)
    reliability_scores: tuple[float, ...] = ()
    seed: int = 0

    def __post_init__(self):
        for name in ("num_areas", "num_queries", "ratio_services_per_query", "horizon", "service_lead", "seed"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(name, f"expected an integer, got {value!r}")
        if self.num_areas < 1:
            raise ConfigError("num_areas", "need at least one area")
        if self.num_queries < 0:
            raise ConfigError("num_queries", "must be non-negative")
        if self.ratio_services_per_query < 1:
            raise ConfigError("ratio_services_per_query", "must be at least 1")
        for name in ("service_duration", "query_duration"):
            lo, hi = _range(name, getattr(self, name))
            if lo < 1 or lo != int(lo) or hi != int(hi):
                raise ConfigError(name, "durations are positive integer minutes")
        for name in ("provided_energy", "required_energy", "max_intensity"):
            lo, _ = _range(name, getattr(self, name))
            if lo <= 0:
                raise ConfigError(name, "lower bound must be positive")
        if len(self.reliability_beta) != 2 or min(self.reliability_beta) <= 0:
            raise ConfigError("reliability_beta", "expected two positive shape parameters")
        lo, hi = _range("hard_deadline_extension", self.hard_deadline_extension)
        if lo < 0:
            raise ConfigError("hard_deadline_extension", "must be non-negative")
        lo, hi = _range("tsr_range", self.tsr_range)
        if lo <= 0 or hi > 1:
            raise ConfigError("tsr_range", "must lie in (0, 1]")
        if self.horizon < 0:
            raise ConfigError("horizon", "must be non-negative")
        if self.reliability_source not in RELIABILITY_SOURCES:
            raise ConfigError("reliability_source", f"one of {RELIABILITY_SOURCES}")
        if any(not 0 <= r <= 1 for r in self.reliability_scores):
            raise ConfigError("reliability_scores", "scores must lie in [0, 1]")

    @classmethod
    def from_dict(cls, raw: Mapping) -> "EnvironmentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown configuration field")
        values = {}
        for key, value in raw.items():
            values[key] = tuple(value) if isinstance(value, list) else value
        return cls(**values)

    @classmethod
    def load(cls, path) -> "EnvironmentConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(str(path), f"invalid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError(str(path), "expected a JSON object")
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}


@dataclass(frozen=True)
class Environment:
    services: tuple[EnergyService, ...]
    queries: tuple[EnergyQuery, ...]

    def by_area(self) -> dict[str, list[EnergyService]]:
        areas: dict[str, list[EnergyService]] = {}
        for s in self.services:
            areas.setdefault(s.area_id, []).append(s)
        return areas

    def summary(self) -> dict:
        return {
            "services": len(self.services),
            "queries": len(self.queries),
            "areas_with_queries": len({q.area_id for q in self.queries}),
        }


def _synthetic_reliability(rng: np.random.Generator, samples: int = 48) -> float:
    """Usage regularity from a synthetic SoC trace times provision success.

    Each step discharges at a steady rate with probability ``regularity``
    and at a random rate otherwise.
    """
    regularity = rng.uniform(0.0, 1.0)
    steady = rng.uniform(0.005, 0.02)
    irregular = rng.random(samples - 1) >= regularity
    drops = np.where(irregular, rng.uniform(0.0, 3 * steady, samples - 1), steady)
    level = np.concatenate(([1.0], 1.0 - np.cumsum(drops)))
    span = level.max() - level.min()
    soc = (level - level.min()) / span if span > 0 else np.full(samples, 0.5)
    series = SocSeries("", tuple(zip(range(0, 30 * samples, 30), soc.tolist())))
    eub = eub_from_soc(series)
    tps = int(rng.integers(0, 31))
    ss = int(rng.binomial(tps, rng.beta(8.0, 2.0))) if tps else 0
    return reliability_score(eub, provision_success(ss, tps))


def _draw_reliability(cfg: EnvironmentConfig, rng: np.random.Generator) -> float:
    if cfg.reliability_scores:
        return float(cfg.reliability_scores[int(rng.integers(len(cfg.reliability_scores)))])
    if cfg.reliability_source == "soc":
        return _synthetic_reliability(rng)
    if cfg.reliability_source == "beta":
        return float(rng.beta(*cfg.reliability_beta))
    return float(rng.uniform(0.0, 1.0))


def generate_environment(cfg: EnvironmentConfig) -> Environment:
    """Sample queries and services area by area; deterministic per ``cfg.seed``.

    Queries are spread uniformly over ``num_areas``; every area with ``n``
    queries receives ``ratio * n`` services.
    """
    rng = np.random.default_rng(cfg.seed)
    areas = rng.integers(0, cfg.num_areas, size=cfg.num_queries)
    width = len(str(max(cfg.num_queries, 1) * cfg.ratio_services_per_query))
    services: list[EnergyService] = []
    queries: list[EnergyQuery] = []
    for area in np.unique(areas):
        area_id = f"a{int(area):04d}"
        n_q = int((areas == area).sum())
        for _ in range(n_q):
            du = int(rng.integers(cfg.query_duration[0], cfg.query_duration[1] + 1))
            ext_lo, ext_hi = cfg.hard_deadline_extension
            dlh = du + int(round(rng.uniform(ext_lo * du, ext_hi * du)))
            queries.append(EnergyQuery(
                query_id=f"q{len(queries):0{width}d}",
                t_s=int(rng.integers(0, cfg.horizon + 1)),
                area_id=area_id,
                required_energy_RE=round(float(rng.uniform(*cfg.required_energy)), 2),
                max_intensity_CI=round(float(rng.uniform(*cfg.max_intensity)), 2),
                duration_du=du,
                hard_deadline_Dlh=dlh,
            ))
        for _ in range(n_q * cfg.ratio_services_per_query):
            dur = int(rng.integers(cfg.service_duration[0], cfg.service_duration[1] + 1))
            start = int(rng.integers(-cfg.service_lead, cfg.horizon + 1))
            energy = float(rng.uniform(*cfg.provided_energy))
            tsr = round(float(rng.uniform(*cfg.tsr_range)), 4)
            sid = f"s{len(services):0{width}d}"
            services.append(EnergyService(
                id=sid,
                owner_id=f"o{sid[1:]}",
                area_id=area_id,
                start_time=start,
                end_time=start + dur,
                intensity_I=energy * 60 / (dur * tsr),
                tsr=tsr,
                reliability=round(_draw_reliability(cfg, rng), 6),
            ))
    return Environment(tuple(services), tuple(queries))


# -- failures -----------------------------------------------------------------


@dataclass(frozen=True)
class FailureScenario:
    revoked: frozenset[str]
    failure_count: int
    per_area: Mapping[str, int] = field(default_factory=dict)


def failure_keys(services: Sequence[EnergyService], bias: float, seed: int,
                 eps: float = FAILURE_EPSILON) -> np.ndarray:
    """Weighted-sampling keys ``u ** (1 / w)`` with ``w = ((1 - rel) + eps) ** bias``.

    Taking the ``count`` largest keys per area draws ``count`` services
    without replacement with probability proportional to ``w``. Keys depend
    only on the seed, so larger counts revoke supersets of smaller ones.
    """
    rng = np.random.default_rng(seed)
    u = rng.random(len(services))
    w = np.array([((1.0 - s.reliability) + eps) ** bias for s in services])
    return np.log(u) / w


def inject_failures(
    services: Sequence[EnergyService], count: int, bias: float = 1.0, seed: int = 0,
    eps: float = FAILURE_EPSILON,
) -> FailureScenario:
    """Revoke ``count`` services per area, favouring low reliability.

    Areas with fewer than ``count`` services lose all of them.
    """
    if count < 0:
        raise ValueError("failure count must be non-negative")
    if count == 0 or not services:
        return FailureScenario(frozenset(), count, {})
    keys = failure_keys(services, bias, seed, eps)
    by_area: dict[str, list[int]] = {}
    for i, s in enumerate(services):
        by_area.setdefault(s.area_id, []).append(i)
    revoked = set()
    per_area = {}
    for area, idx in sorted(by_area.items()):
        ranked = sorted(idx, key=lambda i: (-keys[i], services[i].id))
        picked = ranked[:count]
        revoked.update(services[i].id for i in picked)
        per_area[area] = len(picked)
    return FailureScenario(frozenset(revoked), count, per_area)


# -- replay -----------------------------------------------------------------------


def replacement_order(candidates: Iterable[EnergyService], from_time: int) -> list[EnergyService]:
    """Earliest availability first, then larger capacity, then id."""
    return sorted(
        candidates,
        key=lambda s: (max(s.start_time, from_time), -s.dec_advertised, s.id),
    )


REPLACEMENT_POLICIES = {"availability": replacement_order}


def effective_extension(
    selected: CompositeService,
    scenario: FailureScenario,
    q: EnergyQuery,
    services: Iterable[EnergyService],
    policy: str = "availability",
) -> float:
    """Actual minutes past the soft deadline needed to collect ``RE``.

    Revoked members deliver nothing. The shortfall is then covered one
    provider at a time from services of the area that are neither revoked
    nor part of ``selected``. Returns ``2 * du`` when the shortfall cannot
    be covered by ``t_s + 2 du``.
    """
    delivered = sum(p.dec for p in selected.partials if p.parent_id not in scenario.revoked)
    deficit = q.required_energy_RE - delivered
    if deficit <= 0:
        return 0.0
    soft, limit = q.extension_window
    used = set(selected.ids)
    pool = [
        s for s in services
        if s.area_id == q.area_id and s.id not in scenario.revoked and s.id not in used
        and s.start_time < limit and s.end_time > soft
    ]
    now = float(soft)
    for s in REPLACEMENT_POLICIES[policy](pool, soft):
        begin = max(now, s.start_time)
        end = min(s.end_time, limit)
        if end <= begin or s.rate <= 0:
            continue
        need = deficit / s.rate * 60.0
        if need <= end - begin:
            return begin + need - soft
        deficit -= (end - begin) / 60 * s.rate
        now = end
    return float(2 * q.duration_du)


def exer_flag(ext_q: float, eff_q: float, q: EnergyQuery) -> bool:
    """Expected extension within the budget, actual extension beyond it."""
    budget = q.extension_budget
    return ext_q <= budget and eff_q > budget


def exer_ratio(rows: Sequence[Mapping]) -> float:
    """Share of rows whose ``exer`` flag is set."""
    if not rows:
        raise ValueError("EXER ratio is undefined for zero queries")
    return sum(1 for r in rows if r["exer"]) / len(rows)
