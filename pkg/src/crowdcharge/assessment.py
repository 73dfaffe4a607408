"""Scores of a composite: TEC, AgR, RemRE and the expected extension ExtQ.

The arithmetic here is mirrored operation for operation by the scan
kernels (``_pykernel`` / ``_ckernel``), so both paths produce bitwise
identical scores. Keep them in step when editing either.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Iterable, Sequence

from .model import CompositeService, EnergyQuery, EnergyService, PartialService, deliverable_energy

AGR_VARIANTS = ("paper", "normalized")


class UndefinedAggregate(ValueError):
    """AgR of a composite that delivers no energy."""


def dec_of_partial(ps: PartialService) -> float:
    return deliverable_energy(ps.start, ps.end, ps.intensity_I, ps.tsr)


def tec(comp: CompositeService) -> float:
    return sum(p.dec for p in comp.partials)


def agr(comp: CompositeService, q: EnergyQuery, variant: str = "paper") -> float:
    """Energy- and time-weighted mean reliability of the non-idle members.

    ``paper`` keeps the ``1/m`` factor on top of the fractional weights;
    ``normalized`` divides by the sum of weights instead.
    """
    total = tec(comp)
    if total <= 0:
        raise UndefinedAggregate("composite delivers no energy")
    members = comp.members
    weighted = sum(p.dec * p.duration * p.reliability for p in members)
    if variant == "paper":
        return weighted / (len(members) * total * q.duration_du)
    if variant == "normalized":
        return weighted / sum(p.dec * p.duration for p in members)
    raise ValueError(f"unknown AgR variant {variant!r}")


def remaining_energy(required: float, total: float, aggregate: float) -> float:
    return max(0.0, required - total * aggregate)


def rem_re(comp: CompositeService, q: EnergyQuery, variant: str = "paper") -> float:
    total = tec(comp)
    if total <= 0:
        return q.required_energy_RE
    return remaining_energy(q.required_energy_RE, total, agr(comp, q, variant))


def extension_pool(services: Iterable[EnergyService], q: EnergyQuery) -> list[EnergyService]:
    """Services of the query's area overlapping ``[t_s + du, t_s + 2 du]``."""
    lo, hi = q.extension_window
    return [
        s for s in services
        if s.area_id == q.area_id and s.start_time < hi and s.end_time > lo
    ]


def pool_rate(pool: Sequence[EnergyService]) -> float:
    """Mean intensity times mean success rate; 0.0 for an empty pool."""
    if not pool:
        return 0.0
    n = len(pool)
    return (sum(s.intensity_I for s in pool) / n) * (sum(s.tsr for s in pool) / n)


def extension_minutes(remaining: float, rate: float, q: EnergyQuery) -> float:
    if remaining == 0.0:
        return 0.0
    if rate <= 0.0:
        return float(2 * q.duration_du)
    return remaining / rate * 60.0


def ext_q(
    comp: CompositeService, q: EnergyQuery, pool: Sequence[EnergyService], variant: str = "paper"
) -> float:
    """Minutes past the soft deadline needed to collect the remaining energy.

    An empty pool yields ``2 * du``, the largest tolerated extension.
    """
    return extension_minutes(rem_re(comp, q, variant), pool_rate(pool), q)


def assess(
    comp: CompositeService, q: EnergyQuery, rate: float, variant: str = "paper"
) -> CompositeService:
    """Fill in TEC/AgR/RemRE/ExtQ given the extension pool's mean rate."""
    total = tec(comp)
    aggregate = agr(comp, q, variant)
    remaining = remaining_energy(q.required_energy_RE, total, aggregate)
    return replace(
        comp,
        tec=total,
        agr=aggregate,
        rem_re=remaining,
        ext_q=extension_minutes(remaining, rate, q),
    )
