"""Shared fixtures and independent oracles.

The oracles below deliberately avoid the package's own arithmetic: scores
are recomputed with exact fractions and fronts with a quadratic pairwise
check, so agreement is meaningful.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from crowdcharge import kernels
from crowdcharge.model import EnergyQuery, EnergyService
from crowdcharge.timeline import chunk_window, select_nearby


def svc(sid, start, end, intensity, tsr=1.0, rel=1.0, area="z"):
    return EnergyService(
        id=sid, owner_id=f"o{sid}", area_id=area, start_time=start, end_time=end,
        intensity_I=float(intensity), tsr=float(tsr), reliability=float(rel),
    )


def query(t_s=0, du=30, re=200.0, ci=1000.0, dlh=70, area="z", qid="q"):
    return EnergyQuery(
        query_id=qid, t_s=t_s, area_id=area, required_energy_RE=float(re),
        max_intensity_CI=float(ci), duration_du=du, hard_deadline_Dlh=dlh,
    )


# -- fixtures from hand-built layouts ------------------------------------------------


@pytest.fixture
def s1():
    """Two providers in a 30-minute window plus one provider afterwards."""
    services = [
        svc("A", 0, 30, 300, rel=0.9),
        svc("B", 10, 30, 600, rel=0.5),
        svc("P", 30, 90, 300, rel=0.8),
    ]
    return services, query()


def fig3_services():
    # boundaries 4, 8, 12, 16, 20, 25 inside [0, 30]
    return [
        svc("A", -10, 12, 300),
        svc("B", 0, 40, 200),
        svc("C", 4, 16, 500),
        svc("D", 8, 25, 400),
        svc("E", 20, 35, 350),
    ]


def reduction_services():
    """Six 10-minute chunks with four partials each; maxima B1 B1 X3 B1 B1 X6."""
    services = [
        svc("B1", -10, 70, 600, rel=0.6),
        svc("B2", -10, 70, 300, rel=0.7),
        svc("B3", -10, 70, 200, rel=0.8),
    ]
    for i in range(6):
        rate = 900 if i in (2, 5) else 100 + 10 * i
        services.append(svc(f"X{i + 1}", 10 * i, 10 * i + 10, rate, rel=0.3 + 0.1 * i))
    return services


# -- randomized instances --------------------------------------------------------------


def random_instance(rng: np.random.Generator, max_space: int = 5000):
    """A small area with a query, nearby providers and extension providers."""
    while True:
        du = int(rng.integers(15, 41))
        q = query(
            du=du,
            re=round(float(rng.uniform(50, 500)), 2),
            ci=5000.0,
            dlh=du + int(rng.integers(du // 2, du + 1)),
        )
        services = []
        for i in range(int(rng.integers(2, 8))):
            start = int(rng.integers(-10, du - 2))
            end = start + int(rng.integers(5, 40))
            services.append(svc(
                f"s{i}", start, end, round(float(rng.uniform(100, 2000)), 1),
                tsr=round(float(rng.uniform(0.7, 1.0)), 3), rel=round(float(rng.uniform(0, 1)), 3),
            ))
        for j in range(int(rng.integers(1, 4))):
            start = du + int(rng.integers(0, du // 2))
            services.append(svc(
                f"x{j}", start, start + int(rng.integers(10, 60)),
                round(float(rng.uniform(200, 2000)), 1), rel=0.5,
            ))
        tl = chunk_window(select_nearby(services, q), q)
        if select_nearby(services, q) and tl.search_space() <= max_space:
            return services, q, tl


# -- independent oracles -----------------------------------------------------------------


def exact_scores(partials, q, rate):
    """TEC, AgR, RemRE, ExtQ with exact fractions, straight from the definitions.

    ``partials`` is a sequence of ``(start, end, intensity, tsr, rel, idle)``.
    """
    F = Fraction
    decs = [F(e - s) / 60 * F(i) * F(t) for s, e, i, t, _, _ in partials]
    total = sum(decs)
    members = [(d, F(e - s), F(r)) for d, (s, e, _, _, r, idle) in zip(decs, partials) if not idle]
    weighted = sum((d / total) * (dur / q.duration_du) * r for d, dur, r in members)
    agr = weighted / len(members)
    rem = max(F(0), F(q.required_energy_RE) - total * agr)
    if rem == 0:
        ext = F(0)
    elif rate <= 0:
        ext = F(2 * q.duration_du)
    else:
        ext = rem / F(rate) * 60
    return float(total), float(agr), float(rem), float(ext)


def pairwise_front(cands):
    """Quadratic non-dominated filter on (min ExtQ, max AgR)."""
    out = []
    for c in cands:
        dominated = any(
            o.ext_q <= c.ext_q and o.agr >= c.agr and (o.ext_q < c.ext_q or o.agr > c.agr)
            for o in cands
        )
        if not dominated:
            out.append(c)
    return out


BACKEND_NAMES = sorted(kernels.BACKENDS)


@pytest.fixture(params=BACKEND_NAMES)
def backend(request):
    return request.param


# -- acceptance verdicts -------------------------------------------------------------

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")
