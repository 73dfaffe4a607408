"""Multi-objective selection of composite energy services.

Candidates are scored on (AgR, ExtQ); AgR is maximized and ExtQ
minimized. ``compose_brute`` searches the full product of per-chunk
partials, ``compose_heuristic`` first merges chunks and keeps the top-k
partials per chunk. ``compose_greedy`` / ``compose_knapsack`` are the
single-answer baselines.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import kernels
from .assessment import UndefinedAggregate, assess, pool_rate
from .model import (
    NEUTRAL,
    CompositeService,
    EnergyQuery,
    EnergyService,
    PartialService,
    PreferenceStrategy,
)
from .timeline import ChunkedTimeline, merge_chunks_by_max

DEFAULT_CAP = 10**7
DEFAULT_K = 3


class SearchSpaceOverflow(RuntimeError):
    def __init__(self, count: int, cap: int):
        super().__init__(f"search space of {count} compositions exceeds cap {cap}")
        self.count = count
        self.cap = cap


class NoFeasibleComposition(RuntimeError):
    """Raised when constraints eliminate every candidate.

    ``nearest`` is the lowest-ExtQ candidate that was assessed, if any.
    """

    def __init__(self, message: str, nearest: CompositeService | None = None):
        super().__init__(message)
        self.nearest = nearest


@dataclass(frozen=True)
class ParetoFront:
    members: tuple[CompositeService, ...] = ()

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


@dataclass(frozen=True)
class CompositionResult:
    algorithm: str
    selected: CompositeService
    front: ParetoFront | None
    candidates_examined: int
    elapsed: float = field(default=0.0, compare=False)

    def to_dict(self) -> dict:
        out = {"algorithm": self.algorithm, "selected": self.selected.to_dict()}
        if self.front is not None:
            out["front"] = [m.to_dict() for m in self.front]
        out["candidates_examined"] = self.candidates_examined
        out["elapsed_ms"] = round(self.elapsed * 1000, 3)
        return out


def enumerate_all(tl: ChunkedTimeline, cap: int = DEFAULT_CAP) -> Iterator[CompositeService]:
    """Lazily yield every one-partial-per-chunk composition."""
    count = tl.search_space()
    if count > cap:
        raise SearchSpaceOverflow(count, cap)
    for combo in itertools.product(*tl.partials_by_chunk):
        yield CompositeService(combo)


def dominates(a: CompositeService, b: CompositeService) -> bool:
    if a.agr < b.agr or a.ext_q > b.ext_q:
        return False
    return a.agr > b.agr or a.ext_q < b.ext_q


def _ordered(members: Iterable[CompositeService]) -> tuple[CompositeService, ...]:
    return tuple(sorted(members, key=CompositeService.sort_key))


def pareto_front(cands: Sequence[CompositeService]) -> ParetoFront:
    """Non-dominated subset of assessed candidates (identical scores all kept)."""
    ordered = _ordered(cands)
    kept = []
    best_agr = -np.inf
    best_ext = None
    for c in ordered:
        if c.agr > best_agr:
            kept.append(c)
            best_agr, best_ext = c.agr, c.ext_q
        elif c.agr == best_agr and c.ext_q == best_ext:
            kept.append(c)
    return ParetoFront(tuple(kept))


def apply_constraints(cands: Sequence[CompositeService], q: EnergyQuery) -> list[CompositeService]:
    """Keep candidates within the extension budget, and if any candidate
    meets the energy requirement, only those that do."""
    if not cands:
        raise NoFeasibleComposition(f"query {q.query_id}: no candidate compositions")
    budget = q.extension_budget
    within = [c for c in cands if c.ext_q <= budget]
    if not within:
        nearest = min(cands, key=lambda c: (c.ext_q, -c.agr))
        raise NoFeasibleComposition(
            f"query {q.query_id}: every candidate exceeds the extension budget of {budget} min",
            nearest,
        )
    enough = [c for c in within if c.tec >= q.required_energy_RE]
    return enough or within


def utility(comp: CompositeService, strategy: PreferenceStrategy, cohort: Sequence[CompositeService]) -> float:
    """Weighted sum of min-max normalized TEC (over ``cohort``) and AgR."""
    tecs = [c.tec for c in cohort]
    lo, hi = min(tecs), max(tecs)
    norm = 1.0 if hi == lo else (comp.tec - lo) / (hi - lo)
    return strategy.w_e * norm + strategy.w_r * comp.agr


def select(front: Sequence[CompositeService], strategy: PreferenceStrategy) -> CompositeService:
    """Utility argmax; ties go to lower ExtQ, higher AgR, then member ids."""
    scored = [replace(c, utility=utility(c, strategy, front)) for c in front]
    return min(scored, key=lambda c: (-c.utility, c.ext_q, -c.agr, c.ids))


# -- scan-kernel plumbing ---------------------------------------------------


def _kernel_inputs(tl: ChunkedTimeline):
    flat = [p for ps in tl.partials_by_chunk for p in ps]
    a = np.array([p.dec for p in flat], dtype=np.float64)
    b = np.array([p.dec * p.duration * p.reliability for p in flat], dtype=np.float64)
    c = np.array([p.dec * p.duration for p in flat], dtype=np.float64)
    real = np.array([0.0 if p.is_idle else 1.0 for p in flat], dtype=np.float64)
    return a, b, c, real, np.array(tl.counts, dtype=np.int64)


def _decode(tl: ChunkedTimeline, index: int) -> CompositeService:
    picks = []
    for ps in reversed(tl.partials_by_chunk):
        index, digit = divmod(index, len(ps))
        picks.append(ps[digit])
    return CompositeService(tuple(reversed(picks)))


@dataclass(frozen=True)
class ScanOutcome:
    examined: int
    front: ParetoFront


def scan_front(
    tl: ChunkedTimeline,
    q: EnergyQuery,
    rate: float,
    *,
    variant: str = "paper",
    cap: int = DEFAULT_CAP,
    backend: str | None = None,
) -> ScanOutcome:
    """Assess every composition of ``tl``, apply the constraints, and return
    the Pareto front. Equivalent to enumerate/assess/apply_constraints/
    pareto_front, but streamed through the scan kernel."""
    count = tl.search_space()
    if count > cap:
        raise SearchSpaceOverflow(count, cap)
    scan = kernels.get_scan(backend)
    examined, valid, strict, relaxed, nearest = scan(
        *_kernel_inputs(tl),
        float(q.required_energy_RE), float(q.duration_du), float(rate),
        float(2 * q.duration_du), float(q.extension_budget), variant == "normalized",
    )
    chosen = strict if len(strict) else relaxed
    if not len(chosen):
        near = assess(_decode(tl, nearest), q, rate, variant) if nearest >= 0 else None
        if valid == 0:
            msg = f"query {q.query_id}: no composition delivers any energy"
        else:
            msg = f"query {q.query_id}: every candidate exceeds the extension budget of {q.extension_budget} min"
        raise NoFeasibleComposition(msg, near)
    members = [assess(_decode(tl, int(i)), q, rate, variant) for i in chosen]
    return ScanOutcome(examined, ParetoFront(_ordered(members)))


# -- algorithms -------------------------------------------------------------


def _rate(pool) -> float:
    return pool if isinstance(pool, float) else pool_rate(pool)


def compose_brute(
    tl: ChunkedTimeline,
    q: EnergyQuery,
    pool: Sequence[EnergyService] | float,
    strategy: PreferenceStrategy = NEUTRAL,
    *,
    variant: str = "paper",
    cap: int = DEFAULT_CAP,
    backend: str | None = None,
) -> CompositionResult:
    """Exact front over all compositions, then the utility argmax.

    ``pool`` is the extension pool or its precomputed mean rate.
    """
    t0 = time.perf_counter()
    outcome = scan_front(tl, q, _rate(pool), variant=variant, cap=cap, backend=backend)
    chosen = select(outcome.front.members, strategy)
    return CompositionResult(
        "brute", chosen, outcome.front, outcome.examined, time.perf_counter() - t0
    )


def _partial_front(ps: Sequence[PartialService]) -> list[PartialService]:
    """Partials not dominated in (dec, reliability)."""
    return [
        p for p in ps
        if not any(
            o.dec >= p.dec and o.reliability >= p.reliability
            and (o.dec > p.dec or o.reliability > p.reliability)
            for o in ps
        )
    ]


def top_k_partials(
    ps: Sequence[PartialService], k: int, strategy: PreferenceStrategy
) -> tuple[PartialService, ...]:
    """Rank a chunk's partials by utility and keep ``k`` of them.

    Utility uses dec min-max normalized within the chunk. Non-dominated
    partials are kept first; if there are more than ``k`` of them the
    highest-utility ones win.
    """
    if len(ps) <= k:
        return tuple(ps)
    decs = [p.dec for p in ps]
    lo, hi = min(decs), max(decs)

    def u(p):
        norm = 1.0 if hi == lo else (p.dec - lo) / (hi - lo)
        return strategy.w_e * norm + strategy.w_r * p.reliability

    rank = lambda p: (-u(p), -p.dec, p.parent_id)  # noqa: E731
    front = sorted(_partial_front(ps), key=rank)
    if len(front) >= k:
        return tuple(front[:k])
    rest = sorted((p for p in ps if p not in front), key=rank)
    return tuple(sorted(front + rest[: k - len(front)], key=rank))


def reduce_space(tl: ChunkedTimeline, k: int, strategy: PreferenceStrategy) -> ChunkedTimeline:
    """Merged chunks with only the top-k partials each; its product is PromComp."""
    if k < 1:
        raise ValueError("k must be at least 1")
    merged = merge_chunks_by_max(tl)
    kept = tuple(top_k_partials(ps, k, strategy) for ps in merged.partials_by_chunk)
    return replace(merged, partials_by_chunk=kept)


def compose_heuristic(
    tl: ChunkedTimeline,
    q: EnergyQuery,
    pool: Sequence[EnergyService] | float,
    k: int = DEFAULT_K,
    strategy: PreferenceStrategy = NEUTRAL,
    *,
    variant: str = "paper",
    cap: int = DEFAULT_CAP,
    backend: str | None = None,
) -> CompositionResult:
    t0 = time.perf_counter()
    reduced = reduce_space(tl, k, strategy)
    outcome = scan_front(reduced, q, _rate(pool), variant=variant, cap=cap, backend=backend)
    chosen = select(outcome.front.members, strategy)
    return CompositionResult(
        "heuristic", chosen, outcome.front, outcome.examined, time.perf_counter() - t0
    )


def _max_energy_pick(
    tl: ChunkedTimeline, q: EnergyQuery, rate: float, strategy: PreferenceStrategy, variant: str
) -> CompositeService:
    picks = tuple(min(ps, key=lambda p: (-p.dec, p.parent_id)) for ps in tl.partials_by_chunk)
    try:
        comp = assess(CompositeService(picks), q, rate, variant)
    except UndefinedAggregate:
        raise NoFeasibleComposition(f"query {q.query_id}: no energy available in the window") from None
    return replace(comp, utility=utility(comp, strategy, [comp]))


def compose_greedy(
    tl: ChunkedTimeline,
    q: EnergyQuery,
    pool: Sequence[EnergyService] | float = 0.0,
    strategy: PreferenceStrategy = NEUTRAL,
    *,
    variant: str = "paper",
) -> CompositionResult:
    """Highest-energy partial in every chunk, chosen independently."""
    t0 = time.perf_counter()
    comp = _max_energy_pick(tl, q, _rate(pool), strategy, variant)
    return CompositionResult("greedy", comp, None, len(tl.chunks), time.perf_counter() - t0)


def compose_knapsack(
    tl: ChunkedTimeline,
    q: EnergyQuery,
    pool: Sequence[EnergyService] | float = 0.0,
    strategy: PreferenceStrategy = NEUTRAL,
    *,
    variant: str = "paper",
) -> CompositionResult:
    """Temporal-knapsack baseline: max-energy partial per unmerged chunk."""
    t0 = time.perf_counter()
    comp = _max_energy_pick(tl, q, _rate(pool), strategy, variant)
    return CompositionResult("knapsack", comp, None, len(tl.chunks), time.perf_counter() - t0)


ALGORITHMS = ("brute", "heuristic", "greedy", "knapsack")
