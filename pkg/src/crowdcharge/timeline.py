"""Candidate selection and temporal chunking of a query window."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .model import IDLE_ID, Chunk, EnergyQuery, EnergyService, PartialService, deliverable_energy

DEFAULT_MIN_LCH = 2


@dataclass(frozen=True)
class ChunkedTimeline:
    query_id: str
    chunks: tuple[Chunk, ...]
    partials_by_chunk: tuple[tuple[PartialService, ...], ...]
    services: tuple[EnergyService, ...] = ()

    @property
    def counts(self) -> tuple[int, ...]:
        return tuple(len(ps) for ps in self.partials_by_chunk)

    def search_space(self) -> int:
        """Number of one-partial-per-chunk compositions."""
        return math.prod(self.counts)

    def to_dict(self) -> dict:
        return {
            "query_id": self.query_id,
            "chunks": [
                {
                    "index": c.index,
                    "start": c.start,
                    "end": c.end,
                    "partials": [
                        {"service": p.parent_id, "start": p.start, "end": p.end, "dec": p.dec}
                        for p in ps
                    ],
                }
                for c, ps in zip(self.chunks, self.partials_by_chunk)
            ],
        }


def _overlaps(service: EnergyService, lo: int, hi: int) -> bool:
    return service.start_time < hi and service.end_time > lo


def select_nearby(services: Iterable[EnergyService], q: EnergyQuery) -> list[EnergyService]:
    """Services in the query's area, within its current limit, overlapping its window."""
    lo, hi = q.window
    nearby = [
        s for s in services
        if s.area_id == q.area_id and s.intensity_I <= q.max_intensity_CI and _overlaps(s, lo, hi)
    ]
    nearby.sort(key=lambda s: (s.start_time, s.id))
    return nearby


def _boundaries(services: Sequence[EnergyService], lo: int, hi: int, min_lch: int) -> list[int]:
    interior = sorted(
        {t for s in services for t in (s.start_time, s.end_time) if lo < t < hi}
    )
    kept = [lo]
    for t in interior:
        if t - kept[-1] >= min_lch:
            kept.append(t)
    # the closing edge is fixed, so a too-short tail drops the last interior point
    if len(kept) > 1 and hi - kept[-1] < min_lch:
        kept.pop()
    kept.append(hi)
    return kept


def _partials(services: Sequence[EnergyService], chunks: Sequence[Chunk]):
    by_chunk = []
    for chunk in chunks:
        ps = tuple(p for p in (PartialService.of(s, chunk) for s in services) if p is not None)
        by_chunk.append(ps or (PartialService.idle(chunk),))
    return tuple(by_chunk)


def _timeline(query_id: str, services, edges: Sequence[int]) -> ChunkedTimeline:
    chunks = tuple(Chunk(i, a, b) for i, (a, b) in enumerate(zip(edges, edges[1:])))
    return ChunkedTimeline(query_id, chunks, _partials(services, chunks), tuple(services))


def chunk_window(
    nearby: Sequence[EnergyService], q: EnergyQuery, min_lch: int = DEFAULT_MIN_LCH
) -> ChunkedTimeline:
    """Split ``[t_s, t_s + du]`` at every service start/end time inside it.

    Boundaries closer than ``min_lch`` to the previously kept one are
    dropped, so no chunk is shorter than ``min_lch`` unless the whole
    window is.
    """
    lo, hi = q.window
    return _timeline(q.query_id, nearby, _boundaries(nearby, lo, hi, min_lch))


def chunk_maximum(partials: Sequence[PartialService]) -> str:
    """Parent id of the highest-energy partial (smallest id on ties)."""
    best = min(partials, key=lambda p: (-p.dec, p.parent_id))
    return best.parent_id


def _interval_maximum(services: Sequence[EnergyService], a: int, b: int) -> str:
    best, best_key = IDLE_ID, None
    for s in services:
        start, end = max(s.start_time, a), min(s.end_time, b)
        if end <= start:
            continue
        key = (-deliverable_energy(start, end, s.intensity_I, s.tsr), s.id)
        if best_key is None or key < best_key:
            best, best_key = s.id, key
    return best


def merge_chunks_by_max(tl: ChunkedTimeline) -> ChunkedTimeline:
    """Merge neighbouring chunks whose best partial has the same parent, to fixpoint."""
    edges = [c.start for c in tl.chunks] + [tl.chunks[-1].end]
    maxima = [chunk_maximum(ps) for ps in tl.partials_by_chunk]
    changed = False
    while True:
        kept = [edges[0]]
        for i in range(1, len(maxima)):
            if maxima[i] == maxima[i - 1] and maxima[i] != IDLE_ID:
                continue
            kept.append(edges[i])
        kept.append(edges[-1])
        if len(kept) == len(edges):
            break
        changed = True
        edges = kept
        maxima = [_interval_maximum(tl.services, a, b) for a, b in zip(edges, edges[1:])]
    return _timeline(tl.query_id, tl.services, edges) if changed else tl
