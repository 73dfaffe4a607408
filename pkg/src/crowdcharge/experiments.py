"""Seeded experiment suites: scalability, efficiency and effectiveness.

Every suite returns an :class:`ExperimentReport` of per-query rows plus
aggregate rows. Timing values live only in columns ending in ``_ms`` so
reports can be compared byte for byte with those columns dropped.
"""

from __future__ import annotations

import csv
import json
import logging
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .assessment import extension_pool, pool_rate
from .composer import (
    DEFAULT_CAP,
    DEFAULT_K,
    CompositionResult,
    NoFeasibleComposition,
    SearchSpaceOverflow,
    compose_greedy,
    compose_heuristic,
    compose_knapsack,
    scan_front,
    select,
    utility,
)
from .model import RISK_BANDS, CompositeService, EnergyQuery, EnergyService, PreferenceStrategy
from .simulator import (
    EnvironmentConfig,
    effective_extension,
    exer_flag,
    generate_environment,
    inject_failures,
)
from .timeline import DEFAULT_MIN_LCH, chunk_window, select_nearby

log = logging.getLogger(__name__)

SUITES = ("scalability", "efficiency", "effectiveness")
ALGORITHMS = ("brute", "heuristic", "greedy", "knapsack")
ELASTIC = ("brute", "heuristic")
REGIMES = {"short": (10, 30), "long": (20, 50), "all": (10, 60)}
WEIGHT_SWEEP = tuple(round(0.1 * i, 1) for i in range(1, 10))


@dataclass(frozen=True)
class SolverOptions:
    k: int = DEFAULT_K
    min_lch: int = DEFAULT_MIN_LCH
    cap: int = DEFAULT_CAP
    variant: str = "paper"
    backend: str | None = None


@dataclass(frozen=True)
class Outcome:
    algorithm: str
    w_r: float
    status: str
    result: CompositionResult | None
    cpu_s: float


@dataclass
class ExperimentReport:
    suite: str
    columns: tuple[str, ...]
    rows: list[list]
    aggregate_columns: tuple[str, ...]
    aggregates: list[list]
    meta: dict = field(default_factory=dict)

    def records(self) -> list[dict]:
        return [dict(zip(self.columns, r)) for r in self.rows]

    def aggregate_records(self) -> list[dict]:
        return [dict(zip(self.aggregate_columns, r)) for r in self.aggregates]

    @property
    def failure_rate(self) -> float:
        status = self.columns.index("status")
        if not self.rows:
            return 0.0
        return sum(1 for r in self.rows if r[status] != "ok") / len(self.rows)

    def summary(self) -> dict:
        return {
            "suite": self.suite,
            "rows": len(self.rows),
            "failure_rate": round(self.failure_rate, 6),
            "meta": self.meta,
            "aggregates": self.aggregate_records(),
        }


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(round(value, 9))
    if isinstance(value, bool):
        return "1" if value else "0"
    return "" if value is None else str(value)


def _write_table(path: Path, columns, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_report(report: ExperimentReport, out_dir) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "report": out / "report.csv",
        "aggregate": out / "aggregate.csv",
        "summary": out / "summary.json",
    }
    _write_table(paths["report"], report.columns, report.rows)
    _write_table(paths["aggregate"], report.aggregate_columns, report.aggregates)
    paths["summary"].write_text(json.dumps(report.summary(), indent=1, sort_keys=True) + "\n")
    return paths


# -- per-query solving ------------------------------------------------------------


def _strategy(w_r: float) -> PreferenceStrategy:
    return PreferenceStrategy.from_reliability_weight(w_r)


def solve_query(
    q: EnergyQuery,
    area_services: Sequence[EnergyService],
    algorithms: Sequence[str],
    weights: Sequence[float],
    opts: SolverOptions = SolverOptions(),
) -> list[Outcome]:
    """Compose ``q`` with every algorithm under every reliability weight.

    The brute-force front does not depend on the weights, so it is scanned
    once and only the final selection is repeated.
    """
    c0 = time.process_time()
    nearby = select_nearby(area_services, q)
    tl = chunk_window(nearby, q, opts.min_lch)
    rate = pool_rate(extension_pool(area_services, q))
    setup = time.process_time() - c0

    out: list[Outcome] = []

    def failed(algo, exc, cpu, ws=weights):
        status = "overflow" if isinstance(exc, SearchSpaceOverflow) else "infeasible"
        return [Outcome(algo, w, status, None, cpu) for w in ws]

    for algo in algorithms:
        c0 = time.process_time()
        try:
            if algo == "brute":
                scanned = scan_front(
                    tl, q, rate, variant=opts.variant, cap=opts.cap, backend=opts.backend
                )
                base = time.process_time() - c0
                for w in weights:
                    c1 = time.process_time()
                    chosen = select(scanned.front.members, _strategy(w))
                    cpu = setup + base + time.process_time() - c1
                    res = CompositionResult("brute", chosen, scanned.front, scanned.examined, cpu)
                    out.append(Outcome(algo, w, "ok", res, cpu))
            elif algo == "heuristic":
                for w in weights:
                    c1 = time.process_time()
                    try:
                        res = compose_heuristic(
                            tl, q, rate, opts.k, _strategy(w),
                            variant=opts.variant, cap=opts.cap, backend=opts.backend,
                        )
                        cpu = setup + time.process_time() - c1
                        out.append(Outcome(algo, w, "ok", res, cpu))
                    except (NoFeasibleComposition, SearchSpaceOverflow) as exc:
                        out.extend(failed(algo, exc, setup + time.process_time() - c1, (w,)))
            elif algo in ("greedy", "knapsack"):
                fn = compose_greedy if algo == "greedy" else compose_knapsack
                res = fn(tl, q, rate, variant=opts.variant)
                cpu = setup + time.process_time() - c0
                for w in weights:
                    sel = replace(res.selected, utility=utility(res.selected, _strategy(w), [res.selected]))
                    out.append(Outcome(algo, w, "ok", replace(res, selected=sel), cpu))
            else:
                raise ValueError(f"unknown algorithm {algo!r}")
        except (NoFeasibleComposition, SearchSpaceOverflow) as exc:
            out.extend(failed(algo, exc, setup + time.process_time() - c0))
    return out


def _solve_task(task):
    return solve_query(*task)


def _run_tasks(tasks: list, jobs: int) -> list:
    if jobs <= 1 or len(tasks) < 2:
        return [_solve_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_solve_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def _area_index(services: Iterable[EnergyService]) -> dict[str, tuple[EnergyService, ...]]:
    areas: dict[str, list[EnergyService]] = {}
    for s in services:
        areas.setdefault(s.area_id, []).append(s)
    return {a: tuple(v) for a, v in areas.items()}


def query_stream(seed: int, query_index: int) -> np.random.Generator:
    """Per-query generator, independent of scheduling order."""
    return np.random.default_rng([seed, query_index])


def band_weights(seed: int, query_index: int, strategies: Sequence[str]) -> list[float]:
    rng = query_stream(seed, query_index)
    return [float(rng.choice(RISK_BANDS[name])) for name in strategies]


def _mean(xs):
    return statistics.fmean(xs) if xs else None


def _median(xs):
    return statistics.median(xs) if xs else None


def paired_rows(
    records: Sequence[dict], algorithms: Sequence[str], keys: Sequence[str]
) -> list[dict[str, dict]]:
    """Group report records by ``keys`` and keep groups every algorithm solved.

    Brute force overflows on large instances, so comparisons between
    algorithms are only fair on the queries they all answered.
    """
    groups: dict[tuple, dict[str, dict]] = {}
    for r in records:
        if r["algorithm"] in algorithms:
            groups.setdefault(tuple(r[k] for k in keys), {})[r["algorithm"]] = r
    return [
        g for _, g in sorted(groups.items())
        if all(a in g and g[a]["status"] == "ok" for a in algorithms)
    ]


# -- suites -------------------------------------------------------------------------


def run_scalability(
    cfg: EnvironmentConfig,
    algorithms: Sequence[str] = ALGORITHMS,
    ratios: Sequence[int] = tuple(range(1, 10)),
    regimes: dict[str, tuple[int, int]] = REGIMES,
    seeds: Sequence[int] = (0,),
    opts: SolverOptions = SolverOptions(),
    jobs: int = 1,
) -> ExperimentReport:
    columns = ("regime", "ratio", "seed", "query_id", "algorithm", "status",
               "candidates", "services", "cpu_ms")
    rows = []
    for regime, durations in regimes.items():
        for ratio in ratios:
            for seed in seeds:
                env = generate_environment(replace(
                    cfg, ratio_services_per_query=ratio, service_duration=durations, seed=seed
                ))
                areas = _area_index(env.services)
                tasks = [(q, areas.get(q.area_id, ()), algorithms, (0.5,), opts) for q in env.queries]
                for q, outcomes in zip(env.queries, _run_tasks(tasks, jobs)):
                    for o in outcomes:
                        cands = o.result.candidates_examined if o.result else None
                        rows.append([regime, ratio, seed, q.query_id, o.algorithm, o.status,
                                     cands, len(env.services), o.cpu_s * 1000])
    agg_cols = ("algorithm", "regime", "ratio", "queries", "ok", "mean_candidates",
                "mean_cpu_ms", "total_cpu_ms")
    aggregates = []
    for algo in algorithms:
        for regime in regimes:
            for ratio in ratios:
                sel = [r for r in rows if r[4] == algo and r[0] == regime and r[1] == ratio]
                ok = [r for r in sel if r[5] == "ok"]
                aggregates.append([
                    algo, regime, ratio, len(sel), len(ok),
                    _mean([r[6] for r in ok]),
                    _mean([r[8] for r in ok]),
                    sum(r[8] for r in ok),
                ])
    return ExperimentReport("scalability", columns, rows, agg_cols, aggregates,
                            {"ratios": list(ratios), "regimes": {k: list(v) for k, v in regimes.items()}})


def run_efficiency(
    cfg: EnvironmentConfig,
    algorithms: Sequence[str] = ALGORITHMS,
    weights: Sequence[float] = WEIGHT_SWEEP,
    ratios: Sequence[int] | None = None,
    seeds: Sequence[int] = (0,),
    opts: SolverOptions = SolverOptions(),
    jobs: int = 1,
) -> ExperimentReport:
    ratios = tuple(ratios or (cfg.ratio_services_per_query,))
    columns = ("ratio", "seed", "w_r", "query_id", "algorithm", "status", "front_size",
               "tec", "agr", "ext_q", "cpu_ms")
    rows = []
    for ratio in ratios:
        for seed in seeds:
            env = generate_environment(replace(cfg, ratio_services_per_query=ratio, seed=seed))
            areas = _area_index(env.services)
            tasks = [(q, areas.get(q.area_id, ()), algorithms, tuple(weights), opts) for q in env.queries]
            for q, outcomes in zip(env.queries, _run_tasks(tasks, jobs)):
                for o in outcomes:
                    r = o.result
                    front = len(r.front) if r is not None and r.front is not None else None
                    sel = r.selected if r is not None else None
                    rows.append([
                        ratio, seed, o.w_r, q.query_id, o.algorithm, o.status, front,
                        sel.tec if sel else None, sel.agr if sel else None,
                        sel.ext_q if sel else None, o.cpu_s * 1000,
                    ])
    agg_cols = ("algorithm", "ratio", "w_r", "queries", "ok", "mean_ext_q",
                "mean_front", "median_front")
    aggregates = []
    for algo in algorithms:
        for ratio in ratios:
            for w in weights:
                sel = [r for r in rows if r[4] == algo and r[0] == ratio and r[2] == w]
                ok = [r for r in sel if r[5] == "ok"]
                fronts = [r[6] for r in ok if r[6] is not None]
                aggregates.append([
                    algo, ratio, w, len(sel), len(ok), _mean([r[9] for r in ok]),
                    _mean(fronts), _median(fronts),
                ])
    return ExperimentReport("efficiency", columns, rows, agg_cols, aggregates,
                            {"ratios": list(ratios), "weights": list(weights), "seeds": list(seeds)})


def run_effectiveness(
    cfg: EnvironmentConfig,
    algorithms: Sequence[str] = ALGORITHMS,
    strategies: Sequence[str] = tuple(RISK_BANDS),
    failures: Sequence[int] = tuple(range(0, 11)),
    seeds: Sequence[int] = (0,),
    bias: float = 1.0,
    opts: SolverOptions = SolverOptions(),
    jobs: int = 1,
) -> ExperimentReport:
    """Compose once per query, then replay every failure count.

    Revocations for a seed are nested across failure counts, since
    composition happens before failures are revealed.
    """
    columns = ("seed", "failures", "query_id", "algorithm", "strategy", "w_r", "status",
               "tec", "agr", "ext_q", "eff_q", "budget", "exer", "cpu_ms")
    rows = []
    for seed in seeds:
        env = generate_environment(replace(cfg, seed=seed))
        areas = _area_index(env.services)
        weights = [band_weights(seed, i, strategies) for i in range(len(env.queries))]
        tasks = [(q, areas.get(q.area_id, ()), algorithms, tuple(w), opts)
                 for q, w in zip(env.queries, weights)]
        solved = _run_tasks(tasks, jobs)
        for f in failures:
            scenario = inject_failures(env.services, f, bias=bias, seed=seed)
            for q, ws, outcomes in zip(env.queries, weights, solved):
                area = areas.get(q.area_id, ())
                for o in outcomes:
                    strategy = strategies[ws.index(o.w_r)]
                    if o.result is None:
                        rows.append([seed, f, q.query_id, o.algorithm, strategy, o.w_r, o.status,
                                     None, None, None, None, q.extension_budget, None, o.cpu_s * 1000])
                        continue
                    sel = o.result.selected
                    eff = effective_extension(sel, scenario, q, area)
                    rows.append([seed, f, q.query_id, o.algorithm, strategy, o.w_r, "ok",
                                 sel.tec, sel.agr, sel.ext_q, eff, q.extension_budget,
                                 exer_flag(sel.ext_q, eff, q), o.cpu_s * 1000])
    agg_cols = ("algorithm", "strategy", "failures", "seeds", "rows", "exer_ratio",
                "exer_pooled", "mean_ext_q", "mean_eff_q")
    aggregates = []
    for algo in algorithms:
        for strategy in strategies:
            for f in failures:
                ok = [r for r in rows if r[3] == algo and r[4] == strategy and r[1] == f and r[6] == "ok"]
                per_seed = []
                for seed in seeds:
                    mine = [r[12] for r in ok if r[0] == seed]
                    if mine:
                        per_seed.append(sum(mine) / len(mine))
                aggregates.append([
                    algo, strategy, f, len(per_seed), len(ok),
                    _mean(per_seed),
                    (sum(r[12] for r in ok) / len(ok)) if ok else None,
                    _mean([r[9] for r in ok]),
                    _mean([r[10] for r in ok]),
                ])
    return ExperimentReport("effectiveness", columns, rows, agg_cols, aggregates,
                            {"failures": list(failures), "strategies": list(strategies),
                             "seeds": list(seeds), "bias": bias})


def run_experiment(
    suite: str,
    cfg: EnvironmentConfig,
    strategies: Sequence[str] | None = None,
    algorithms: Sequence[str] = ALGORITHMS,
    **params,
) -> ExperimentReport:
    """Dispatch to one of the suites by name."""
    unknown = [a for a in algorithms if a not in ALGORITHMS]
    if unknown:
        raise ValueError(f"unknown algorithm {unknown[0]!r}")
    if suite == "scalability":
        return run_scalability(cfg, algorithms, **params)
    if suite == "efficiency":
        return run_efficiency(cfg, algorithms, **params)
    if suite == "effectiveness":
        return run_effectiveness(cfg, algorithms, tuple(strategies or RISK_BANDS), **params)
    raise ValueError(f"unknown suite {suite!r}; choose one of {SUITES}")
