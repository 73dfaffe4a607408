"""Command-line interface: ``generate``, ``compose`` and ``experiment``.

Exit codes: 0 success, 2 bad configuration or arguments, 3 no feasible
composition, 4 experiment failure rate above ``--max-failure-rate``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import kernels
from .assessment import extension_pool
from .composer import (
    DEFAULT_CAP,
    DEFAULT_K,
    NoFeasibleComposition,
    SearchSpaceOverflow,
    compose_brute,
    compose_greedy,
    compose_heuristic,
    compose_knapsack,
)
from .experiments import ALGORITHMS, SUITES, SolverOptions, run_experiment, write_report
from .model import RISK_BANDS, ModelError, PreferenceStrategy, validate_query
from .records import load_queries, load_services, write_queries, write_services
from .simulator import ConfigError, EnvironmentConfig, generate_environment
from .timeline import DEFAULT_MIN_LCH, chunk_window, select_nearby

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_SUITE = 0, 2, 3, 4

# flag defaults; a JSON config file's "options" object may override them
DEFAULTS = {
    "seed": None,
    "algo": ",".join(ALGORITHMS),
    "k": DEFAULT_K,
    "min_lch": DEFAULT_MIN_LCH,
    "w_r": 0.5,
    "cap": DEFAULT_CAP,
    "agr_variant": "paper",
    "backend": None,
    "seeds": "1",
    "failures": "0..10",
    "ratios": "1..9",
    "weights": None,
    "strategies": ",".join(RISK_BANDS),
    "bias": 1.0,
    "jobs": 1,
    "max_failure_rate": None,
}


class UsageError(Exception):
    """Bad flag value; reported with exit code 2."""


def parse_ints(text: str) -> list[int]:
    """``"3"``, ``"1,4,7"`` or the inclusive range ``"0..10"``."""
    out: list[int] = []
    try:
        for part in str(text).split(","):
            part = part.strip()
            if ".." in part:
                lo, hi = part.split("..", 1)
                out.extend(range(int(lo), int(hi) + 1))
            elif part:
                out.append(int(part))
    except ValueError:
        raise UsageError(f"cannot parse integer list {text!r}") from None
    if not out:
        raise UsageError(f"empty integer list {text!r}")
    return out


def parse_seeds(text: str) -> list[int]:
    # a bare count means seeds 0..n-1
    text = str(text).strip()
    if text.isdigit():
        return list(range(int(text)))
    return parse_ints(text)


def parse_algorithms(text: str) -> list[str]:
    algos = [a.strip() for a in text.split(",") if a.strip()]
    unknown = [a for a in algos if a not in ALGORITHMS]
    if unknown or not algos:
        raise UsageError(f"unknown algorithm {unknown[0] if unknown else text!r}; choose from {ALGORITHMS}")
    return algos


def _load_config(path) -> tuple[EnvironmentConfig, dict]:
    if path is None:
        return EnvironmentConfig(), {}
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(str(path), "expected a JSON object")
    options = raw.pop("options", {})
    if not isinstance(options, dict):
        raise ConfigError("options", "expected a JSON object")
    unknown = set(options) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"options.{sorted(unknown)[0]}", "unknown option")
    return EnvironmentConfig.from_dict(raw), options


def _resolve(args, options: dict) -> dict:
    """Flag value if given, else config option, else built-in default."""
    merged = {}
    for name, default in DEFAULTS.items():
        flag = getattr(args, name, None)
        merged[name] = flag if flag is not None else options.get(name, default)
    return merged


def _print_json(obj) -> None:
    json.dump(obj, sys.stdout, indent=2, sort_keys=False)
    sys.stdout.write("\n")


# -- subcommands ---------------------------------------------------------------------


def cmd_generate(args) -> int:
    cfg, options = _load_config(args.config)
    opts = _resolve(args, options)
    if opts["seed"] is not None:
        cfg = EnvironmentConfig.from_dict({**cfg.to_dict(), "seed": int(opts["seed"])})
    env = generate_environment(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_services(out / "services.csv", env.services)
    write_queries(out / "queries.csv", env.queries)
    summary = {"config": cfg.to_dict(), **env.summary()}
    (out / "env-summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")
    print(f"wrote {len(env.services)} services and {len(env.queries)} queries to {out}")
    return EXIT_OK


def _pick_query(args):
    if args.query:
        try:
            raw = json.loads(args.query)
        except json.JSONDecodeError as exc:
            raise UsageError(f"--query is not valid JSON: {exc}") from None
        return validate_query(raw)
    if not args.queries or not args.query_id:
        raise UsageError("give --query, or --queries together with --query-id")
    for q in load_queries(args.queries):
        if q.query_id == args.query_id:
            return q
    raise UsageError(f"query {args.query_id!r} not found in {args.queries}")


def cmd_compose(args) -> int:
    _, options = _load_config(args.config)
    opts = _resolve(args, options)
    algos = parse_algorithms(opts["algo"])
    if opts["backend"] is not None and opts["backend"] not in kernels.BACKENDS:
        raise UsageError(f"backend {opts['backend']!r} unavailable; have {sorted(kernels.BACKENDS)}")
    try:
        strategy = PreferenceStrategy.from_reliability_weight(float(opts["w_r"]))
    except (ModelError, ValueError) as exc:
        raise UsageError(f"--w-r: {exc}") from None
    services = load_services(args.services)
    q = _pick_query(args)
    tl = chunk_window(select_nearby(services, q), q, int(opts["min_lch"]))
    pool = extension_pool(services, q)
    common = {"variant": opts["agr_variant"]}
    elastic = {**common, "cap": int(opts["cap"]), "backend": opts["backend"]}

    results, status = [], EXIT_OK
    for algo in algos:
        try:
            if algo == "brute":
                res = compose_brute(tl, q, pool, strategy, **elastic)
            elif algo == "heuristic":
                res = compose_heuristic(tl, q, pool, int(opts["k"]), strategy, **elastic)
            elif algo == "greedy":
                res = compose_greedy(tl, q, pool, strategy, **common)
            else:
                res = compose_knapsack(tl, q, pool, strategy, **common)
            results.append(res.to_dict())
        except NoFeasibleComposition as exc:
            near = exc.nearest.to_dict() if exc.nearest is not None else None
            results.append({"algorithm": algo, "error": "infeasible", "message": str(exc), "nearest": near})
            status = EXIT_INFEASIBLE
        except SearchSpaceOverflow as exc:
            results.append({"algorithm": algo, "error": "overflow", "message": str(exc)})
            status = EXIT_INFEASIBLE
    out = {"query_id": q.query_id, "results": results}
    if args.dump_chunks:
        out["chunks"] = tl.to_dict()["chunks"]
    _print_json(out)
    return status


def _table(columns, rows) -> str:
    def cell(v):
        if v is None:
            return "-"
        return f"{v:.4g}" if isinstance(v, float) else str(v)

    text = [[str(c) for c in columns]] + [[cell(v) for v in r] for r in rows]
    widths = [max(len(r[i]) for r in text) for i in range(len(columns))]
    return "\n".join("  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in text)


def cmd_experiment(args) -> int:
    cfg, options = _load_config(args.config)
    opts = _resolve(args, options)
    if args.queries_per_seed is not None:
        cfg = EnvironmentConfig.from_dict({**cfg.to_dict(), "num_queries": args.queries_per_seed})
    algos = parse_algorithms(opts["algo"])
    solver = SolverOptions(
        k=int(opts["k"]), min_lch=int(opts["min_lch"]), cap=int(opts["cap"]),
        variant=opts["agr_variant"], backend=opts["backend"],
    )
    params = {"seeds": parse_seeds(opts["seeds"]), "opts": solver, "jobs": int(opts["jobs"])}
    strategies = None
    if args.suite == "scalability":
        params["ratios"] = parse_ints(opts["ratios"])
    elif args.suite == "efficiency":
        params["ratios"] = parse_ints(opts["ratios"])
        if opts["weights"]:
            params["weights"] = [float(w) for w in str(opts["weights"]).split(",")]
    else:
        params["failures"] = parse_ints(opts["failures"])
        params["bias"] = float(opts["bias"])
        strategies = [s.strip() for s in opts["strategies"].split(",") if s.strip()]
        bad = [s for s in strategies if s not in RISK_BANDS]
        if bad:
            raise UsageError(f"unknown strategy {bad[0]!r}; choose from {tuple(RISK_BANDS)}")
    report = run_experiment(args.suite, cfg, strategies, algos, **params)
    paths = write_report(report, args.out)
    print(_table(report.aggregate_columns, report.aggregates))
    print(f"\n{len(report.rows)} rows, failure rate {report.failure_rate:.3f}; wrote {paths['report'].parent}")
    limit = opts["max_failure_rate"]
    if limit is not None and report.failure_rate > float(limit):
        print(f"failure rate {report.failure_rate:.3f} exceeds {float(limit):.3f}", file=sys.stderr)
        return EXIT_SUITE
    return EXIT_OK


# -- parser ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crowdcharge",
        description="Reliability-aware composition of crowdsourced wireless energy services.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def config_flag(p):
        p.add_argument("--config", help="JSON file: environment fields plus an optional 'options' object of flag defaults")

    gen = sub.add_parser("generate", help="sample a synthetic environment")
    config_flag(gen)
    gen.add_argument("--out", required=True, help="output directory (created if missing)")
    gen.add_argument("--seed", type=int, help="override the config seed")
    gen.set_defaults(func=cmd_generate)

    comp = sub.add_parser("compose", help="compose one query and print the result as JSON")
    config_flag(comp)
    comp.add_argument("--services", required=True, help="services CSV or JSON")
    comp.add_argument("--queries", help="queries CSV or JSON")
    comp.add_argument("--query-id", help="query to compose from --queries")
    comp.add_argument("--query", help="inline query as a JSON object")
    comp.add_argument("--algo", help=f"comma-separated subset of {','.join(ALGORITHMS)} (default: all)")
    comp.add_argument("--k", type=int, help=f"partials kept per merged chunk by the heuristic (default {DEFAULT_K})")
    comp.add_argument("--min-lch", type=int, help=f"shortest chunk in minutes (default {DEFAULT_MIN_LCH})")
    comp.add_argument("--w-r", type=float, help="reliability weight in [0, 1]; energy weight is 1 - w_r (default 0.5)")
    comp.add_argument("--cap", type=int, help=f"largest search space to enumerate (default {DEFAULT_CAP})")
    comp.add_argument("--agr-variant", choices=("paper", "normalized"),
                      help="aggregate reliability form (default: paper)")
    comp.add_argument("--backend", help=f"scan kernel: {', '.join(sorted(kernels.BACKENDS))}")
    comp.add_argument("--dump-chunks", action="store_true", help="include the chunk layout")
    comp.set_defaults(func=cmd_compose)

    exp = sub.add_parser("experiment", help="run an experiment suite and write reports")
    exp.add_argument("suite", choices=SUITES)
    config_flag(exp)
    exp.add_argument("--out", required=True, help="output directory for report.csv, aggregate.csv, summary.json")
    exp.add_argument("--seeds", help="seed count (N means 0..N-1), list '1,2' or range '0..9' (default 1)")
    exp.add_argument("--queries-per-seed", type=int, help="override num_queries")
    exp.add_argument("--failures", help="effectiveness: failure counts, e.g. '0..10'")
    exp.add_argument("--ratios", help="scalability/efficiency: services-per-query ratios, e.g. '1..9'")
    exp.add_argument("--weights", help="efficiency: comma-separated reliability weights (default 0.1..0.9)")
    exp.add_argument("--strategies", help="effectiveness: comma-separated risk strategies")
    exp.add_argument("--bias", type=float, help="effectiveness: exponent on failure weights (default 1)")
    exp.add_argument("--algo", help="comma-separated algorithms (default: all)")
    exp.add_argument("--k", type=int, help="heuristic top-k")
    exp.add_argument("--min-lch", type=int, help="shortest chunk in minutes")
    exp.add_argument("--cap", type=int, help="largest search space to enumerate")
    exp.add_argument("--agr-variant", choices=("paper", "normalized"))
    exp.add_argument("--backend", help="scan kernel backend")
    exp.add_argument("--jobs", type=int, help="worker processes (default 1)")
    exp.add_argument("--max-failure-rate", type=float,
                     help="exit 4 when the share of unsolved rows exceeds this")
    exp.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ModelError, UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc.filename}: file not found", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
