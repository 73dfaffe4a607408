"""CSV / JSON record files for services, queries and reliability inputs."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence

from .model import (
    EnergyQuery,
    EnergyService,
    ModelError,
    ReliabilityProfile,
    validate_query,
    validate_service,
)
from .reliability import SocSeries, eub_from_soc

SERVICE_FIELDS = (
    "id", "owner_id", "area_id", "start_time", "end_time",
    "intensity_I", "tsr", "dec_advertised", "reliability", "functionalities",
)
QUERY_FIELDS = (
    "query_id", "t_s", "area_id", "required_energy_RE", "max_intensity_CI",
    "duration_du", "hard_deadline_Dlh",
)


def service_record(s: EnergyService) -> dict:
    return {name: getattr(s, name) for name in SERVICE_FIELDS}


def query_record(q: EnergyQuery) -> dict:
    return {name: getattr(q, name) for name in QUERY_FIELDS}


def _cell(value) -> str:
    # repr() keeps floats round-trippable
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(row[name]) for name in header])


def _read_rows(path: Path) -> list[dict]:
    path = Path(path)
    if path.suffix.lower() == ".json":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, list):
            raise ModelError(str(path), "expected a JSON array of records")
        return data
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ModelError(str(path), "missing header row")
        return list(reader)


def _with_row(index: int, path, parse, raw):
    try:
        return parse(raw)
    except ModelError as exc:
        raise ModelError(exc.field, f"{path} record {index}: {exc}") from None


def load_services(path) -> list[EnergyService]:
    return [_with_row(i, path, validate_service, r) for i, r in enumerate(_read_rows(path))]


def load_queries(path) -> list[EnergyQuery]:
    return [_with_row(i, path, validate_query, r) for i, r in enumerate(_read_rows(path))]


def write_services(path, services: Iterable[EnergyService]) -> None:
    path = Path(path)
    rows = [service_record(s) for s in services]
    if path.suffix.lower() == ".json":
        path.write_text(json.dumps(rows, indent=1) + "\n", encoding="utf-8")
    else:
        _write_csv(path, SERVICE_FIELDS, rows)


def write_queries(path, queries: Iterable[EnergyQuery]) -> None:
    path = Path(path)
    rows = [query_record(q) for q in queries]
    if path.suffix.lower() == ".json":
        path.write_text(json.dumps(rows, indent=1) + "\n", encoding="utf-8")
    else:
        _write_csv(path, QUERY_FIELDS, rows)


def load_soc_series(path) -> dict[str, list[tuple[int, float]]]:
    """Read ``owner_id,time_min,soc`` rows grouped by owner, in file order."""
    series: dict[str, list[tuple[int, float]]] = {}
    for row in _read_rows(path):
        series.setdefault(str(row["owner_id"]), []).append(
            (int(float(row["time_min"])), float(row["soc"]))
        )
    return series


def load_history(path) -> dict[str, tuple[int, int]]:
    """Read ``owner_id,ss,tps`` provision history rows."""
    return {
        str(row["owner_id"]): (int(row["ss"]), int(row["tps"]))
        for row in _read_rows(path)
    }


def load_reliability_scores(path) -> list[float]:
    """One score per line (or a ``reliability`` column) for random mapping."""
    path = Path(path)
    if path.suffix.lower() in (".csv", ".json"):
        return [float(r["reliability"]) for r in _read_rows(path)]
    return [float(line) for line in path.read_text().split() if line.strip()]


def profiles_from_files(soc_path, history_path, bins: int = 10) -> list[ReliabilityProfile]:
    history = load_history(history_path)
    profiles = []
    for owner, samples in sorted(load_soc_series(soc_path).items()):
        ss, tps = history.get(owner, (0, 0))
        eub = eub_from_soc(SocSeries(owner, tuple(samples)), bins)
        profiles.append(ReliabilityProfile(owner, eub, ss, tps))
    return profiles
