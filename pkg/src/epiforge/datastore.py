"""Directory-backed persistence: country metadata, per-country daily
summaries and covariates, fitted parameters, population pyramids, and
contact matrices.

Layout under the data directory:

    countries.csv
    daily/<CC>.csv
    covariates/<CC>.csv
    params/<CC>.json
    pyramids/<CC>.csv
    contact_matrices/{home,school,work,other}.csv

Everything is plain CSV/JSON so fixtures stay human-diffable. Writes go
through a single lock (one writer, many readers); each write replaces the
whole partition file via a temp file so a crash never leaves half a file.
"""

from __future__ import annotations

import csv
import json
import os
import threading
from dataclasses import dataclass, fields
from datetime import date as _date
from pathlib import Path

from . import epi_model
from .errors import InvalidRangeError, PersistenceError
from .timeseries import DailySummary, DatedSeries, Metric, SeriesKind

_OPTIONAL_META = (
    "gdp",
    "literacy",
    "mean_temperature",
    "mean_rainfall",
    "mean_humidity",
    "pollution_index",
    "healthcare_index",
    "food_security_index",
    "hospital_beds_per_10m",
    "population_tests",
)


@dataclass(frozen=True)
class CountryMeta:
    """Static facts about a country; missing cells stay None, never 0."""

    country_code: str
    name: str
    area: float | None = None  # units of 100 km²
    population: float | None = None
    gdp: float | None = None
    literacy: float | None = None
    mean_temperature: float | None = None
    mean_rainfall: float | None = None
    mean_humidity: float | None = None
    pollution_index: float | None = None
    healthcare_index: float | None = None
    food_security_index: float | None = None
    hospital_beds_per_10m: float | None = None
    population_tests: float | None = None


META_COLUMNS = [f.name for f in fields(CountryMeta)]

DAILY_COLUMNS = [
    "country_code",
    "date",
    "affected",
    "dead",
    "recovered",
    "newly_affected",
    "newly_dead",
    "newly_recovered",
]

COVARIATE_COLUMNS = ["country_code", "date", "temperature_c", "humidity_pct"]

_COVARIATE_METRICS = {
    Metric.TEMPERATURE: "temperature_c",
    Metric.HUMIDITY: "humidity_pct",
}


def _opt_float(cell: str | None) -> float | None:
    if cell is None or cell.strip() == "":
        return None
    return float(cell)


def load_country_meta(path) -> tuple[dict[str, CountryMeta], list[str]]:
    """Read countries.csv; bad rows are collected, good rows still load.

    Duplicate codes follow last-wins with a warning in the report.
    """
    path = Path(path)
    out: dict[str, CountryMeta] = {}
    report: list[str] = []
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise PersistenceError(str(path), str(exc)) from exc
    with fh:
        reader = csv.DictReader(fh)
        for lineno, row in enumerate(reader, start=2):
            code = (row.get("country_code") or "").strip()
            if not code:
                report.append(f"{path.name}:{lineno}: missing country_code, row skipped")
                continue
            try:
                area = _opt_float(row.get("area"))
                population = _opt_float(row.get("population"))
                optionals = {k: _opt_float(row.get(k)) for k in _OPTIONAL_META}
            except ValueError as exc:
                report.append(f"{path.name}:{lineno}: {exc}, row skipped")
                continue
            if population is not None and population <= 0:
                report.append(f"{path.name}:{lineno}: population must be > 0, row skipped")
                continue
            if code in out:
                report.append(f"{path.name}:{lineno}: duplicate code {code}, last row wins")
            out[code] = CountryMeta(
                country_code=code,
                name=(row.get("name") or code).strip(),
                area=area,
                population=population,
                **optionals,
            )
    return out, report


def _meta_to_row(meta: CountryMeta) -> list:
    row = []
    for col in META_COLUMNS:
        v = getattr(meta, col)
        row.append("" if v is None else v)
    return row


class DataStore:
    """Single-writer, many-reader store over one directory."""

    def __init__(self, root):
        self.root = Path(root)
        self._write_lock = threading.Lock()
        self._daily: dict[str, dict[_date, DailySummary]] = {}
        self._covariates: dict[str, dict[_date, dict[str, float | None]]] = {}
        self.countries: dict[str, CountryMeta] = {}
        self.meta_report: list[str] = []
        self.validation_report: list[str] = []
        try:
            for sub in ("daily", "covariates", "params", "pyramids", "contact_matrices"):
                (self.root / sub).mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise PersistenceError(str(self.root), str(exc)) from exc
        meta_path = self.root / "countries.csv"
        if meta_path.exists():
            self.countries, self.meta_report = load_country_meta(meta_path)
        for path in sorted((self.root / "daily").glob("*.csv")):
            self._load_daily(path.stem)
        for path in sorted((self.root / "covariates").glob("*.csv")):
            self._load_covariates(path.stem)

    # -- daily summaries ---------------------------------------------------

    def _daily_path(self, code: str) -> Path:
        return self.root / "daily" / f"{code}.csv"

    def _load_daily(self, code: str):
        path = self._daily_path(code)
        table: dict[_date, DailySummary] = {}
        try:
            with open(path, newline="") as fh:
                for row in csv.DictReader(fh):
                    day = _date.fromisoformat(row["date"])
                    table[day] = DailySummary(
                        country_code=row["country_code"],
                        day=day,
                        affected=float(row["affected"]),
                        dead=float(row["dead"]),
                        recovered=float(row["recovered"]),
                        newly_affected=float(row["newly_affected"]),
                        newly_dead=float(row["newly_dead"]),
                        newly_recovered=float(row["newly_recovered"]),
                    )
        except OSError as exc:
            raise PersistenceError(str(path), str(exc)) from exc
        self._daily[code] = table

    def _write_daily(self, code: str):
        path = self._daily_path(code)
        rows = [self._daily[code][d] for d in sorted(self._daily[code])]
        tmp = path.with_suffix(".csv.tmp")
        try:
            with open(tmp, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(DAILY_COLUMNS)
                for s in rows:
                    writer.writerow(
                        [
                            s.country_code,
                            s.day.isoformat(),
                            s.affected,
                            s.dead,
                            s.recovered,
                            s.newly_affected,
                            s.newly_dead,
                            s.newly_recovered,
                        ]
                    )
            os.replace(tmp, path)
        except OSError as exc:
            raise PersistenceError(str(path), str(exc)) from exc

    def upsert_daily_summary(self, summary: DailySummary):
        """Insert or replace by (country, date); write-through to disk."""
        self.bulk_upsert([summary])

    def bulk_upsert(self, summaries: list[DailySummary]):
        """Upsert many rows with one disk write per touched country."""
        with self._write_lock:
            touched = set()
            for s in summaries:
                if self.countries and s.country_code not in self.countries:
                    note = f"unknown country code {s.country_code} (stored anyway)"
                    if note not in self.validation_report:
                        self.validation_report.append(note)
                self._daily.setdefault(s.country_code, {})[s.day] = s
                touched.add(s.country_code)
            for code in sorted(touched):
                self._write_daily(code)

    def query_range(self, country_code: str, start: _date, end: _date) -> list[DailySummary]:
        """Rows with start <= date <= end, ascending; gaps stay gaps."""
        if start > end:
            raise InvalidRangeError(f"range start {start} is after end {end}")
        table = self._daily.get(country_code, {})
        return [table[d] for d in sorted(table) if start <= d <= end]

    def countries_with_history(self) -> list[str]:
        return sorted(code for code, table in self._daily.items() if table)

    def all_summaries(self, country_code: str) -> list[DailySummary]:
        table = self._daily.get(country_code, {})
        return [table[d] for d in sorted(table)]

    def latest_summary(self, country_code: str) -> DailySummary | None:
        table = self._daily.get(country_code, {})
        if not table:
            return None
        return table[max(table)]

    def daily_series(self, country_code: str, metric: Metric) -> DatedSeries | None:
        """Cumulative series for confirmed/deaths/recovered, level for active."""
        rows = self.all_summaries(country_code)
        if not rows:
            return None
        attr = {
            Metric.CONFIRMED: "affected",
            Metric.DEATHS: "dead",
            Metric.RECOVERED: "recovered",
            Metric.ACTIVE: "active",
        }[metric]
        kind = SeriesKind.LEVEL if metric is Metric.ACTIVE else SeriesKind.CUMULATIVE
        return DatedSeries(
            country_code,
            metric,
            tuple((s.day, getattr(s, attr)) for s in rows),
            kind,
        )

    # -- covariates ----------------------------------------------------------

    def _covariate_path(self, code: str) -> Path:
        return self.root / "covariates" / f"{code}.csv"

    def _load_covariates(self, code: str):
        path = self._covariate_path(code)
        table: dict[_date, dict[str, float | None]] = {}
        try:
            with open(path, newline="") as fh:
                for row in csv.DictReader(fh):
                    day = _date.fromisoformat(row["date"])
                    table[day] = {
                        "temperature_c": _opt_float(row.get("temperature_c")),
                        "humidity_pct": _opt_float(row.get("humidity_pct")),
                    }
        except OSError as exc:
            raise PersistenceError(str(path), str(exc)) from exc
        self._covariates[code] = table

    def upsert_covariates(self, country_code: str, rows: dict[_date, dict[str, float | None]]):
        with self._write_lock:
            table = self._covariates.setdefault(country_code, {})
            for day, vals in rows.items():
                merged = dict(table.get(day, {}))
                merged.update(vals)
                table[day] = merged
            path = self._covariate_path(country_code)
            tmp = path.with_suffix(".csv.tmp")
            try:
                with open(tmp, "w", newline="") as fh:
                    writer = csv.writer(fh)
                    writer.writerow(COVARIATE_COLUMNS)
                    for day in sorted(table):
                        t = table[day].get("temperature_c")
                        h = table[day].get("humidity_pct")
                        writer.writerow(
                            [
                                country_code,
                                day.isoformat(),
                                "" if t is None else t,
                                "" if h is None else h,
                            ]
                        )
                os.replace(tmp, path)
            except OSError as exc:
                raise PersistenceError(str(path), str(exc)) from exc

    def covariate_countries(self) -> list[str]:
        return sorted(self._covariates)

    def covariate_series(self, country_code: str, metric: Metric) -> DatedSeries | None:
        column = _COVARIATE_METRICS.get(metric)
        if column is None:
            raise ValueError(f"{metric.value} is not a covariate")
        table = self._covariates.get(country_code, {})
        points = [
            (day, table[day][column])
            for day in sorted(table)
            if table[day].get(column) is not None
        ]
        if not points:
            return None
        return DatedSeries(country_code, metric, tuple(points), SeriesKind.LEVEL)

    # -- backfill protocol ---------------------------------------------------

    def lookup_value(self, country_code: str, metric: Metric, day: _date) -> float | None:
        if metric in _COVARIATE_METRICS:
            cell = self._covariates.get(country_code, {}).get(day, {})
            return cell.get(_COVARIATE_METRICS[metric])
        summary = self._daily.get(country_code, {}).get(day)
        if summary is None:
            return None
        return {
            Metric.CONFIRMED: summary.affected,
            Metric.DEATHS: summary.dead,
            Metric.RECOVERED: summary.recovered,
            Metric.ACTIVE: summary.active,
        }[metric]

    # -- metadata ------------------------------------------------------------

    def save_country_meta(self, metas: dict[str, CountryMeta]):
        path = self.root / "countries.csv"
        with self._write_lock:
            tmp = path.with_suffix(".csv.tmp")
            try:
                with open(tmp, "w", newline="") as fh:
                    writer = csv.writer(fh)
                    writer.writerow(META_COLUMNS)
                    for code in sorted(metas):
                        writer.writerow(_meta_to_row(metas[code]))
                os.replace(tmp, path)
            except OSError as exc:
                raise PersistenceError(str(path), str(exc)) from exc
            self.countries = dict(metas)

    # -- fitted parameters -----------------------------------------------------

    def _params_path(self, code: str) -> Path:
        return self.root / "params" / f"{code}.json"

    def save_params(self, country_code: str, payload: dict):
        path = self._params_path(country_code)
        with self._write_lock:
            tmp = path.with_suffix(".json.tmp")
            try:
                with open(tmp, "w") as fh:
                    json.dump(payload, fh, indent=2, sort_keys=True)
                    fh.write("\n")
                os.replace(tmp, path)
            except OSError as exc:
                raise PersistenceError(str(path), str(exc)) from exc

    def load_params(self, country_code: str) -> dict | None:
        path = self._params_path(country_code)
        if not path.exists():
            return None
        try:
            with open(path) as fh:
                return json.load(fh)
        except OSError as exc:
            raise PersistenceError(str(path), str(exc)) from exc

    def calibrated_countries(self) -> list[str]:
        return sorted(p.stem for p in (self.root / "params").glob("*.json"))

    # -- model inputs ------------------------------------------------------------

    def pyramid_path(self, country_code: str) -> Path:
        return self.root / "pyramids" / f"{country_code}.csv"

    def load_age_structure(self, country_code: str) -> epi_model.AgeStructure | None:
        path = self.pyramid_path(country_code)
        if not path.exists():
            return None
        return epi_model.load_age_structure(path)

    def load_contact_matrices(self) -> epi_model.ContactMatrices | None:
        directory = self.root / "contact_matrices"
        if not (directory / "home.csv").exists():
            return None
        return epi_model.load_contact_matrices(directory)
