"""Dated series plumbing: cumulative-to-daily transforms, province
aggregation, lag alignment against covariates, gap backfill, and window
means.

Dates are datetime.date throughout. Operations return warnings instead of
mutating silently; anomalies in upstream feeds (counter resets, missing
provinces) are preserved and reported, not patched over.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from datetime import date, timedelta
from typing import Protocol

from .errors import (
    EmptyInputError,
    EmptySampleError,
    EmptyWindowError,
    InconsistentInputError,
    PersistenceError,
)
from .stats import PairedSample


class Metric(str, enum.Enum):
    CONFIRMED = "confirmed"
    DEATHS = "deaths"
    RECOVERED = "recovered"
    ACTIVE = "active"
    TEMPERATURE = "temperature"
    HUMIDITY = "humidity"


# metrics whose canonical stored form is a running total
CUMULATIVE_METRICS = frozenset({Metric.CONFIRMED, Metric.DEATHS, Metric.RECOVERED})


class SeriesKind(str, enum.Enum):
    CUMULATIVE = "cumulative"
    INCIDENT = "incident"
    LEVEL = "level"


def default_kind(metric: Metric) -> SeriesKind:
    return SeriesKind.CUMULATIVE if metric in CUMULATIVE_METRICS else SeriesKind.LEVEL


@dataclass(frozen=True)
class DatedSeries:
    """One metric for one country, ordered by date.

    Invariants: dates strictly increase (no duplicates), and a cumulative
    series never holds a negative value. Incident series may go negative;
    that is how source-data corrections surface.
    """

    country_code: str
    metric: Metric
    points: tuple[tuple[date, float], ...]
    kind: SeriesKind | None = None

    def __post_init__(self):
        pts = tuple((d, float(v)) for d, v in self.points)
        object.__setattr__(self, "points", pts)
        if self.kind is None:
            object.__setattr__(self, "kind", default_kind(self.metric))
        for (d0, _), (d1, _) in zip(pts, pts[1:]):
            if d1 <= d0:
                raise InconsistentInputError(
                    f"dates must strictly increase, got {d0} then {d1}"
                )
        if self.kind is SeriesKind.CUMULATIVE:
            for d, v in pts:
                if v < 0:
                    raise InconsistentInputError(
                        f"cumulative {self.metric.value} is negative ({v}) on {d}"
                    )

    @property
    def dates(self) -> tuple[date, ...]:
        return tuple(d for d, _ in self.points)

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(v for _, v in self.points)

    def value_on(self, day: date) -> float | None:
        for d, v in self.points:
            if d == day:
                return v
        return None


@dataclass(frozen=True)
class DailySummary:
    """Counts for one country on one day; active is derived, not stored."""

    country_code: str
    day: date
    affected: float
    dead: float
    recovered: float
    newly_affected: float
    newly_dead: float
    newly_recovered: float

    @property
    def active(self) -> float:
        return self.affected - self.dead - self.recovered


class BackfillSource(Protocol):
    """Point lookup used by fill_missing; the datastore satisfies this."""

    def lookup_value(self, country_code: str, metric: Metric, day: date) -> float | None:
        ...


def cumulative_to_daily(series: DatedSeries) -> tuple[DatedSeries, list[str]]:
    """First differences of a running total.

    The first output point equals the first input value. Negative daily
    values (upstream corrections) are kept as-is and each one produces a
    warning naming the date.
    """
    if not series.points:
        raise EmptyInputError("cannot difference an empty series")
    if series.metric not in CUMULATIVE_METRICS or series.kind is not SeriesKind.CUMULATIVE:
        raise InconsistentInputError(
            f"daily transform expects a cumulative series, got {series.metric.value}/{series.kind.value}"
        )
    warnings: list[str] = []
    out: list[tuple[date, float]] = [series.points[0]]
    for (_, prev), (day, cur) in zip(series.points, series.points[1:]):
        delta = cur - prev
        if delta < 0:
            warnings.append(
                f"{series.country_code}/{series.metric.value}: negative daily value "
                f"{delta:g} on {day.isoformat()}"
            )
        out.append((day, delta))
    daily = DatedSeries(series.country_code, series.metric, tuple(out), SeriesKind.INCIDENT)
    return daily, warnings


def prefix_sum(series: DatedSeries) -> DatedSeries:
    """Running total of an incident series; inverse of cumulative_to_daily."""
    if not series.points:
        raise EmptyInputError("cannot accumulate an empty series")
    total = 0.0
    out = []
    for day, v in series.points:
        total += v
        out.append((day, total))
    return DatedSeries(series.country_code, series.metric, tuple(out), SeriesKind.CUMULATIVE)


def aggregate_provinces(records: list[DatedSeries]) -> tuple[DatedSeries, list[str]]:
    """Sum province-level series into one national series.

    All inputs must share country code and metric. A province missing a
    date that others report contributes zero there, with a warning.
    """
    if not records:
        raise EmptyInputError("no province series to aggregate")
    head = records[0]
    for r in records[1:]:
        if r.country_code != head.country_code or r.metric != head.metric:
            raise InconsistentInputError(
                f"mixed inputs: {r.country_code}/{r.metric.value} vs "
                f"{head.country_code}/{head.metric.value}"
            )
    all_dates = sorted({d for r in records for d in r.dates})
    lookups = [dict(r.points) for r in records]
    warnings: list[str] = []
    out: list[tuple[date, float]] = []
    for day in all_dates:
        total = 0.0
        for idx, table in enumerate(lookups):
            if day in table:
                total += table[day]
            else:
                warnings.append(
                    f"{head.country_code}/{head.metric.value}: province {idx} has no "
                    f"value on {day.isoformat()}, treated as 0"
                )
        out.append((day, total))
    agg = DatedSeries(head.country_code, head.metric, tuple(out), head.kind)
    return agg, warnings


def lag_align(
    dependent: DatedSeries, covariate: DatedSeries, lag_days: int = 5
) -> PairedSample:
    """Pair each dependent value with the covariate lag_days earlier.

    Days where the dependent is exactly zero are excluded: a zero daily
    count usually means no report rather than no events, and it would
    otherwise dominate the ranks. Raises EmptySampleError when no pairs
    survive.
    """
    if lag_days < 0:
        raise ValueError(f"lag_days must be >= 0, got {lag_days}")
    by_date = dict(covariate.points)
    xs: list[float] = []
    ys: list[float] = []
    shift = timedelta(days=lag_days)
    for day, y in dependent.points:
        if y == 0:
            continue
        x = by_date.get(day - shift)
        if x is None:
            continue
        xs.append(x)
        ys.append(y)
    if not xs:
        raise EmptySampleError(
            f"no overlapping days between {dependent.metric.value} and "
            f"{covariate.metric.value} at lag {lag_days}"
        )
    return PairedSample(tuple(xs), tuple(ys))


@dataclass(frozen=True)
class FillResult:
    series: DatedSeries
    unresolved: tuple[date, ...]
    error: str | None = None


def fill_missing(series: DatedSeries, store: BackfillSource) -> FillResult:
    """Backfill calendar gaps inside the series range from the store.

    Gap dates the store also lacks are reported in `unresolved`. If the
    store itself fails, the series comes back untouched with the failure
    noted, so callers can proceed on partial data.
    """
    if not series.points:
        raise EmptyInputError("cannot fill an empty series")
    have = dict(series.points)
    first, last = series.points[0][0], series.points[-1][0]
    gaps = []
    day = first
    while day <= last:
        if day not in have:
            gaps.append(day)
        day += timedelta(days=1)
    if not gaps:
        return FillResult(series, ())
    filled = dict(have)
    unresolved: list[date] = []
    for day in gaps:
        try:
            value = store.lookup_value(series.country_code, series.metric, day)
        except PersistenceError as exc:
            return FillResult(series, (), error=str(exc))
        if value is None:
            unresolved.append(day)
        else:
            filled[day] = value
    merged = DatedSeries(
        series.country_code,
        series.metric,
        tuple(sorted(filled.items())),
        series.kind,
    )
    return FillResult(merged, tuple(unresolved))


def window_mean(series: DatedSeries, start: date, end: date) -> float:
    """Mean of values with start <= date <= end; empty window is an error."""
    if end < start:
        raise ValueError(f"window end {end} precedes start {start}")
    inside = [v for d, v in series.points if start <= d <= end]
    if not inside:
        raise EmptyWindowError(
            f"{series.metric.value} has no points in [{start}, {end}]"
        )
    return sum(inside) / len(inside)


def daily_summaries(
    confirmed: DatedSeries,
    deaths: DatedSeries,
    recovered: DatedSeries,
) -> tuple[list[DailySummary], list[str]]:
    """Merge the three cumulative series into per-day summaries.

    Dates are the union of the inputs; a series missing a date carries its
    previous total forward (zero before its first report).
    """
    triple = {
        Metric.CONFIRMED: confirmed,
        Metric.DEATHS: deaths,
        Metric.RECOVERED: recovered,
    }
    code = confirmed.country_code
    for metric, series in triple.items():
        if series.country_code != code:
            raise InconsistentInputError("summaries need a single country")
        if series.metric is not metric:
            raise InconsistentInputError(
                f"expected {metric.value} series, got {series.metric.value}"
            )
        if not series.points:
            raise EmptyInputError(f"{metric.value} series is empty")

    all_dates = sorted({d for s in triple.values() for d in s.dates})
    lookups = {m: dict(s.points) for m, s in triple.items()}
    warnings: list[str] = []
    carried: dict[Metric, float] = {m: 0.0 for m in triple}
    rows: list[DailySummary] = []
    prev: dict[Metric, float] = {m: 0.0 for m in triple}
    for day in all_dates:
        for metric in triple:
            v = lookups[metric].get(day)
            if v is not None:
                carried[metric] = v
        new = {m: carried[m] - prev[m] for m in triple}
        for metric, delta in new.items():
            if delta < 0:
                warnings.append(
                    f"{code}/{metric.value}: negative daily value {delta:g} "
                    f"on {day.isoformat()}"
                )
        rows.append(
            DailySummary(
                country_code=code,
                day=day,
                affected=carried[Metric.CONFIRMED],
                dead=carried[Metric.DEATHS],
                recovered=carried[Metric.RECOVERED],
                newly_affected=new[Metric.CONFIRMED],
                newly_dead=new[Metric.DEATHS],
                newly_recovered=new[Metric.RECOVERED],
            )
        )
        prev = dict(carried)
    return rows, warnings
