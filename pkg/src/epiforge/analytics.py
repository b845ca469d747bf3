"""Per-country rate families over a single day's counts.

Each family (death, active, recovery) reports percentages against the
affected total and against closed cases, plus per-million-population and
per-area figures. A rate whose denominator is zero is reported as absent rather
than zero so downstream plots show gaps, not fake lows.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from datetime import date as _date

from .errors import InvalidSnapshotError, UndefinedRateError


class RateFamily(str, enum.Enum):
    DEATH = "death"
    ACTIVE = "active"
    RECOVERY = "recovery"


@dataclass(frozen=True)
class CountrySnapshot:
    """One country's totals on one day.

    `active` may be omitted and is then derived as
    affected - deaths - recovered. `area` is in units of 100 km².
    """

    country_code: str
    date: _date
    affected: float
    deaths: float
    recovered: float
    population: float
    area: float
    active: float | None = None

    def __post_init__(self):
        if self.active is None:
            object.__setattr__(
                self, "active", self.affected - self.deaths - self.recovered
            )
        for name in ("affected", "deaths", "recovered", "active", "population", "area"):
            v = getattr(self, name)
            if v < 0:
                raise InvalidSnapshotError(
                    f"{self.country_code} {self.date}: {name} is negative ({v})"
                )


@dataclass(frozen=True)
class RateReport:
    family: RateFamily
    wrt_affected: float | None
    wrt_recovered: float | None
    per_million_population: float | None
    per_area: float | None


def _pct(numerator: float, denominator: float) -> float | None:
    if denominator == 0:
        return None
    return numerator / denominator * 100.0


def _per(numerator: float, denominator: float) -> float | None:
    if denominator == 0:
        return None
    return numerator / denominator


def death_rates(s: CountrySnapshot) -> RateReport:
    """Deaths against affected, closed cases, population, and area."""
    return RateReport(
        family=RateFamily.DEATH,
        wrt_affected=_pct(s.deaths, s.affected),
        wrt_recovered=_pct(s.deaths, s.deaths + s.recovered),
        per_million_population=_per(s.deaths, s.population / 1e6),
        per_area=_per(s.deaths, s.area),
    )


def active_rates(s: CountrySnapshot) -> RateReport:
    """Actives against affected, actives+recovered, population, and area."""
    return RateReport(
        family=RateFamily.ACTIVE,
        wrt_affected=_pct(s.active, s.affected),
        wrt_recovered=_pct(s.active, s.active + s.recovered),
        per_million_population=_per(s.active, s.population / 1e6),
        per_area=_per(s.active, s.area),
    )


def recovery_rates(s: CountrySnapshot) -> RateReport:
    """Recoveries against affected, population, and area; no closed-case form."""
    return RateReport(
        family=RateFamily.RECOVERY,
        wrt_affected=_pct(s.recovered, s.affected),
        wrt_recovered=None,
        per_million_population=_per(s.recovered, s.population / 1e6),
        per_area=_per(s.recovered, s.area),
    )


def simple_death_rate(deaths: float, affected: float) -> float:
    """deaths/affected as a plain ratio; callers apply the x100 convention."""
    if deaths < 0 or affected < 0:
        raise InvalidSnapshotError(f"negative counts: deaths={deaths}, affected={affected}")
    if affected == 0:
        raise UndefinedRateError("death rate undefined with zero affected")
    return deaths / affected
