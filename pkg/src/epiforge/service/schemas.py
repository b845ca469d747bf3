"""Response and error document models for the JSON API."""

from __future__ import annotations

from pydantic import BaseModel


class ErrorBody(BaseModel):
    reason: str
    detail: str | None = None


class Counts(BaseModel):
    affected: float
    dead: float
    recovered: float
    active: float


class RateReportDoc(BaseModel):
    family: str
    wrt_affected: float | None = None
    wrt_recovered: float | None = None
    per_million_population: float | None = None
    per_area: float | None = None


class RatesTriple(BaseModel):
    death: RateReportDoc
    active: RateReportDoc
    recovery: RateReportDoc


class LiveResponse(BaseModel):
    scope: str  # "global" or a country code
    as_of: str | None = None
    stale: bool
    source: str  # "upstream" or "store"
    counts: Counts
    rates: RatesTriple


class RatesResponse(BaseModel):
    country: str
    date: str
    counts: Counts
    rates: RatesTriple


class ProjectionResponse(BaseModel):
    country: str
    scenario: str
    start_date: str | None = None
    horizon: int
    params_digest: str
    daily_affected: list[float]
    daily_deaths: list[float]
    cumulative_affected: list[float]
    cumulative_deaths: list[float]


class CorrelationDoc(BaseModel):
    coefficient: float
    p_value: float | None = None
    n: int
    significant: bool | None = None


class CountryCorrelations(BaseModel):
    country: str
    pearson: CorrelationDoc
    spearman: CorrelationDoc
    kendall: CorrelationDoc


class CorrelationsResponse(BaseModel):
    pair: str
    alpha: float
    lag_days: int
    per_country: list[CountryCorrelations]
    medians: dict[str, float]
    ranges: dict[str, list[float]]
    skipped: list[list[str]]


class CountryDoc(BaseModel):
    country_code: str
    name: str
    area: float | None = None
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


class CountriesResponse(BaseModel):
    countries: list[CountryDoc]


class ContactMatricesResponse(BaseModel):
    m: int
    home: list[list[float]]
    school: list[list[float]]
    work: list[list[float]]
    other: list[list[float]]
