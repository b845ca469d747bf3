"""HTTP JSON API over the engine, organized in three payload tiers.

Live counts come from the fetcher with a TTL cache in front and the
datastore as stale fallback. Predictions are memoized by inputs (country,
scenario, params digest, horizon) and served byte-identically. Country
metadata and contact matrices are fixed for the process lifetime. GET
handlers never write to the store.

Error bodies always carry a machine-readable `reason` so clients can
distinguish stale/uncalibrated/unavailable states.
"""

from __future__ import annotations

import hashlib
import json
import time
from datetime import date as _date
from pathlib import Path

from fastapi import FastAPI, Query, Response
from fastapi.responses import JSONResponse

from .. import analytics
from ..calibration import fit_result_from_dict
from ..datastore import DataStore
from ..errors import (
    EmptySampleError,
    EmptyStudyError,
    FetchError,
    NumericalBlowupError,
)
from ..fetcher import FixtureFetcher, LiveFetcher
from ..scenario import (
    ScenarioConfig,
    ScenarioKind,
    load_delta_overrides,
    project,
    seed_age_state,
)
from ..stats import DEFAULT_ALPHA, Method, run_study
from ..timeseries import DatedSeries, Metric, SeriesKind, lag_align
from .cache import ComputeMemo, TTLCache
from . import schemas

DEFAULT_LAG_DAYS = 5
DEFAULT_LIVE_TTL = 3600.0

_PAIR_COVARIATES = {
    "temperature-affected": Metric.TEMPERATURE,
    "humidity-affected": Metric.HUMIDITY,
}


def params_digest(payload: dict) -> str:
    """Stable short digest of a fitted-parameter document."""
    canonical = json.dumps(payload.get("params", payload), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]


def _error(status: int, reason: str, detail: str | None = None) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content=schemas.ErrorBody(reason=reason, detail=detail).model_dump(),
    )


def _rates_triple(snapshot: analytics.CountrySnapshot) -> schemas.RatesTriple:
    def doc(report):
        return schemas.RateReportDoc(
            family=report.family.value,
            wrt_affected=report.wrt_affected,
            wrt_recovered=report.wrt_recovered,
            per_million_population=report.per_million_population,
            per_area=report.per_area,
        )

    return schemas.RatesTriple(
        death=doc(analytics.death_rates(snapshot)),
        active=doc(analytics.active_rates(snapshot)),
        recovery=doc(analytics.recovery_rates(snapshot)),
    )


def create_app(
    data_dir,
    fetcher: LiveFetcher | None = None,
    live_ttl: float = DEFAULT_LIVE_TTL,
    clock=time.monotonic,
    alpha: float = DEFAULT_ALPHA,
    lag_days: int = DEFAULT_LAG_DAYS,
    strict_literal: bool = False,
) -> FastAPI:
    store = DataStore(data_dir)
    if fetcher is None:
        fetcher = FixtureFetcher(Path(data_dir) / "live.json")
    overrides_path = Path(data_dir) / "scenario_overrides.json"
    delta_overrides = load_delta_overrides(overrides_path) if overrides_path.exists() else None

    app = FastAPI(title="epiforge", docs_url=None, redoc_url=None)
    app.state.store = store
    live_cache = TTLCache(live_ttl, clock=clock)
    prediction_memo = ComputeMemo()
    static_cache: dict[str, bytes] = {}

    def snapshot_for(code: str, day: _date, counts: dict) -> analytics.CountrySnapshot:
        meta = store.countries.get(code)
        return analytics.CountrySnapshot(
            country_code=code,
            date=day,
            affected=counts["affected"],
            deaths=counts["dead"],
            recovered=counts["recovered"],
            population=(meta.population if meta and meta.population else 0.0),
            area=(meta.area if meta and meta.area else 0.0),
            active=counts["active"],
        )

    def live_payload_from_doc(scope: str, doc: dict) -> dict | None:
        section = doc["global"] if scope == "global" else doc["countries"].get(scope)
        if section is None:
            return None
        affected = float(section["affected"])
        dead = float(section["dead"])
        recovered = float(section["recovered"])
        active = float(section.get("active", affected - dead - recovered))
        counts = {"affected": affected, "dead": dead, "recovered": recovered, "active": active}
        today = _date.today()
        code = "" if scope == "global" else scope
        snapshot = snapshot_for(code, today, counts)
        return schemas.LiveResponse(
            scope=scope,
            as_of=doc.get("as_of"),
            stale=False,
            source="upstream",
            counts=schemas.Counts(**counts),
            rates=_rates_triple(snapshot),
        ).model_dump()

    def live_payload_from_store(scope: str) -> dict | None:
        if scope == "global":
            rows = [store.latest_summary(c) for c in store.countries_with_history()]
            rows = [r for r in rows if r is not None]
            if not rows:
                return None
            counts = {
                "affected": sum(r.affected for r in rows),
                "dead": sum(r.dead for r in rows),
                "recovered": sum(r.recovered for r in rows),
                "active": sum(r.active for r in rows),
            }
            day = max(r.day for r in rows)
            snapshot = snapshot_for("", day, counts)
        else:
            row = store.latest_summary(scope)
            if row is None:
                return None
            counts = {
                "affected": row.affected,
                "dead": row.dead,
                "recovered": row.recovered,
                "active": row.active,
            }
            day = row.day
            snapshot = snapshot_for(scope, day, counts)
        return schemas.LiveResponse(
            scope=scope,
            as_of=day.isoformat(),
            stale=True,
            source="store",
            counts=schemas.Counts(**counts),
            rates=_rates_triple(snapshot),
        ).model_dump()

    def serve_live(scope: str):
        cached = live_cache.get(scope)
        if cached is not None:
            return JSONResponse(cached)
        try:
            doc = fetcher.fetch()
        except FetchError as exc:
            payload = live_payload_from_store(scope)
            if payload is None:
                return _error(503, "unavailable", f"upstream failed and store is empty: {exc}")
            return JSONResponse(payload)
        payload = live_payload_from_doc(scope, doc)
        if payload is None:
            payload = live_payload_from_store(scope)
            if payload is None:
                return _error(404, "unknown_country", f"{scope} not in upstream or store")
            return JSONResponse(payload)
        live_cache.put(scope, payload)
        return JSONResponse(payload)

    @app.get("/api/live/global")
    def live_global():
        return serve_live("global")

    @app.get("/api/live/country/{code}")
    def live_country(code: str):
        return serve_live(code)

    @app.get("/api/rates/{code}")
    def rates(code: str):
        summary = store.latest_summary(code)
        if summary is None:
            if code in store.countries:
                return _error(404, "no_data", f"no daily history for {code}")
            return _error(404, "unknown_country", code)
        counts = {
            "affected": summary.affected,
            "dead": summary.dead,
            "recovered": summary.recovered,
            "active": summary.active,
        }
        try:
            snapshot = snapshot_for(code, summary.day, counts)
        except Exception as exc:
            return _error(500, "invalid_snapshot", str(exc))
        return schemas.RatesResponse(
            country=code,
            date=summary.day.isoformat(),
            counts=schemas.Counts(**counts),
            rates=_rates_triple(snapshot),
        )

    @app.get("/api/predictions/{code}")
    def predictions(
        code: str,
        scenario: str = Query("lockdown_distancing"),
        horizon: int = Query(60, ge=1, le=365),
    ):
        try:
            kind = ScenarioKind(scenario)
        except ValueError:
            return _error(404, "unknown_scenario", scenario)
        raw_params = store.load_params(code)
        if raw_params is None:
            return _error(409, "uncalibrated", f"no fitted parameters for {code}; run calibrate")
        structure = store.load_age_structure(code)
        if structure is None:
            return _error(409, "missing_pyramid", f"no population pyramid for {code}")
        cm = store.load_contact_matrices()
        if cm is None:
            return _error(409, "missing_contact_matrices", "contact_matrices/ is empty")
        latest = store.latest_summary(code)
        if latest is None:
            return _error(409, "no_history", f"no daily history for {code}")

        digest = params_digest(raw_params)
        key = (code, kind.value, digest, horizon)

        def compute() -> bytes:
            result = fit_result_from_dict(raw_params)
            initial = seed_age_state(latest, structure)
            config = ScenarioConfig.preset(kind, horizon=horizon, overrides=delta_overrides)
            proj = project(
                initial,
                result.params,
                cm,
                config,
                structure,
                country_code=code,
                start=latest.day,
                strict_literal=strict_literal,
            )
            doc = schemas.ProjectionResponse(
                country=code,
                scenario=kind.value,
                start_date=latest.day.isoformat(),
                horizon=horizon,
                params_digest=digest,
                daily_affected=list(proj.daily_affected),
                daily_deaths=list(proj.daily_deaths),
                cumulative_affected=list(proj.cumulative_affected),
                cumulative_deaths=list(proj.cumulative_deaths),
            )
            return doc.model_dump_json().encode()

        try:
            body = prediction_memo.get_or_compute(key, compute)
        except NumericalBlowupError as exc:
            return _error(500, "integration_failure", str(exc))
        return Response(content=body, media_type="application/json")

    @app.get("/api/correlations")
    def correlations(
        pair: str = Query(...),
        alpha_q: float = Query(alpha, alias="alpha", gt=0.0, lt=1.0),
        lag: int = Query(lag_days, ge=0),
    ):
        covariate_metric = _PAIR_COVARIATES.get(pair)
        if covariate_metric is None:
            return _error(404, "unknown_pair", f"{pair} (known: {sorted(_PAIR_COVARIATES)})")
        samples = {}
        lag_skipped: list[list[str]] = []
        for code in store.covariate_countries():
            cov = store.covariate_series(code, covariate_metric)
            rows = store.all_summaries(code)
            if cov is None or not rows:
                continue
            dependent = DatedSeries(
                code,
                Metric.CONFIRMED,
                tuple((s.day, s.newly_affected) for s in rows),
                SeriesKind.INCIDENT,
            )
            try:
                samples[code] = lag_align(dependent, cov, lag)
            except EmptySampleError as exc:
                lag_skipped.append([code, str(exc)])
        try:
            study = run_study(samples, alpha_q, factor_pair=pair)
        except EmptyStudyError as exc:
            return _error(503, "empty_study", str(exc))

        def doc(result):
            return schemas.CorrelationDoc(
                coefficient=result.coefficient,
                p_value=result.p_value,
                n=result.n,
                significant=result.significant,
            )

        per_country = [
            schemas.CountryCorrelations(
                country=code,
                pearson=doc(triple[Method.PEARSON]),
                spearman=doc(triple[Method.SPEARMAN]),
                kendall=doc(triple[Method.KENDALL]),
            )
            for code, triple in study.per_country
        ]
        return schemas.CorrelationsResponse(
            pair=pair,
            alpha=alpha_q,
            lag_days=lag,
            per_country=per_country,
            medians={m.value: v for m, v in study.medians.items()},
            ranges={m.value: list(v) for m, v in study.ranges.items()},
            skipped=[[c, r] for c, r in study.skipped] + lag_skipped,
        )

    @app.get("/api/static/countries")
    def static_countries():
        if not store.countries:
            return _error(503, "empty_store", "no country metadata loaded")
        body = static_cache.get("countries")
        if body is None:
            doc = schemas.CountriesResponse(
                countries=[
                    schemas.CountryDoc(**vars(store.countries[code]))
                    for code in sorted(store.countries)
                ]
            )
            body = doc.model_dump_json().encode()
            static_cache["countries"] = body
        return Response(
            content=body,
            media_type="application/json",
            headers={"Cache-Control": "public, max-age=31536000, immutable"},
        )

    @app.get("/api/static/contact-matrices")
    def static_contact_matrices():
        body = static_cache.get("contact_matrices")
        if body is None:
            cm = store.load_contact_matrices()
            if cm is None:
                return _error(503, "empty_store", "contact_matrices/ is empty")
            doc = schemas.ContactMatricesResponse(
                m=cm.m,
                home=[list(r) for r in cm.home],
                school=[list(r) for r in cm.school],
                work=[list(r) for r in cm.work],
                other=[list(r) for r in cm.other],
            )
            body = doc.model_dump_json().encode()
            static_cache["contact_matrices"] = body
        return Response(
            content=body,
            media_type="application/json",
            headers={"Cache-Control": "public, max-age=31536000, immutable"},
        )

    return app
