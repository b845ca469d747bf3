"""Operator command line: ingest data, calibrate, project, correlate,
report rates, and serve the API.

Every command that produces a machine report writes JSON plus a CSV twin
under <data-dir>/reports/ and is byte-reproducible for identical inputs.
Exit code 0 means success (warnings allowed and listed); any hard error
exits nonzero with the cause on stderr.
"""

from __future__ import annotations

import csv
import json
import socket
import sys
from collections import defaultdict
from datetime import date as _date
from pathlib import Path

import click

from . import timeseries
from .calibration import (
    CalibrationConfig,
    fit,
    fit_result_to_dict,
    load_calibration_config,
)
from .datastore import DataStore, load_country_meta
from .errors import EpiForgeError, PersistenceError
from .scenario import (
    ScenarioConfig,
    ScenarioKind,
    load_delta_overrides,
    project,
    projection_to_dict,
    seed_age_state,
)
from .stats import DEFAULT_ALPHA, Method, run_study
from .timeseries import DatedSeries, Metric, SeriesKind, lag_align

DEFAULT_LAG_DAYS = 5


def _store(data_dir: str) -> DataStore:
    try:
        return DataStore(data_dir)
    except PersistenceError as exc:
        raise click.ClickException(str(exc))


def _reports_dir(store: DataStore) -> Path:
    path = store.root / "reports"
    path.mkdir(exist_ok=True)
    return path


def _write_json(path: Path, payload) -> Path:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _write_csv(path: Path, header: list[str], rows: list[list]) -> Path:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


@click.group()
def main():
    """Epidemic decision-support engine."""


# -- ingest -----------------------------------------------------------------

def _classify(path: Path) -> str:
    with open(path, newline="") as fh:
        header = next(csv.reader(fh), [])
    cols = {c.strip() for c in header}
    if {"confirmed", "deaths", "recovered"} <= cols:
        return "cases"
    if {"temperature_c", "humidity_pct"} <= cols:
        return "covariates"
    if {"name", "population"} <= cols:
        return "metadata"
    raise click.ClickException(f"{path}: unrecognized CSV header {sorted(cols)}")


def _ingest_cases(path: Path, store: DataStore, warnings: list[str]) -> int:
    by_country: dict[str, list[dict]] = defaultdict(list)
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.DictReader(fh), start=2):
            code = (row.get("country_code") or "").strip()
            if not code:
                warnings.append(f"{path.name}:{lineno}: missing country_code, row skipped")
                continue
            try:
                parsed = {
                    "date": _date.fromisoformat(row["date"].strip()),
                    "confirmed": float(row["confirmed"]),
                    "deaths": float(row["deaths"]),
                    "recovered": float(row["recovered"]),
                    "province": (row.get("province") or "").strip(),
                }
            except (KeyError, ValueError) as exc:
                warnings.append(f"{path.name}:{lineno}: {exc}, row skipped")
                continue
            by_country[code].append(parsed)

    stored = 0
    for code in sorted(by_country):
        rows = by_country[code]
        provinces = sorted({r["province"] for r in rows if r["province"]})
        series = {}
        for metric, column in (
            (Metric.CONFIRMED, "confirmed"),
            (Metric.DEATHS, "deaths"),
            (Metric.RECOVERED, "recovered"),
        ):
            if provinces:
                parts = []
                for prov in provinces:
                    pts = sorted(
                        (r["date"], r[column]) for r in rows if r["province"] == prov
                    )
                    parts.append(DatedSeries(code, metric, tuple(pts)))
                merged, agg_warnings = timeseries.aggregate_provinces(parts)
                warnings.extend(agg_warnings)
                series[metric] = merged
            else:
                pts = sorted((r["date"], r[column]) for r in rows)
                series[metric] = DatedSeries(code, metric, tuple(pts))
        summaries, sum_warnings = timeseries.daily_summaries(
            series[Metric.CONFIRMED], series[Metric.DEATHS], series[Metric.RECOVERED]
        )
        warnings.extend(sum_warnings)
        store.bulk_upsert(summaries)
        stored += len(summaries)
    return stored


def _ingest_covariates(path: Path, store: DataStore, warnings: list[str]) -> int:
    by_country: dict[str, dict] = defaultdict(dict)
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.DictReader(fh), start=2):
            code = (row.get("country_code") or "").strip()
            if not code:
                warnings.append(f"{path.name}:{lineno}: missing country_code, row skipped")
                continue
            try:
                day = _date.fromisoformat(row["date"].strip())
                cell = {}
                for col in ("temperature_c", "humidity_pct"):
                    raw = (row.get(col) or "").strip()
                    cell[col] = float(raw) if raw else None
            except (KeyError, ValueError) as exc:
                warnings.append(f"{path.name}:{lineno}: {exc}, row skipped")
                continue
            by_country[code][day] = cell
    stored = 0
    for code in sorted(by_country):
        store.upsert_covariates(code, by_country[code])
        stored += len(by_country[code])
    return stored


@main.command()
@click.argument("paths", nargs=-1, required=True, type=click.Path())
@click.option("--data-dir", default="data", show_default=True, help="Datastore directory.")
def ingest(paths, data_dir):
    """Load case/covariate/metadata CSVs (and fixture directories) into the store.

    Directory arguments named contact_matrices or pyramids are copied in
    verbatim; a .json argument is installed as the live-data fixture.
    """
    import shutil

    store = _store(data_dir)
    warnings: list[str] = []
    counts: dict[str, int] = {}

    # Classify everything up front so metadata lands before case rows,
    # regardless of argument order; unknown-country flagging needs it.
    classified: list[tuple[str, Path]] = []
    for raw in paths:
        path = Path(raw)
        if not path.exists():
            raise click.ClickException(f"input {path} does not exist")
        if path.is_dir():
            if path.name not in ("contact_matrices", "pyramids"):
                raise click.ClickException(
                    f"{path}: only contact_matrices/ and pyramids/ directories are ingestable"
                )
            classified.append(("directory", path))
        elif path.suffix == ".json":
            classified.append(("live", path))
        else:
            classified.append((_classify(path), path))
    order = {"metadata": 0, "directory": 1, "live": 2, "cases": 3, "covariates": 4}
    classified.sort(key=lambda pair: order[pair[0]])

    for kind, path in classified:
        if kind == "directory":
            dest = store.root / path.name
            shutil.copytree(path, dest, dirs_exist_ok=True)
            counts[path.name] = len(list(dest.glob("*.csv")))
        elif kind == "live":
            shutil.copy(path, store.root / "live.json")
            counts["live"] = 1
        elif kind == "cases":
            counts["case rows"] = counts.get("case rows", 0) + _ingest_cases(path, store, warnings)
        elif kind == "covariates":
            counts["covariate rows"] = counts.get("covariate rows", 0) + _ingest_covariates(
                path, store, warnings
            )
        else:
            metas, report = load_country_meta(path)
            warnings.extend(report)
            store.save_country_meta(metas)
            counts["countries"] = counts.get("countries", 0) + len(metas)

    warnings.extend(store.validation_report)
    reports = _reports_dir(store)
    _write_json(reports / "ingest.json", {"counts": counts, "warnings": warnings})
    _write_csv(
        reports / "ingest.csv",
        ["warning"],
        [[w] for w in warnings],
    )
    summary = ", ".join(f"{v} {k}" for k, v in sorted(counts.items()))
    click.echo(f"ingested: {summary}")
    for w in warnings:
        click.echo(f"warning: {w}")
    click.echo(f"report: {reports / 'ingest.json'}")


# -- calibrate ----------------------------------------------------------------

@main.command()
@click.argument("country")
@click.option("--data-dir", default="data", show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), help="Fit configuration JSON.")
@click.option("--strict-literal", is_flag=True, help="Use the absolute-count transmission form.")
def calibrate(country, data_dir, config_path, strict_literal):
    """Fit transmission/recovery/fatality rates to a country's history."""
    store = _store(data_dir)
    history = store.all_summaries(country)
    if not history:
        raise click.ClickException(f"no daily history for {country} in {data_dir}")
    meta = store.countries.get(country)
    if meta is None or not meta.population:
        raise click.ClickException(f"no population metadata for {country}")
    config = load_calibration_config(config_path) if config_path else CalibrationConfig()
    settings = config.settings_for(country, meta.population)
    if strict_literal:
        import dataclasses

        settings = dataclasses.replace(settings, strict_literal=True)
    try:
        result = fit(history, None, settings)
    except EpiForgeError as exc:
        raise click.ClickException(str(exc))
    payload = fit_result_to_dict(result)
    store.save_params(country, payload)
    reports = _reports_dir(store)
    _write_csv(
        reports / f"calibration_{country}.csv",
        ["country", "beta", "lambda_r", "lambda_d", "mu", "gamma", "loss", "iterations", "converged"],
        [
            [
                country,
                result.params.beta,
                result.params.lambda_r,
                result.params.lambda_d,
                result.params.mu,
                result.params.gamma,
                result.loss,
                result.iterations,
                result.converged,
            ]
        ],
    )
    click.echo(
        f"{country}: beta={result.params.beta:.6f} lambda_r={result.params.lambda_r:.6f} "
        f"lambda_d={result.params.lambda_d:.6f} loss={result.loss:.6g} "
        f"iterations={result.iterations} converged={result.converged}"
    )
    click.echo(f"params: {store.root / 'params' / (country + '.json')}")


# -- project --------------------------------------------------------------------

@main.command(name="project")
@click.argument("country")
@click.option("--data-dir", default="data", show_default=True)
@click.option(
    "--scenario",
    "scenario_name",
    default=ScenarioKind.LOCKDOWN_DISTANCING.value,
    show_default=True,
    type=click.Choice([k.value for k in ScenarioKind]),
)
@click.option("--horizon", default=60, show_default=True, type=click.IntRange(min=1))
@click.option("--strict-literal", is_flag=True)
def project_cmd(country, data_dir, scenario_name, horizon, strict_literal):
    """Project daily affected and deaths under a mixing regime."""
    store = _store(data_dir)
    raw = store.load_params(country)
    if raw is None:
        raise click.ClickException(f"{country} is not calibrated; run: epiforge calibrate {country}")
    structure = store.load_age_structure(country)
    if structure is None:
        raise click.ClickException(f"no population pyramid for {country}")
    cm = store.load_contact_matrices()
    if cm is None:
        raise click.ClickException("no contact matrices in the store")
    latest = store.latest_summary(country)
    if latest is None:
        raise click.ClickException(f"no daily history for {country}")

    from .calibration import fit_result_from_dict

    overrides_path = store.root / "scenario_overrides.json"
    overrides = load_delta_overrides(overrides_path) if overrides_path.exists() else None
    kind = ScenarioKind(scenario_name)
    config = ScenarioConfig.preset(kind, horizon=horizon, overrides=overrides)
    try:
        initial = seed_age_state(latest, structure)
        proj = project(
            initial,
            fit_result_from_dict(raw).params,
            cm,
            config,
            structure,
            country_code=country,
            start=latest.day,
            strict_literal=strict_literal,
        )
    except EpiForgeError as exc:
        raise click.ClickException(str(exc))

    reports = _reports_dir(store)
    stem = f"projection_{country}_{kind.value}"
    _write_json(reports / f"{stem}.json", projection_to_dict(proj))
    _write_csv(
        reports / f"{stem}.csv",
        ["day", "daily_affected", "daily_deaths", "cumulative_affected", "cumulative_deaths"],
        [
            [k + 1, proj.daily_affected[k], proj.daily_deaths[k], proj.cumulative_affected[k], proj.cumulative_deaths[k]]
            for k in range(horizon)
        ],
    )
    click.echo(
        f"{country} {kind.value}: {horizon} days, cumulative affected "
        f"{proj.cumulative_affected[-1]:.0f}, cumulative deaths {proj.cumulative_deaths[-1]:.0f}"
    )
    click.echo(f"report: {reports / (stem + '.json')}")


# -- correlate ---------------------------------------------------------------------

_PAIR_COVARIATES = {
    "temperature-affected": Metric.TEMPERATURE,
    "humidity-affected": Metric.HUMIDITY,
}


def _fmt(v) -> str:
    return "" if v is None else f"{v:.6g}"


@main.command()
@click.option("--pair", required=True, type=click.Choice(sorted(_PAIR_COVARIATES)))
@click.option("--data-dir", default="data", show_default=True)
@click.option("--alpha", default=DEFAULT_ALPHA, show_default=True, type=click.FloatRange(min=0, max=1, min_open=True, max_open=True))
@click.option("--lag", default=DEFAULT_LAG_DAYS, show_default=True, type=click.IntRange(min=0), help="Days the covariate leads the case counts.")
def correlate(pair, data_dir, alpha, lag):
    """Correlate a weather factor against newly affected cases per country."""
    store = _store(data_dir)
    metric = _PAIR_COVARIATES[pair]
    samples = {}
    skipped = []
    for code in store.covariate_countries():
        cov = store.covariate_series(code, metric)
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
        except EpiForgeError as exc:
            skipped.append((code, str(exc)))
    try:
        study = run_study(samples, alpha, factor_pair=pair)
    except EpiForgeError as exc:
        raise click.ClickException(str(exc))

    def verdict_of(triple) -> str:
        flag = triple[Method.PEARSON].significant
        if flag is None:
            return "indeterminate"
        return "significant" if flag else "not_significant"

    rows = []
    for code, triple in study.per_country:
        rows.append(
            [
                code,
                _fmt(triple[Method.PEARSON].coefficient),
                _fmt(triple[Method.PEARSON].p_value),
                _fmt(triple[Method.SPEARMAN].coefficient),
                _fmt(triple[Method.SPEARMAN].p_value),
                _fmt(triple[Method.KENDALL].coefficient),
                _fmt(triple[Method.KENDALL].p_value),
                verdict_of(triple),
            ]
        )
    reports = _reports_dir(store)
    stem = f"correlations_{pair}"
    _write_csv(
        reports / f"{stem}.csv",
        ["country", "pearson", "p_pearson", "spearman", "p_spearman", "kendall", "p_kendall", "verdict"],
        rows,
    )
    payload = {
        "pair": pair,
        "alpha": alpha,
        "lag_days": lag,
        "per_country": {
            code: {
                m.value: {
                    "coefficient": triple[m].coefficient,
                    "p_value": triple[m].p_value,
                    "n": triple[m].n,
                    "significant": triple[m].significant,
                }
                for m in Method
            }
            for code, triple in study.per_country
        },
        "medians": {m.value: study.medians[m] for m in Method},
        "ranges": {m.value: list(study.ranges[m]) for m in Method},
        "skipped": [list(s) for s in list(study.skipped) + skipped],
    }
    _write_json(reports / f"{stem}.json", payload)
    click.echo(
        f"{pair} (alpha={alpha}, lag={lag}): "
        + " ".join(f"median_{m.value}={study.medians[m]:.4f}" for m in Method)
    )
    click.echo(f"report: {reports / (stem + '.csv')}")


# -- rates ------------------------------------------------------------------------

@main.command()
@click.argument("country")
@click.option("--data-dir", default="data", show_default=True)
def rates(country, data_dir):
    """Report the death/active/recovery rate families for a country."""
    from . import analytics

    store = _store(data_dir)
    summary = store.latest_summary(country)
    if summary is None:
        raise click.ClickException(f"no data for {country}")
    meta = store.countries.get(country)
    snapshot = analytics.CountrySnapshot(
        country_code=country,
        date=summary.day,
        affected=summary.affected,
        deaths=summary.dead,
        recovered=summary.recovered,
        population=meta.population if meta and meta.population else 0.0,
        area=meta.area if meta and meta.area else 0.0,
        active=summary.active,
    )
    reports_map = {
        "death": analytics.death_rates(snapshot),
        "active": analytics.active_rates(snapshot),
        "recovery": analytics.recovery_rates(snapshot),
    }
    payload = {
        "country": country,
        "date": summary.day.isoformat(),
        "rates": {
            name: {
                "wrt_affected": r.wrt_affected,
                "wrt_recovered": r.wrt_recovered,
                "per_million_population": r.per_million_population,
                "per_area": r.per_area,
            }
            for name, r in reports_map.items()
        },
    }
    reports = _reports_dir(store)
    _write_json(reports / f"rates_{country}.json", payload)
    _write_csv(
        reports / f"rates_{country}.csv",
        ["family", "wrt_affected", "wrt_recovered", "per_million_population", "per_area"],
        [
            [name, _fmt(r.wrt_affected), _fmt(r.wrt_recovered), _fmt(r.per_million_population), _fmt(r.per_area)]
            for name, r in reports_map.items()
        ],
    )
    for name, r in reports_map.items():
        click.echo(
            f"{name}: wrt_affected={_fmt(r.wrt_affected) or 'absent'}% "
            f"wrt_recovered={_fmt(r.wrt_recovered) or 'absent'}% "
            f"per_million={_fmt(r.per_million_population) or 'absent'} "
            f"per_area={_fmt(r.per_area) or 'absent'}"
        )


# -- serve ------------------------------------------------------------------------

@main.command()
@click.option("--data-dir", default="data", show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--ttl", default=3600.0, show_default=True, type=float, help="Live-tier cache TTL seconds.")
@click.option("--strict-literal", is_flag=True)
def serve(data_dir, host, port, ttl, strict_literal):
    """Run the JSON API service."""
    import uvicorn

    from .service import create_app

    data = Path(data_dir)
    if not data.is_dir():
        raise click.ClickException(f"data directory {data} does not exist")
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((host, port))
    except OSError as exc:
        raise click.ClickException(f"cannot bind {host}:{port}: {exc}")
    finally:
        probe.close()
    app = create_app(data, live_ttl=ttl, strict_literal=strict_literal)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
