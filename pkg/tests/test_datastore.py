"""CSV-backed store: durability, validation, and query semantics."""

from datetime import date, timedelta

import pytest

from epiforge.datastore import CountryMeta, DataStore, load_country_meta
from epiforge.errors import InvalidRangeError, PersistenceError
from epiforge.timeseries import DailySummary, Metric

D = date(2020, 1, 22)


def row(day_offset=0, code="QQ", affected=10.0, dead=1.0, recovered=2.0):
    return DailySummary(
        country_code=code,
        day=D + timedelta(days=day_offset),
        affected=affected,
        dead=dead,
        recovered=recovered,
        newly_affected=affected,
        newly_dead=dead,
        newly_recovered=recovered,
    )


def test_read_after_write(tmp_path):
    store = DataStore(tmp_path)
    store.upsert_daily_summary(row())
    got = store.all_summaries("QQ")
    assert len(got) == 1
    assert got[0] == row()


def test_restart_reads_identical_rows(tmp_path):
    first = DataStore(tmp_path)
    rows = [row(k, affected=10.0 + k) for k in range(5)]
    first.bulk_upsert(rows)
    reopened = DataStore(tmp_path)
    assert reopened.all_summaries("QQ") == rows


def test_upsert_last_wins(tmp_path):
    store = DataStore(tmp_path)
    store.upsert_daily_summary(row(affected=10.0))
    store.upsert_daily_summary(row(affected=99.0))
    got = store.all_summaries("QQ")
    assert len(got) == 1
    assert got[0].affected == 99.0


def test_query_range_inclusive(tmp_path):
    store = DataStore(tmp_path)
    store.bulk_upsert([row(k) for k in range(10)])
    got = store.query_range("QQ", D + timedelta(days=2), D + timedelta(days=5))
    assert [r.day for r in got] == [D + timedelta(days=k) for k in (2, 3, 4, 5)]
    with pytest.raises(InvalidRangeError):
        store.query_range("QQ", D + timedelta(days=5), D)


def test_latest_summary(tmp_path):
    store = DataStore(tmp_path)
    assert store.latest_summary("QQ") is None
    store.bulk_upsert([row(k) for k in range(3)])
    assert store.latest_summary("QQ").day == D + timedelta(days=2)


def test_unknown_code_is_flagged_but_stored(tmp_path):
    store = DataStore(tmp_path)
    store.save_country_meta({"QQ": CountryMeta(country_code="QQ", name="Quux")})
    store.upsert_daily_summary(row(code="XX"))
    assert any("XX" in note for note in store.validation_report)
    assert store.all_summaries("XX")  # stored anyway


def test_daily_series_view(tmp_path):
    store = DataStore(tmp_path)
    store.bulk_upsert([row(k, affected=10.0 * (k + 1)) for k in range(4)])
    series = store.daily_series("QQ", Metric.CONFIRMED)
    assert series.values == (10.0, 20.0, 30.0, 40.0)
    assert store.daily_series("QQ", Metric.DEATHS).values == (1.0, 1.0, 1.0, 1.0)
    assert store.daily_series("ZZ", Metric.CONFIRMED) is None


def test_covariates_round_trip(tmp_path):
    store = DataStore(tmp_path)
    store.upsert_covariates(
        "QQ",
        {
            D: {"temperature_c": 10.5, "humidity_pct": 60.0},
            D + timedelta(days=1): {"temperature_c": 11.0, "humidity_pct": None},
        },
    )
    reopened = DataStore(tmp_path)
    temp = reopened.covariate_series("QQ", Metric.TEMPERATURE)
    assert temp.values == (10.5, 11.0)
    hum = reopened.covariate_series("QQ", Metric.HUMIDITY)
    assert hum.values == (60.0,)  # the None day is absent, not zero
    assert reopened.covariate_countries() == ["QQ"]


def test_lookup_value_backfill_source(tmp_path):
    store = DataStore(tmp_path)
    store.upsert_covariates("QQ", {D: {"temperature_c": 9.0, "humidity_pct": 70.0}})
    store.bulk_upsert([row()])
    assert store.lookup_value("QQ", Metric.TEMPERATURE, D) == 9.0
    assert store.lookup_value("QQ", Metric.HUMIDITY, D) == 70.0
    assert store.lookup_value("QQ", Metric.CONFIRMED, D) == 10.0
    assert store.lookup_value("QQ", Metric.TEMPERATURE, D + timedelta(days=9)) is None
    assert store.lookup_value("??", Metric.TEMPERATURE, D) is None


def test_params_round_trip_and_listing(tmp_path):
    store = DataStore(tmp_path)
    assert store.load_params("QQ") is None
    payload = {"params": {"beta": 0.25, "lambda_r": 0.08, "lambda_d": 0.02}}
    store.save_params("QQ", payload)
    assert store.load_params("QQ") == payload
    assert store.calibrated_countries() == ["QQ"]
    # second write replaces atomically
    store.save_params("QQ", {"params": {"beta": 0.3}})
    assert store.load_params("QQ")["params"]["beta"] == 0.3


def test_save_country_meta_round_trip(tmp_path):
    metas = {
        "QQ": CountryMeta(country_code="QQ", name="Quux", population=1e6, area=42.0),
        "RR": CountryMeta(country_code="RR", name="Rarr", gdp=None, mean_humidity=None),
    }
    store = DataStore(tmp_path)
    store.save_country_meta(metas)
    reopened = DataStore(tmp_path)
    assert reopened.countries["QQ"].population == 1e6
    assert reopened.countries["RR"].gdp is None
    assert reopened.countries["RR"].name == "Rarr"


def test_load_country_meta_collects_row_errors(tmp_path):
    path = tmp_path / "countries.csv"
    path.write_text(
        "country_code,name,area,population,gdp,literacy,mean_temperature,mean_rainfall,"
        "mean_humidity,pollution_index,healthcare_index,food_security_index,"
        "hospital_beds_per_10m,population_tests\n"
        "QQ,Quux,10,1000000,,,,,,,,,,\n"
        ",NoCode,1,100,,,,,,,,,,\n"
        "RR,Rarr,5,notanumber,,,,,,,,,,\n"
        "SS,Ess,1,-5,,,,,,,,,,\n"
        "QQ,QuuxAgain,11,2000000,,,,,,,,,,\n"
    )
    metas, report = load_country_meta(path)
    assert set(metas) == {"QQ", "SS"} or set(metas) == {"QQ"}
    assert metas["QQ"].name == "QuuxAgain"  # duplicate: last row wins
    assert any("missing" in r or "code" in r for r in report)
    assert any("notanumber" in r for r in report)
    assert any("duplicate" in r.lower() for r in report)
    assert any("population" in r for r in report)  # the -5 row


def test_fixture_meta_has_absent_cells(fixtures_dir):
    metas, report = load_country_meta(fixtures_dir / "countries.csv")
    assert metas["CC"].mean_humidity is None
    assert metas["CC"].population_tests is None
    assert metas["DD"].gdp is None
    assert metas["AA"].population == 5_000_000
    assert report == []


def test_store_root_must_be_creatable(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("a plain file")
    with pytest.raises(PersistenceError):
        DataStore(blocker / "sub")


def test_writes_are_visible_to_second_instance(tmp_path):
    a = DataStore(tmp_path)
    b_rows = [row(k) for k in range(3)]
    a.bulk_upsert(b_rows)
    b = DataStore(tmp_path)
    assert b.all_summaries("QQ") == b_rows
    daily_file = tmp_path / "daily" / "QQ.csv"
    assert daily_file.exists()
    first_bytes = daily_file.read_bytes()
    # rewriting the same rows must produce identical bytes
    b.bulk_upsert(b_rows)
    assert daily_file.read_bytes() == first_bytes
