"""Mixing-regime presets and projections."""

import json
from datetime import date

import pytest

from epiforge.calibration import fit_result_from_dict
from epiforge.epi_model import AgeState, MixingCoefficients, ReinfectionSchedule
from epiforge.errors import InconsistentSeedError
from epiforge.datastore import DataStore
from epiforge.scenario import (
    Projection,
    ScenarioConfig,
    ScenarioKind,
    load_delta_overrides,
    preset_deltas,
    project,
    projection_to_dict,
    seed_age_state,
)
from epiforge.timeseries import DailySummary


def test_preset_deltas():
    assert preset_deltas(ScenarioKind.LOCKDOWN_DISTANCING).delta == (1.0, 0.0, 0.1, 0.1)
    assert preset_deltas(ScenarioKind.RELEASED_DISTANCING).delta == (1.0, 0.5, 0.5, 0.3)
    assert preset_deltas(ScenarioKind.RELEASED_NO_DISTANCING).delta == (1.0, 1.0, 1.0, 1.0)


def test_preset_overrides(tmp_path):
    path = tmp_path / "overrides.json"
    path.write_text(json.dumps({"lockdown_distancing": [1.0, 0.0, 0.05, 0.05]}))
    overrides = load_delta_overrides(path)
    got = preset_deltas(ScenarioKind.LOCKDOWN_DISTANCING, overrides)
    assert got.delta == (1.0, 0.0, 0.05, 0.05)
    # untouched presets keep their shipped values
    assert preset_deltas(ScenarioKind.RELEASED_DISTANCING, overrides).delta == (1.0, 0.5, 0.5, 0.3)


def test_override_validation(tmp_path):
    bad_kind = tmp_path / "bad_kind.json"
    bad_kind.write_text(json.dumps({"weekend_lockdown": [1, 1, 1, 1]}))
    with pytest.raises(ValueError):
        load_delta_overrides(bad_kind)
    bad_len = tmp_path / "bad_len.json"
    bad_len.write_text(json.dumps({"lockdown_distancing": [1, 1, 1]}))
    with pytest.raises(ValueError):
        load_delta_overrides(bad_len)


def test_scenario_config_preset():
    config = ScenarioConfig.preset(ScenarioKind.RELEASED_DISTANCING, horizon=30)
    assert config.kind is ScenarioKind.RELEASED_DISTANCING
    assert config.horizon == 30
    assert isinstance(config.deltas, MixingCoefficients)
    assert isinstance(config.zeta, ReinfectionSchedule)
    with pytest.raises(ValueError):
        ScenarioConfig.preset(ScenarioKind.RELEASED_DISTANCING, horizon=0)


def summary(affected=1000.0, dead=50.0, recovered=300.0):
    return DailySummary(
        country_code="AA",
        day=date(2020, 4, 20),
        affected=affected,
        dead=dead,
        recovered=recovered,
        newly_affected=10.0,
        newly_dead=1.0,
        newly_recovered=5.0,
    )


def test_seed_age_state_splits_proportionally(store):
    structure = store.load_age_structure("AA")
    latest = summary()
    state = seed_age_state(latest, structure)
    assert state.m == structure.m
    totals = state.totals()
    # class totals must add back to the national counts
    assert totals[1] == pytest.approx(latest.active, rel=1e-9)
    assert totals[2] == pytest.approx(latest.recovered, rel=1e-9)
    assert totals[3] == pytest.approx(latest.dead, rel=1e-9)
    assert sum(totals) == pytest.approx(structure.total, rel=1e-9)
    # shares follow the pyramid
    share0 = structure.populations[0] / structure.total
    assert state.classes[0][1] == pytest.approx(latest.active * share0, rel=1e-9)


def test_seed_age_state_rejects_oversized_counts(store):
    structure = store.load_age_structure("AA")
    latest = summary(affected=2 * structure.total)
    with pytest.raises(InconsistentSeedError):
        seed_age_state(latest, structure)


def test_projection_internal_consistency(store):
    structure = store.load_age_structure("AA")
    cm = store.load_contact_matrices()
    params = fit_result_from_dict(store.load_params("AA")).params
    latest = store.latest_summary("AA")
    config = ScenarioConfig.preset(ScenarioKind.LOCKDOWN_DISTANCING, horizon=30)
    proj = project(
        seed_age_state(latest, structure),
        params,
        cm,
        config,
        structure,
        country_code="AA",
        start=latest.day,
    )
    assert isinstance(proj, Projection)
    assert len(proj.daily_affected) == 30
    assert len(proj.cumulative_affected) == 30
    # cumulative series is the prefix sum of the daily one
    running = 0.0
    for daily, cum in zip(proj.daily_affected, proj.cumulative_affected):
        running += daily
        assert cum == pytest.approx(running, rel=1e-12)
    running = 0.0
    for daily, cum in zip(proj.daily_deaths, proj.cumulative_deaths):
        running += daily
        assert cum == pytest.approx(running, rel=1e-12)
    assert all(v >= 0 for v in proj.daily_affected)
    assert isinstance(proj.clamp_events, int)


def test_preset_ordering_on_calibrated_countries(store):
    cm = store.load_contact_matrices()
    for code in ("AA", "BB"):
        structure = store.load_age_structure(code)
        params = fit_result_from_dict(store.load_params(code)).params
        latest = store.latest_summary(code)
        initial = seed_age_state(latest, structure)
        totals = {}
        for kind in ScenarioKind:
            config = ScenarioConfig.preset(kind, horizon=60)
            proj = project(initial, params, cm, config, structure, country_code=code)
            totals[kind] = proj.cumulative_affected[-1]
        assert (
            totals[ScenarioKind.LOCKDOWN_DISTANCING]
            <= totals[ScenarioKind.RELEASED_DISTANCING]
            <= totals[ScenarioKind.RELEASED_NO_DISTANCING]
        )


def test_projection_to_dict_round_keys(store):
    structure = store.load_age_structure("AA")
    cm = store.load_contact_matrices()
    params = fit_result_from_dict(store.load_params("AA")).params
    latest = store.latest_summary("AA")
    config = ScenarioConfig.preset(ScenarioKind.RELEASED_DISTANCING, horizon=7)
    proj = project(
        seed_age_state(latest, structure), params, cm, config, structure,
        country_code="AA", start=latest.day,
    )
    doc = projection_to_dict(proj)
    assert doc["country"] == "AA"
    assert doc["scenario"] == "released_distancing"
    assert doc["start_date"] == latest.day.isoformat()
    assert len(doc["daily_affected"]) == 7
    assert len(doc["cumulative_deaths"]) == 7
    json.dumps(doc)  # must be serializable as-is
