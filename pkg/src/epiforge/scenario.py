"""Named mixing regimes and age-structured projections.

A scenario is a delta vector scaling the home/school/work/other contact
matrices plus a reinfection schedule and a horizon. The three shipped
regimes span full lockdown to unrestricted mixing; their exact values are
configuration defaults (overridable), and what the engine guarantees is
the ordering: more mixing never means fewer cumulative infections.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from datetime import date as _date

from .epi_model import (
    AgeSirdModel,
    AgeState,
    AgeStructure,
    ContactMatrices,
    MixingCoefficients,
    ModelParams,
    ReinfectionSchedule,
    integrate,
)
from .errors import InconsistentSeedError
from .timeseries import DailySummary


class ScenarioKind(str, enum.Enum):
    LOCKDOWN_DISTANCING = "lockdown_distancing"
    RELEASED_DISTANCING = "released_distancing"
    RELEASED_NO_DISTANCING = "released_no_distancing"


_PRESET_DELTAS: dict[ScenarioKind, tuple[float, float, float, float]] = {
    ScenarioKind.LOCKDOWN_DISTANCING: (1.0, 0.0, 0.1, 0.1),
    ScenarioKind.RELEASED_DISTANCING: (1.0, 0.5, 0.5, 0.3),
    ScenarioKind.RELEASED_NO_DISTANCING: (1.0, 1.0, 1.0, 1.0),
}


def preset_deltas(kind: ScenarioKind, overrides: dict | None = None) -> MixingCoefficients:
    """Delta vector for a named regime; override-file values win."""
    if overrides and kind.value in overrides:
        return MixingCoefficients(tuple(overrides[kind.value]))
    return MixingCoefficients(_PRESET_DELTAS[kind])


def load_delta_overrides(path) -> dict:
    """Override file: {"<scenario kind>": [d1, d2, d3, d4], ...}."""
    with open(path) as fh:
        raw = json.load(fh)
    for kind, vec in raw.items():
        ScenarioKind(kind)  # unknown kinds fail fast
        if len(vec) != 4:
            raise ValueError(f"{kind}: need 4 delta components, got {len(vec)}")
    return raw


@dataclass(frozen=True)
class ScenarioConfig:
    kind: ScenarioKind
    deltas: MixingCoefficients
    zeta: ReinfectionSchedule = field(default_factory=ReinfectionSchedule)
    horizon: int = 60

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")

    @classmethod
    def preset(
        cls,
        kind: ScenarioKind,
        horizon: int = 60,
        overrides: dict | None = None,
        zeta: ReinfectionSchedule | None = None,
    ) -> "ScenarioConfig":
        return cls(
            kind=kind,
            deltas=preset_deltas(kind, overrides),
            zeta=zeta if zeta is not None else ReinfectionSchedule(),
            horizon=horizon,
        )


@dataclass(frozen=True)
class Projection:
    """Daily new affected/deaths over the horizon plus running totals.

    The cumulative series are prefix sums of the daily ones by
    construction, so the two views never disagree.
    """

    country_code: str
    scenario: ScenarioKind
    start: _date | None
    daily_affected: tuple[float, ...]
    daily_deaths: tuple[float, ...]
    cumulative_affected: tuple[float, ...]
    cumulative_deaths: tuple[float, ...]
    clamp_events: int = 0


def _running_totals(daily: tuple[float, ...]) -> tuple[float, ...]:
    totals = []
    acc = 0.0
    for v in daily:
        acc += v
        totals.append(acc)
    return tuple(totals)


def project(
    initial: AgeState,
    params: ModelParams,
    cm: ContactMatrices,
    config: ScenarioConfig,
    structure: AgeStructure,
    country_code: str = "",
    start: _date | None = None,
    h: float = 0.1,
    strict_literal: bool = False,
) -> Projection:
    """Run the age-structured model under a scenario's effective contacts."""
    model = AgeSirdModel(
        params, structure, cm, config.deltas, zeta=config.zeta, strict_literal=strict_literal
    )
    traj = integrate(model, initial, horizon_days=config.horizon, h=h, t0=start)
    return Projection(
        country_code=country_code,
        scenario=config.kind,
        start=start,
        daily_affected=traj.daily_new_affected,
        daily_deaths=traj.daily_new_deaths,
        cumulative_affected=_running_totals(traj.daily_new_affected),
        cumulative_deaths=_running_totals(traj.daily_new_deaths),
        clamp_events=len(traj.clamp_events),
    )


def seed_age_state(latest: DailySummary, structure: AgeStructure) -> AgeState:
    """Split national counts across classes proportionally to population.

    Age-resolved case data is generally unavailable, so each class gets
    its population share of I, R, and D; S absorbs the remainder.
    """
    for name, v in (
        ("active", latest.active),
        ("recovered", latest.recovered),
        ("dead", latest.dead),
    ):
        if v < 0:
            raise InconsistentSeedError(f"{name} count is negative ({v})")
    total = structure.total
    classes = []
    for idx, n_i in enumerate(structure.populations):
        share = n_i / total
        i_v = latest.active * share
        r_v = latest.recovered * share
        d_v = latest.dead * share
        s_v = n_i - i_v - r_v - d_v
        if s_v < 0:
            raise InconsistentSeedError(
                f"class {idx}: counts exceed population ({n_i})"
            )
        classes.append((s_v, i_v, r_v, d_v))
    return AgeState(tuple(classes))


def projection_to_dict(p: Projection) -> dict:
    """Export shape consumed by the UI and written by the CLI."""
    return {
        "country": p.country_code,
        "scenario": p.scenario.value,
        "start_date": p.start.isoformat() if p.start else None,
        "daily_affected": list(p.daily_affected),
        "daily_deaths": list(p.daily_deaths),
        "cumulative_affected": list(p.cumulative_affected),
        "cumulative_deaths": list(p.cumulative_deaths),
    }
