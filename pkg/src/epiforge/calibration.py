"""Fit (beta, lambda_r, lambda_d) to a country's daily history.

The scalar SIRD model is matched against active, recovered, and dead
series simultaneously under a squared relative-error loss. Search is a
derivative-free simplex over the log of the three rates, so positivity
holds by construction. Birth and natural death rates come from
configuration; they are demographic facts, not epidemic unknowns.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import date as _date
from datetime import timedelta

from .epi_model import CompartmentState, ModelParams, SirdModel, integrate
from .errors import (
    EmptyInputError,
    InsufficientHistoryError,
    InvalidPopulationError,
    NumericalBlowupError,
)
from .timeseries import DailySummary

MIN_HISTORY_DAYS = 14
BLOWUP_PENALTY = 1e18
DEFAULT_GUESS = (0.3, 0.05, 0.01)

# fallback starts for when the primary guess lands in the wrong basin;
# the second sits in the subcritical corner (beta < lambda_r + lambda_d)
# where decay-only histories mislead the simplex
EXTRA_STARTS = ((0.12, 0.18, 0.04), (0.5, 0.08, 0.02))
EARLY_EXIT_LOSS = 1e-9


@dataclass(frozen=True)
class CalibrationSettings:
    """Everything one country's fit needs besides its history."""

    population: float
    mu: float = 0.0
    gamma: float = 0.0
    step_size: float = 0.25
    tolerance: float = 1e-8
    max_iterations: int = 2000
    initial_guess: tuple[float, float, float] = DEFAULT_GUESS
    strict_literal: bool = False

    def __post_init__(self):
        if self.population <= 0:
            raise InvalidPopulationError(f"population must be > 0, got {self.population}")
        if self.step_size <= 0:
            raise ValueError(f"step_size must be > 0, got {self.step_size}")


@dataclass(frozen=True)
class CalibrationConfig:
    """Parsed fit-configuration file; vital rates resolved per country."""

    initial_guess: tuple[float, float, float] = DEFAULT_GUESS
    max_iterations: int = 2000
    tolerance: float = 1e-8
    step_size: float = 0.25
    vital: dict = field(default_factory=dict)  # country code -> {"mu": .., "gamma": ..}

    def settings_for(self, country_code: str, population: float) -> CalibrationSettings:
        rates = self.vital.get(country_code, self.vital.get("default", {}))
        return CalibrationSettings(
            population=population,
            mu=float(rates.get("mu", 0.0)),
            gamma=float(rates.get("gamma", 0.0)),
            step_size=self.step_size,
            tolerance=self.tolerance,
            max_iterations=self.max_iterations,
            initial_guess=self.initial_guess,
        )


def load_calibration_config(path) -> CalibrationConfig:
    with open(path) as fh:
        raw = json.load(fh)
    guess = raw.get("initial_guess", {})
    if isinstance(guess, dict):
        triple = (
            float(guess.get("beta", DEFAULT_GUESS[0])),
            float(guess.get("lambda_r", DEFAULT_GUESS[1])),
            float(guess.get("lambda_d", DEFAULT_GUESS[2])),
        )
    else:
        triple = tuple(float(v) for v in guess)
    return CalibrationConfig(
        initial_guess=triple,
        max_iterations=int(raw.get("max_iterations", 2000)),
        tolerance=float(raw.get("tolerance", 1e-8)),
        step_size=float(raw.get("step_size", 0.25)),
        vital=raw.get("vital", {}),
    )


@dataclass(frozen=True)
class FitResult:
    params: ModelParams
    loss: float
    iterations: int
    converged: bool
    loss_history: tuple[float, ...]
    residuals: dict  # compartment -> tuple of (model - data) per day


def initial_state_from(history: list[DailySummary], population: float) -> CompartmentState:
    first = history[0]
    s0 = population - first.active - first.recovered - first.dead
    if s0 < 0:
        raise InvalidPopulationError(
            f"counts on {first.day} exceed population {population}"
        )
    return CompartmentState(s0, first.active, first.recovered, first.dead)


def _model_series(
    params: ModelParams, initial: CompartmentState, days: int, settings: CalibrationSettings
):
    model = SirdModel(params, settings.population, zeta=0.0, strict_literal=settings.strict_literal)
    traj = integrate(model, initial, horizon_days=days, h=settings.step_size)
    return traj.states


def objective(
    params: ModelParams,
    history: list[DailySummary],
    initial: CompartmentState,
    settings: CalibrationSettings,
) -> float:
    """Squared relative error against active, recovered, and dead series.

    Each term is ((model - data)/(data + 1))^2; the +1 keeps zero-count
    early days from dividing by zero while still weighting them. A blown
    up integration scores a large finite penalty so the search can back
    away instead of dying.
    """
    if len(history) < MIN_HISTORY_DAYS:
        raise InsufficientHistoryError(
            f"need at least {MIN_HISTORY_DAYS} days of history, got {len(history)}"
        )
    if all(row.affected == 0 for row in history):
        raise EmptyInputError("history contains no cases to fit")
    try:
        states = _model_series(params, initial, len(history) - 1, settings)
    except NumericalBlowupError:
        return BLOWUP_PENALTY
    loss = 0.0
    for k, row in enumerate(history):
        _, i_m, r_m, d_m = states[k][:4]
        for model_v, data_v in ((i_m, row.active), (r_m, row.recovered), (d_m, row.dead)):
            term = (model_v - data_v) / (data_v + 1.0)
            loss += term * term
    if not math.isfinite(loss):
        return BLOWUP_PENALTY
    return loss


def _nelder_mead(f, x0: list[float], tolerance: float, max_iterations: int):
    """Minimize f over R^n; returns (best_x, best_f, iterations, converged, history).

    Standard coefficients: reflection 1, expansion 2, contraction 0.5,
    shrink 0.5. Convergence when either the vertex spread or the value
    spread of the simplex drops below tolerance.
    """
    n = len(x0)
    simplex = [list(x0)]
    for i in range(n):
        v = list(x0)
        v[i] += 0.5
        simplex.append(v)
    fvals = [f(v) for v in simplex]
    history = [min(fvals)]
    iterations = 0
    converged = False

    while True:
        order = sorted(range(n + 1), key=lambda k: fvals[k])
        simplex = [simplex[k] for k in order]
        fvals = [fvals[k] for k in order]

        x_spread = max(
            abs(simplex[i][j] - simplex[0][j]) for i in range(1, n + 1) for j in range(n)
        )
        f_spread = fvals[-1] - fvals[0]
        if x_spread < tolerance or f_spread < tolerance:
            converged = True
            break
        if iterations >= max_iterations:
            break
        iterations += 1

        centroid = [sum(simplex[i][j] for i in range(n)) / n for j in range(n)]
        worst = simplex[-1]
        reflected = [centroid[j] + (centroid[j] - worst[j]) for j in range(n)]
        f_r = f(reflected)

        if fvals[0] <= f_r < fvals[-2]:
            simplex[-1], fvals[-1] = reflected, f_r
        elif f_r < fvals[0]:
            expanded = [centroid[j] + 2.0 * (centroid[j] - worst[j]) for j in range(n)]
            f_e = f(expanded)
            if f_e < f_r:
                simplex[-1], fvals[-1] = expanded, f_e
            else:
                simplex[-1], fvals[-1] = reflected, f_r
        else:
            if f_r < fvals[-1]:
                contracted = [centroid[j] + 0.5 * (reflected[j] - centroid[j]) for j in range(n)]
            else:
                contracted = [centroid[j] + 0.5 * (worst[j] - centroid[j]) for j in range(n)]
            f_c = f(contracted)
            if f_c < min(f_r, fvals[-1]):
                simplex[-1], fvals[-1] = contracted, f_c
            else:
                best = simplex[0]
                for i in range(1, n + 1):
                    simplex[i] = [best[j] + 0.5 * (simplex[i][j] - best[j]) for j in range(n)]
                    fvals[i] = f(simplex[i])
        history.append(min(history[-1], min(fvals)))

    best_idx = min(range(n + 1), key=lambda k: fvals[k])
    return simplex[best_idx], fvals[best_idx], iterations, converged, history


def fit(
    history: list[DailySummary],
    initial_guess: tuple[float, float, float] | None,
    settings: CalibrationSettings,
) -> FitResult:
    """Recover (beta, lambda_r, lambda_d) from history by simplex search.

    Deterministic for fixed inputs. Non-convergence is a result, not an
    exception: the best parameters seen are returned with converged=False.
    """
    guess = initial_guess if initial_guess is not None else settings.initial_guess
    if any(g <= 0 for g in guess):
        raise ValueError(f"initial guess must be positive, got {guess}")
    initial = initial_state_from(history, settings.population)

    def loss_at(logx: list[float]) -> float:
        params = ModelParams(
            beta=math.exp(logx[0]),
            lambda_r=math.exp(logx[1]),
            lambda_d=math.exp(logx[2]),
            mu=settings.mu,
            gamma=settings.gamma,
        )
        return objective(params, history, initial, settings)

    best_x = None
    best_f = math.inf
    converged = False
    iterations = 0
    history_vals: list[float] = []
    for start in (guess, *EXTRA_STARTS):
        x0 = [math.log(g) for g in start]
        run_x, run_f, run_iters, run_conv, run_hist = _nelder_mead(
            loss_at, x0, settings.tolerance, settings.max_iterations
        )
        iterations += run_iters
        floor = history_vals[-1] if history_vals else math.inf
        history_vals.extend(min(floor, v) for v in run_hist)
        if run_f < best_f:
            best_x, best_f, converged = run_x, run_f, run_conv
        if best_f < EARLY_EXIT_LOSS:
            break
    params = ModelParams(
        beta=math.exp(best_x[0]),
        lambda_r=math.exp(best_x[1]),
        lambda_d=math.exp(best_x[2]),
        mu=settings.mu,
        gamma=settings.gamma,
    )
    states = _model_series(params, initial, len(history) - 1, settings)
    residuals = {
        "active": tuple(states[k][1] - row.active for k, row in enumerate(history)),
        "recovered": tuple(states[k][2] - row.recovered for k, row in enumerate(history)),
        "dead": tuple(states[k][3] - row.dead for k, row in enumerate(history)),
    }
    return FitResult(
        params=params,
        loss=best_f,
        iterations=iterations,
        converged=converged,
        loss_history=tuple(history_vals),
        residuals=residuals,
    )


def synthesize_history(
    params: ModelParams,
    population: float,
    initial: CompartmentState,
    days: int,
    country_code: str = "SYN",
    start: _date = _date(2020, 1, 22),
    step_size: float = 0.25,
) -> list[DailySummary]:
    """Model-generated history for round-trip tests and fixtures."""
    model = SirdModel(params, population, zeta=0.0)
    traj = integrate(model, initial, horizon_days=days, h=step_size)
    rows: list[DailySummary] = []
    prev_affected = prev_dead = prev_recovered = 0.0
    for k, flat in enumerate(traj.states):
        _, i_v, r_v, d_v = flat[:4]
        affected = i_v + r_v + d_v
        rows.append(
            DailySummary(
                country_code=country_code,
                day=start + timedelta(days=k),
                affected=affected,
                dead=d_v,
                recovered=r_v,
                newly_affected=affected - prev_affected if k else affected,
                newly_dead=d_v - prev_dead if k else d_v,
                newly_recovered=r_v - prev_recovered if k else r_v,
            )
        )
        prev_affected, prev_dead, prev_recovered = affected, d_v, r_v
    return rows


def fit_result_to_dict(result: FitResult) -> dict:
    """JSON-ready form, stable key order for byte-identical reports."""
    return {
        "params": {
            "beta": result.params.beta,
            "lambda_r": result.params.lambda_r,
            "lambda_d": result.params.lambda_d,
            "mu": result.params.mu,
            "gamma": result.params.gamma,
        },
        "loss": result.loss,
        "iterations": result.iterations,
        "converged": result.converged,
        "loss_history": list(result.loss_history),
        "residuals": {k: list(v) for k, v in result.residuals.items()},
    }


def fit_result_from_dict(raw: dict) -> FitResult:
    p = raw["params"]
    return FitResult(
        params=ModelParams(
            beta=p["beta"],
            lambda_r=p["lambda_r"],
            lambda_d=p["lambda_d"],
            mu=p.get("mu", 0.0),
            gamma=p.get("gamma", 0.0),
        ),
        loss=raw["loss"],
        iterations=raw["iterations"],
        converged=raw["converged"],
        loss_history=tuple(raw.get("loss_history", ())),
        residuals={k: tuple(v) for k, v in raw.get("residuals", {}).items()},
    )
