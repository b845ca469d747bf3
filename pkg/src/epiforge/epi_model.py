"""Compartmental epidemic models and a fixed-step integrator.

Three model layers: basic SIR, SIRD with vital dynamics and reinfection,
and a 16-class age-structured SIRD driven by location-split contact
matrices. Transmission defaults to the normalized form beta*(S/N)*I so a
fitted beta transfers across countries of different size; strict_literal
switches to the absolute beta*S*I form (and, in the age model, restores
the per-class I factor) for comparison runs.

Integration is classic RK4 on flat tuples of floats. States are tiny
(4 to 66 components), so plain tuples beat array overhead and keep the
calibration inner loop allocation-free apart from the tuples themselves.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import date as _date
from pathlib import Path

from .errors import (
    InvalidPopulationError,
    NumericalBlowupError,
    ShapeError,
)

AGE_CLASSES = 16
AGE_BIN_WIDTH = 5
AGE_FIRST_YEAR = 1  # bins cover ages 1..80


@dataclass(frozen=True)
class CompartmentState:
    s: float
    i: float
    r: float
    d: float = 0.0

    def __post_init__(self):
        for name in ("s", "i", "r", "d"):
            if getattr(self, name) < 0:
                raise ValueError(f"compartment {name} is negative")

    @property
    def total(self) -> float:
        return self.s + self.i + self.r + self.d


@dataclass(frozen=True)
class ModelParams:
    """Epidemic and vital rates, all per day.

    mu and gamma are per-capita birth and natural death rates; they come
    from demographic configuration and are never fitted.
    """

    beta: float
    lambda_r: float
    lambda_d: float
    mu: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        for name in ("beta", "lambda_r", "lambda_d", "mu", "gamma"):
            if getattr(self, name) < 0:
                raise ValueError(f"parameter {name} is negative")


@dataclass(frozen=True)
class ReinfectionSchedule:
    """Piecewise-constant zeta(t); offsets are days from integration start."""

    breakpoints: tuple[tuple[float, float], ...] = ((0.0, 0.0),)

    def __post_init__(self):
        if not self.breakpoints:
            raise ValueError("schedule needs at least one breakpoint")
        prev = None
        for offset, value in self.breakpoints:
            if value < 0:
                raise ValueError(f"zeta must be >= 0, got {value} at day {offset}")
            if prev is not None and offset <= prev:
                raise ValueError("breakpoint offsets must strictly increase")
            prev = offset

    @classmethod
    def constant(cls, value: float = 0.0) -> "ReinfectionSchedule":
        return cls(((0.0, float(value)),))

    def value_at(self, t: float) -> float:
        current = self.breakpoints[0][1]
        for offset, value in self.breakpoints:
            if offset <= t:
                current = value
            else:
                break
        return current


@dataclass(frozen=True)
class AgeStructure:
    """Class populations; the canonical layout is 16 five-year bins.

    The loader enforces the 16-bin shape for real data. The type itself
    allows any m >= 1 so the scalar model is the m=1 special case.
    """

    populations: tuple[float, ...]
    bin_width: int = AGE_BIN_WIDTH

    def __post_init__(self):
        object.__setattr__(self, "populations", tuple(float(v) for v in self.populations))
        if not self.populations:
            raise InvalidPopulationError("age structure needs at least one class")
        for idx, n in enumerate(self.populations):
            if n <= 0:
                raise InvalidPopulationError(f"class {idx} population must be > 0, got {n}")

    @property
    def m(self) -> int:
        return len(self.populations)

    @property
    def total(self) -> float:
        return sum(self.populations)


Matrix = tuple[tuple[float, ...], ...]


def _as_matrix(rows) -> Matrix:
    mat = tuple(tuple(float(v) for v in row) for row in rows)
    if not mat:
        raise ShapeError("contact matrix is empty")
    width = len(mat[0])
    for row in mat:
        if len(row) != width:
            raise ShapeError("contact matrix rows differ in length")
    if len(mat) != width:
        raise ShapeError(f"contact matrix must be square, got {len(mat)}x{width}")
    for row in mat:
        for v in row:
            if v < 0:
                raise ShapeError("contact matrix entries must be >= 0")
    return mat


@dataclass(frozen=True)
class ContactMatrices:
    """Average daily contacts split by location; entries (i, j) count the
    contacts a class-i individual makes with class-j individuals."""

    home: Matrix
    school: Matrix
    work: Matrix
    other: Matrix

    def __post_init__(self):
        object.__setattr__(self, "home", _as_matrix(self.home))
        object.__setattr__(self, "school", _as_matrix(self.school))
        object.__setattr__(self, "work", _as_matrix(self.work))
        object.__setattr__(self, "other", _as_matrix(self.other))
        m = len(self.home)
        for name in ("school", "work", "other"):
            if len(getattr(self, name)) != m:
                raise ShapeError(f"{name} matrix is not {m}x{m}")

    @property
    def m(self) -> int:
        return len(self.home)


@dataclass(frozen=True)
class MixingCoefficients:
    """Multipliers (home, school, work, other) encoding a mixing regime."""

    delta: tuple[float, float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "delta", tuple(float(v) for v in self.delta))
        if len(self.delta) != 4:
            raise ShapeError(f"need 4 mixing coefficients, got {len(self.delta)}")
        for v in self.delta:
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"mixing coefficient {v} outside [0, 1]")


@dataclass(frozen=True)
class AgeState:
    """Per-class (s, i, r, d) quadruples."""

    classes: tuple[tuple[float, float, float, float], ...]

    def __post_init__(self):
        normalized = tuple(tuple(float(v) for v in quad) for quad in self.classes)
        object.__setattr__(self, "classes", normalized)
        for idx, quad in enumerate(normalized):
            if len(quad) != 4:
                raise ShapeError(f"class {idx} needs 4 compartments, got {len(quad)}")
            for v in quad:
                if v < 0:
                    raise ValueError(f"class {idx} has a negative compartment")

    @property
    def m(self) -> int:
        return len(self.classes)

    def totals(self) -> tuple[float, float, float, float]:
        s = sum(q[0] for q in self.classes)
        i = sum(q[1] for q in self.classes)
        r = sum(q[2] for q in self.classes)
        d = sum(q[3] for q in self.classes)
        return (s, i, r, d)


@dataclass(frozen=True)
class ClampEvent:
    t: float
    component: int
    value: float


@dataclass(frozen=True)
class Trajectory:
    """Daily samples of a model run plus derived new-case series.

    `states` holds the flat model state at each integer day (accumulators
    included); `daily_new_affected[k]` and `daily_new_deaths[k]` cover day
    k+1, so both have exactly horizon entries.
    """

    t0: _date | None
    h: float
    days: tuple[int, ...]
    states: tuple[tuple[float, ...], ...]
    daily_new_affected: tuple[float, ...]
    daily_new_deaths: tuple[float, ...]
    clamp_events: tuple[ClampEvent, ...]

    @property
    def horizon(self) -> int:
        return self.days[-1]


def _zeta_of(zeta) -> ReinfectionSchedule:
    if zeta is None:
        return ReinfectionSchedule.constant(0.0)
    if isinstance(zeta, ReinfectionSchedule):
        return zeta
    return ReinfectionSchedule.constant(float(zeta))


def sir_derivatives(
    state: CompartmentState,
    beta: float,
    k: float,
    n: float,
    strict_literal: bool = False,
) -> tuple[float, float, float]:
    """Basic SIR right-hand side; d is carried but ignored."""
    if n <= 0:
        raise InvalidPopulationError(f"population must be > 0, got {n}")
    inflow = beta * state.s * state.i if strict_literal else beta * (state.s / n) * state.i
    rec = k * state.i
    return (-inflow, inflow - rec, rec)


def sird_derivatives(
    state: CompartmentState,
    params: ModelParams,
    zeta,
    t: float,
    n: float,
    strict_literal: bool = False,
) -> tuple[float, float, float, float]:
    """SIRD right-hand side with vital dynamics and reinfection inflow.

    Reinfection enters dS as zeta(t)*gamma*R, exactly as formulated, so
    it vanishes whenever the natural death rate is zero.
    """
    if n <= 0:
        raise InvalidPopulationError(f"population must be > 0, got {n}")
    z = _zeta_of(zeta).value_at(t)
    inflow = (
        params.beta * state.s * state.i
        if strict_literal
        else params.beta * (state.s / n) * state.i
    )
    rec = params.lambda_r * state.i
    dea = params.lambda_d * state.i
    ds = -inflow + params.mu * n - params.gamma * state.s + z * params.gamma * state.r
    di = inflow - rec - dea - params.gamma * state.i
    dr = rec - params.gamma * state.r
    dd = dea - params.gamma * state.d
    return (ds, di, dr, dd)


def effective_contact_matrix(cm: ContactMatrices, mix: MixingCoefficients) -> Matrix:
    """Elementwise weighted sum of the four location matrices."""
    d1, d2, d3, d4 = mix.delta
    return tuple(
        tuple(
            d1 * cm.home[i][j] + d2 * cm.school[i][j] + d3 * cm.work[i][j] + d4 * cm.other[i][j]
            for j in range(cm.m)
        )
        for i in range(cm.m)
    )


def force_of_infection(
    c: Matrix, age: AgeState, structure: AgeStructure, beta: float
) -> tuple[float, ...]:
    """Per-class infection pressure beta * sum_j C_ij * I_j / N_j."""
    if len(c) != structure.m or age.m != structure.m:
        raise ShapeError(
            f"dimension mismatch: matrix {len(c)}, state {age.m}, structure {structure.m}"
        )
    prevalence = [age.classes[j][1] / structure.populations[j] for j in range(structure.m)]
    return tuple(
        beta * sum(c[i][j] * prevalence[j] for j in range(structure.m))
        for i in range(structure.m)
    )


def age_sird_derivatives(
    age: AgeState,
    params: ModelParams,
    c: Matrix,
    zeta,
    t: float,
    structure: AgeStructure,
    strict_literal: bool = False,
) -> tuple[tuple[float, float, float, float], ...]:
    """Per-class SIRD right-hand sides under the effective contact matrix."""
    lam = force_of_infection(c, age, structure, params.beta)
    z = _zeta_of(zeta).value_at(t)
    out = []
    for i in range(structure.m):
        s, inf, rec_c, dead_c = age.classes[i]
        inflow = lam[i] * s * inf if strict_literal else lam[i] * s
        rec = params.lambda_r * inf
        dea = params.lambda_d * inf
        ds = -inflow + params.mu * structure.populations[i] - params.gamma * s + z * params.gamma * rec_c
        di = inflow - rec - dea - params.gamma * inf
        dr = rec - params.gamma * rec_c
        dd = dea - params.gamma * dead_c
        out.append((ds, di, dr, dd))
    return tuple(out)


def rk4_step(derivative_fn, state: tuple, t: float, h: float):
    """One classic Runge-Kutta step; returns (new_state, clamp_events).

    Components driven below zero are clamped to zero, each recorded as a
    ClampEvent. A non-finite result aborts with the failing time named.
    """
    if h <= 0:
        raise ValueError(f"step size must be > 0, got {h}")
    half = h / 2.0
    k1 = derivative_fn(t, state)
    k2 = derivative_fn(t + half, tuple(x + half * a for x, a in zip(state, k1)))
    k3 = derivative_fn(t + half, tuple(x + half * a for x, a in zip(state, k2)))
    k4 = derivative_fn(t + h, tuple(x + h * a for x, a in zip(state, k3)))
    sixth = h / 6.0
    new = tuple(
        x + sixth * (a + 2.0 * (b + c) + d)
        for x, a, b, c, d in zip(state, k1, k2, k3, k4)
    )
    clamps: tuple[ClampEvent, ...] = ()
    for idx, v in enumerate(new):
        if not math.isfinite(v):
            raise NumericalBlowupError(t, f"component {idx} became non-finite")
        if v < 0.0:
            clamps += (ClampEvent(t + h, idx, v),)
    if clamps:
        new = tuple(0.0 if v < 0.0 else v for v in new)
    return new, clamps


class SirdModel:
    """Scalar SIRD with two tallies (cumulative infections, cumulative
    deaths) appended to the flat state for daily-new derivation."""

    def __init__(
        self,
        params: ModelParams,
        n: float,
        zeta: ReinfectionSchedule | float | None = None,
        strict_literal: bool = False,
    ):
        if n <= 0:
            raise InvalidPopulationError(f"population must be > 0, got {n}")
        self.params = params
        self.n = float(n)
        self.zeta = _zeta_of(zeta)
        self.strict_literal = strict_literal

    def flatten(self, state: CompartmentState) -> tuple[float, ...]:
        return (state.s, state.i, state.r, state.d, 0.0, 0.0)

    def unflatten(self, flat: tuple[float, ...]) -> CompartmentState:
        return CompartmentState(flat[0], flat[1], flat[2], flat[3])

    def derivatives(self, t: float, flat: tuple[float, ...]) -> tuple[float, ...]:
        s, i, r, d = flat[0], flat[1], flat[2], flat[3]
        p = self.params
        inflow = p.beta * s * i if self.strict_literal else p.beta * (s / self.n) * i
        rec = p.lambda_r * i
        dea = p.lambda_d * i
        z = self.zeta.value_at(t)
        ds = -inflow + p.mu * self.n - p.gamma * s + z * p.gamma * r
        di = inflow - rec - dea - p.gamma * i
        dr = rec - p.gamma * r
        dd = dea - p.gamma * d
        return (ds, di, dr, dd, inflow, dea)


class AgeSirdModel:
    """Age-structured SIRD over a fixed effective contact matrix.

    Flat layout: m quadruples (s, i, r, d) then the two tallies. The
    effective matrix is precomputed once; scenario sweeps rebuild the
    model per delta vector.
    """

    def __init__(
        self,
        params: ModelParams,
        structure: AgeStructure,
        contact_matrices: ContactMatrices,
        mix: MixingCoefficients,
        zeta: ReinfectionSchedule | float | None = None,
        strict_literal: bool = False,
    ):
        if contact_matrices.m != structure.m:
            raise ShapeError(
                f"contact matrices are {contact_matrices.m}x{contact_matrices.m} "
                f"but structure has {structure.m} classes"
            )
        self.params = params
        self.structure = structure
        self.c = effective_contact_matrix(contact_matrices, mix)
        self.zeta = _zeta_of(zeta)
        self.strict_literal = strict_literal

    def flatten(self, state: AgeState) -> tuple[float, ...]:
        if state.m != self.structure.m:
            raise ShapeError(f"state has {state.m} classes, expected {self.structure.m}")
        flat: tuple[float, ...] = ()
        for quad in state.classes:
            flat += quad
        return flat + (0.0, 0.0)

    def unflatten(self, flat: tuple[float, ...]) -> AgeState:
        m = self.structure.m
        return AgeState(tuple(tuple(flat[4 * i : 4 * i + 4]) for i in range(m)))

    def derivatives(self, t: float, flat: tuple[float, ...]) -> tuple[float, ...]:
        m = self.structure.m
        p = self.params
        pops = self.structure.populations
        prevalence = [flat[4 * j + 1] / pops[j] for j in range(m)]
        z = self.zeta.value_at(t)
        out: list[float] = []
        cum_inflow = 0.0
        cum_deaths = 0.0
        for i in range(m):
            row = self.c[i]
            lam = p.beta * sum(row[j] * prevalence[j] for j in range(m))
            s = flat[4 * i]
            inf = flat[4 * i + 1]
            rec_c = flat[4 * i + 2]
            dead_c = flat[4 * i + 3]
            inflow = lam * s * inf if self.strict_literal else lam * s
            rec = p.lambda_r * inf
            dea = p.lambda_d * inf
            out.append(-inflow + p.mu * pops[i] - p.gamma * s + z * p.gamma * rec_c)
            out.append(inflow - rec - dea - p.gamma * inf)
            out.append(rec - p.gamma * rec_c)
            out.append(dea - p.gamma * dead_c)
            cum_inflow += inflow
            cum_deaths += dea
        out.append(cum_inflow)
        out.append(cum_deaths)
        return tuple(out)


def integrate(
    model,
    initial,
    horizon_days: int,
    h: float = 0.1,
    t0: _date | None = None,
) -> Trajectory:
    """Run a model for horizon_days, sampling at every integer day.

    h must divide one day evenly so samples land exactly on day
    boundaries. Daily-new series come from differencing the cumulative
    tallies the models append to their flat states.
    """
    if horizon_days < 1:
        raise ValueError(f"horizon must be >= 1 day, got {horizon_days}")
    if h <= 0:
        raise ValueError(f"step size must be > 0, got {h}")
    steps_per_day = round(1.0 / h)
    if steps_per_day < 1 or abs(steps_per_day * h - 1.0) > 1e-9:
        raise ValueError(f"step size {h} does not divide 1 day evenly")

    flat = model.flatten(initial)
    deriv = model.derivatives
    states = [flat]
    clamps: list[ClampEvent] = []
    for day in range(horizon_days):
        for k in range(steps_per_day):
            t = day + k * h
            try:
                flat, events = rk4_step(deriv, flat, t, h)
            except NumericalBlowupError as exc:
                raise NumericalBlowupError(exc.t, f"integration failed on day {day + 1}") from exc
            if events:
                clamps.extend(events)
        states.append(flat)

    n_accum = 2  # trailing tallies: cumulative infections, cumulative deaths
    cum_inf = [s[-n_accum] for s in states]
    cum_dead = [s[-n_accum + 1] for s in states]
    new_affected = tuple(b - a for a, b in zip(cum_inf, cum_inf[1:]))
    new_deaths = tuple(b - a for a, b in zip(cum_dead, cum_dead[1:]))
    return Trajectory(
        t0=t0,
        h=h,
        days=tuple(range(horizon_days + 1)),
        states=tuple(states),
        daily_new_affected=new_affected,
        daily_new_deaths=new_deaths,
        clamp_events=tuple(clamps),
    )


def load_contact_matrices(directory) -> ContactMatrices:
    """Read home/school/work/other CSVs of 16 rows x 16 columns each."""
    directory = Path(directory)
    mats = {}
    for name in ("home", "school", "work", "other"):
        path = directory / f"{name}.csv"
        with open(path, newline="") as fh:
            rows = [[float(cell) for cell in row] for row in csv.reader(fh) if row]
        if len(rows) != AGE_CLASSES or any(len(r) != AGE_CLASSES for r in rows):
            raise ShapeError(f"{path} must be {AGE_CLASSES}x{AGE_CLASSES}")
        mats[name] = rows
    return ContactMatrices(**mats)


def load_age_structure(path) -> AgeStructure:
    """Read a pyramid CSV (age_bin_start,population) of 16 five-year bins."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = [(int(r["age_bin_start"]), float(r["population"])) for r in reader]
    if len(rows) != AGE_CLASSES:
        raise ShapeError(f"{path}: expected {AGE_CLASSES} bins, got {len(rows)}")
    expected = [AGE_FIRST_YEAR + AGE_BIN_WIDTH * k for k in range(AGE_CLASSES)]
    starts = [s for s, _ in rows]
    if starts != expected:
        raise ShapeError(f"{path}: bin starts must be {expected}, got {starts}")
    return AgeStructure(tuple(p for _, p in rows))
