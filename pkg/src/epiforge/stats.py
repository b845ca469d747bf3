"""Correlation statistics: covariance, Pearson/Spearman/Kendall with
two-sided p-values, fractional ranking, significance filtering, and the
per-country study summarized by medians.

Coefficients are computed from first principles (sample covariance over
sample standard deviations, rank differences, concordant/discordant pair
counts); only the reference distributions (Student-t, standard normal)
come from scipy.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from statistics import median

import numpy as np
from scipy.stats import norm as _norm
from scipy.stats import t as _student_t

from .errors import (
    EmptyInputError,
    EmptyStudyError,
    InsufficientSampleError,
    ZeroVarianceError,
)

DEFAULT_ALPHA = 0.05


class Method(str, enum.Enum):
    PEARSON = "pearson"
    SPEARMAN = "spearman"
    KENDALL = "kendall"


@dataclass(frozen=True)
class PairedSample:
    """Aligned observations of an independent variable x and a dependent y."""

    x: tuple[float, ...]
    y: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "y", tuple(float(v) for v in self.y))
        if len(self.x) != len(self.y):
            raise InsufficientSampleError(
                f"sample arms differ in length: {len(self.x)} vs {len(self.y)}"
            )

    @property
    def n(self) -> int:
        return len(self.x)


@dataclass(frozen=True)
class CorrelationResult:
    method: Method
    coefficient: float
    p_value: float | None
    n: int
    significant: bool | None

    def at_alpha(self, alpha: float) -> "CorrelationResult":
        return CorrelationResult(
            method=self.method,
            coefficient=self.coefficient,
            p_value=self.p_value,
            n=self.n,
            significant=significance_verdict(self, alpha),
        )


@dataclass(frozen=True)
class StudySummary:
    """Per-country correlation triples with median/range summaries.

    Coefficient distributions across countries are skewed, so the overall
    figure per method is the median, never the mean.
    """

    factor_pair: str
    alpha: float
    per_country: tuple[tuple[str, dict[Method, CorrelationResult]], ...]
    medians: dict[Method, float]
    ranges: dict[Method, tuple[float, float]]
    skipped: tuple[tuple[str, str], ...] = field(default_factory=tuple)


def covariance(s: PairedSample) -> float:
    """Sample covariance with the n-1 denominator."""
    if s.n < 2:
        raise InsufficientSampleError(f"covariance needs n >= 2, got {s.n}")
    x = np.asarray(s.x)
    y = np.asarray(s.y)
    return float(np.sum((x - x.mean()) * (y - y.mean())) / (s.n - 1))


def _two_sided_t_pvalue(coef: float, n: int) -> float | None:
    """p-value for a correlation coefficient via the t transform with n-2 df."""
    if n < 3:
        return None
    if abs(coef) >= 1.0:
        return 0.0
    t_stat = coef * math.sqrt((n - 2) / (1.0 - coef * coef))
    return float(2.0 * _student_t.sf(abs(t_stat), df=n - 2))


def pearson(s: PairedSample, alpha: float = DEFAULT_ALPHA) -> CorrelationResult:
    """Linear correlation: covariance over the product of sample stdevs."""
    if s.n < 2:
        raise InsufficientSampleError(f"pearson needs n >= 2, got {s.n}")
    x = np.asarray(s.x)
    y = np.asarray(s.y)
    sx = float(np.std(x, ddof=1))
    sy = float(np.std(y, ddof=1))
    if sx == 0.0 or sy == 0.0:
        raise ZeroVarianceError("pearson is undefined for a constant variable")
    r = covariance(s) / (sx * sy)
    r = max(-1.0, min(1.0, r))
    p = _two_sided_t_pvalue(r, s.n)
    return CorrelationResult(Method.PEARSON, r, p, s.n, _verdict_or_none(p, alpha))


def rank(values) -> list[float]:
    """Fractional (average) ranks, 1-based; ties share the mean of their span."""
    if len(values) == 0:
        raise EmptyInputError("cannot rank an empty list")
    arr = np.asarray(values, dtype=float)
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(len(arr), dtype=float)
    i = 0
    while i < len(arr):
        j = i
        while j + 1 < len(arr) and arr[order[j + 1]] == arr[order[i]]:
            j += 1
        # positions i..j (0-based) share rank mean(i+1 .. j+1)
        shared = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = shared
        i = j + 1
    return [float(v) for v in ranks]


def _has_ties(values) -> bool:
    return len(set(values)) != len(values)


def spearman(s: PairedSample, alpha: float = DEFAULT_ALPHA) -> CorrelationResult:
    """Rank correlation; closed form on tie-free data, Pearson-on-ranks otherwise."""
    if s.n < 2:
        raise InsufficientSampleError(f"spearman needs n >= 2, got {s.n}")
    rx = rank(s.x)
    ry = rank(s.y)
    if not _has_ties(s.x) and not _has_ties(s.y):
        d2 = sum((a - b) ** 2 for a, b in zip(rx, ry))
        rho = 1.0 - 6.0 * d2 / (s.n * (s.n ** 2 - 1))
    else:
        rho = pearson(PairedSample(tuple(rx), tuple(ry))).coefficient
    rho = max(-1.0, min(1.0, rho))
    p = _two_sided_t_pvalue(rho, s.n)
    return CorrelationResult(Method.SPEARMAN, rho, p, s.n, _verdict_or_none(p, alpha))


def _tie_group_sizes(values) -> list[int]:
    counts: dict[float, int] = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    return [c for c in counts.values() if c > 1]


def kendall(s: PairedSample, alpha: float = DEFAULT_ALPHA) -> CorrelationResult:
    """Tau-b rank correlation with the normal approximation for the p-value.

    On tie-free data tau-b reduces to (C - D) / (n(n-1)/2). The p-value uses
    the tie-corrected variance of C - D under the null.
    """
    n = s.n
    if n < 2:
        raise InsufficientSampleError(f"kendall needs n >= 2, got {n}")
    x = np.asarray(s.x)
    y = np.asarray(s.y)
    sign_x = np.sign(x[:, None] - x[None, :])
    sign_y = np.sign(y[:, None] - y[None, :])
    upper = np.triu_indices(n, k=1)
    prod = sign_x[upper] * sign_y[upper]
    s_stat = float(np.sum(prod))  # C - D

    n0 = n * (n - 1) / 2.0
    tx = _tie_group_sizes(s.x)
    ty = _tie_group_sizes(s.y)
    n1 = sum(t * (t - 1) / 2.0 for t in tx)
    n2 = sum(u * (u - 1) / 2.0 for u in ty)
    denom = math.sqrt((n0 - n1) * (n0 - n2))
    if denom == 0.0:
        raise ZeroVarianceError("kendall is undefined when one variable is all ties")
    tau = max(-1.0, min(1.0, s_stat / denom))

    p = _kendall_normal_pvalue(s_stat, n, tx, ty) if n >= 3 else None
    return CorrelationResult(Method.KENDALL, tau, p, n, _verdict_or_none(p, alpha))


def _kendall_normal_pvalue(s_stat: float, n: int, tx: list[int], ty: list[int]) -> float:
    """Two-sided p for C - D using its tie-corrected null variance."""
    vt = sum(t * (t - 1) * (2 * t + 5) for t in tx)
    vu = sum(u * (u - 1) * (2 * u + 5) for u in ty)
    v1x = sum(t * (t - 1) for t in tx)
    v1y = sum(u * (u - 1) for u in ty)
    v2x = sum(t * (t - 1) * (t - 2) for t in tx)
    v2y = sum(u * (u - 1) * (u - 2) for u in ty)
    var = (
        (n * (n - 1) * (2 * n + 5) - vt - vu) / 18.0
        + v1x * v1y / (2.0 * n * (n - 1))
        + v2x * v2y / (9.0 * n * (n - 1) * (n - 2))
    )
    if var <= 0.0:
        raise ZeroVarianceError("degenerate kendall null variance")
    # continuity correction: S moves in even increments, and without it the
    # normal tail overshoots the discrete null by ~0.1 at n around 8
    z = max(abs(s_stat) - 1.0, 0.0) / math.sqrt(var)
    return float(min(1.0, 2.0 * _norm.sf(z)))


def significance_verdict(result: CorrelationResult, alpha: float) -> bool | None:
    """True when p <= alpha, False when p > alpha, None when p is absent."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if result.p_value is None:
        return None
    return result.p_value <= alpha


def _verdict_or_none(p: float | None, alpha: float) -> bool | None:
    return None if p is None else p <= alpha


def run_study(
    samples: dict[str, PairedSample],
    alpha: float = DEFAULT_ALPHA,
    factor_pair: str = "",
) -> StudySummary:
    """All three coefficients per country plus per-method median and range.

    Countries whose sample cannot support a coefficient are listed as
    skipped together with the reason, never silently dropped.
    """
    per_country: list[tuple[str, dict[Method, CorrelationResult]]] = []
    skipped: list[tuple[str, str]] = []
    for code in sorted(samples):
        sample = samples[code]
        try:
            triple = {
                Method.PEARSON: pearson(sample, alpha),
                Method.SPEARMAN: spearman(sample, alpha),
                Method.KENDALL: kendall(sample, alpha),
            }
        except (InsufficientSampleError, ZeroVarianceError) as exc:
            skipped.append((code, str(exc)))
            continue
        per_country.append((code, triple))
    if not per_country:
        raise EmptyStudyError(
            f"no country produced a valid sample for {factor_pair or 'study'}"
        )
    medians: dict[Method, float] = {}
    ranges: dict[Method, tuple[float, float]] = {}
    for method in Method:
        coefs = [triple[method].coefficient for _, triple in per_country]
        medians[method] = float(median(coefs))
        ranges[method] = (min(coefs), max(coefs))
    return StudySummary(
        factor_pair=factor_pair,
        alpha=alpha,
        per_country=tuple(per_country),
        medians=medians,
        ranges=ranges,
        skipped=tuple(skipped),
    )
