"""Exception hierarchy shared across the engine.

Every failure mode named in a module contract gets its own class so
callers (CLI, HTTP layer) can map errors to exit codes / status codes
without string matching.
"""

from __future__ import annotations


class EpiForgeError(Exception):
    """Base class for all engine errors."""


class EmptyInputError(EpiForgeError):
    """An operation received an empty series, sample, or window."""


class InconsistentInputError(EpiForgeError):
    """Inputs disagree on country, metric, or dimensions."""


class EmptySampleError(EpiForgeError):
    """Pair construction produced no usable sample points."""


class EmptyWindowError(EpiForgeError):
    """A date window contains no data points."""


class InvalidSnapshotError(EpiForgeError):
    """A country snapshot violates count invariants."""


class UndefinedRateError(EpiForgeError):
    """A rate is undefined because its denominator is zero."""


class InsufficientSampleError(EpiForgeError):
    """Sample too small for the requested statistic."""


class ZeroVarianceError(EpiForgeError):
    """A correlation was requested on a constant variable."""


class EmptyStudyError(EpiForgeError):
    """A correlation study had zero valid countries."""


class InvalidPopulationError(EpiForgeError):
    """Total or per-class population is non-positive."""


class ShapeError(EpiForgeError):
    """Matrix or vector dimensions disagree."""


class NumericalBlowupError(EpiForgeError):
    """Integration produced a non-finite state."""

    def __init__(self, t: float, detail: str = ""):
        self.t = t
        msg = f"non-finite state at t={t:g}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class InsufficientHistoryError(EpiForgeError):
    """Calibration history is shorter than the required minimum."""


class InconsistentSeedError(EpiForgeError):
    """Seeding counts exceed the population they are spread over."""


class InvalidRangeError(EpiForgeError):
    """A date range has its endpoints inverted."""


class PersistenceError(EpiForgeError):
    """A datastore read or write failed."""

    def __init__(self, path, detail: str = ""):
        self.path = path
        msg = f"persistence failure at {path}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class FetchError(EpiForgeError):
    """An upstream live-data fetch failed."""
