"""Immutable annual time series and the transformations every model consumes.

All values are immutable after construction and every operation is a pure
function returning a new series, so instances can be shared freely.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np

from lfphillips.exceptions import (
    BadWindow,
    InsufficientOverlap,
    NonConsecutiveYears,
    NonFiniteValue,
    NonPositiveLevel,
    SeriesError,
    TooShort,
    YearOutOfRange,
    ZeroVariance,
)


class Unit(StrEnum):
    """Declared unit of an annual series."""

    FRACTION = "fraction-per-year"
    LEVEL = "level"
    PERCENT = "percent"


@dataclass(frozen=True, eq=False)
class AnnualSeries:
    """
    Year-indexed sequence of finite reals, one value per consecutive year.

    Gapped data cannot be represented: split it into several series before
    constructing instances.
    """

    name: str
    unit: Unit
    first_year: int
    values: np.ndarray

    def __post_init__(self) -> None:
        try:
            unit = Unit(self.unit)
        except ValueError as e:
            raise SeriesError(f"Unknown unit {self.unit!r} for series {self.name!r}") from e

        values = np.array(self.values, dtype=float).reshape(-1)
        if values.size < 1:
            raise TooShort(f"Series {self.name!r} is empty")
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise NonFiniteValue(
                f"Series {self.name!r} has a non-finite value in {self.first_year + bad}"
            )
        values.setflags(write=False)

        object.__setattr__(self, "unit", unit)
        object.__setattr__(self, "first_year", int(self.first_year))
        object.__setattr__(self, "values", values)

    @classmethod
    def from_pairs(
        cls,
        name: str,
        unit: Unit | str,
        years: Iterable[int],
        values: Iterable[float],
    ) -> AnnualSeries:
        """Build a series from (year, value) columns, rejecting gaps and disorder."""
        years_arr = np.asarray(list(years), dtype=int)
        values_arr = np.asarray(list(values), dtype=float)
        if years_arr.size == 0:
            raise TooShort(f"Series {name!r} has no rows")
        if years_arr.size != values_arr.size:
            raise SeriesError(
                f"Series {name!r}: {years_arr.size} years vs {values_arr.size} values"
            )
        steps = np.diff(years_arr)
        if np.any(steps != 1):
            idx = int(np.flatnonzero(steps != 1)[0])
            raise NonConsecutiveYears(
                f"Series {name!r}: year {years_arr[idx + 1]} follows {years_arr[idx]}"
            )
        return cls(name=name, unit=Unit(unit), first_year=int(years_arr[0]), values=values_arr)

    # ── accessors ────────────────────────────────────────────────────────────

    def __len__(self) -> int:
        return int(self.values.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AnnualSeries):
            return NotImplemented
        return (
            self.unit == other.unit
            and self.first_year == other.first_year
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def last_year(self) -> int:
        return self.first_year + len(self) - 1

    @property
    def years(self) -> np.ndarray:
        return np.arange(self.first_year, self.last_year + 1)

    def contains(self, year: int) -> bool:
        return self.first_year <= year <= self.last_year

    def covers(self, start: int, end: int) -> bool:
        return self.first_year <= start and end <= self.last_year

    def value(self, year: int) -> float:
        if not self.contains(year):
            raise YearOutOfRange(
                f"{year} outside {self.name!r} ({self.first_year}..{self.last_year})"
            )
        return float(self.values[year - self.first_year])

    def window(self, start: int, end: int) -> AnnualSeries:
        """Sub-series covering [start, end] inclusive."""
        if start > end or not self.covers(start, end):
            raise YearOutOfRange(
                f"Window {start}..{end} outside {self.name!r} "
                f"({self.first_year}..{self.last_year})"
            )
        i0 = start - self.first_year
        return self._replace(first_year=start, values=self.values[i0 : i0 + end - start + 1])

    def renamed(self, name: str) -> AnnualSeries:
        return self._replace(name=name)

    def _replace(self, **changes) -> AnnualSeries:
        kwargs = {
            "name": self.name,
            "unit": self.unit,
            "first_year": self.first_year,
            "values": self.values,
        }
        kwargs.update(changes)
        return AnnualSeries(**kwargs)


@dataclass(frozen=True, eq=False)
class CumulativeSeries(AnnualSeries):
    """Running sum of a rate series from ``base_year`` (value 0 at base_year - 1)."""

    base_year: int = field(default=0)

    def __post_init__(self) -> None:
        super().__post_init__()
        if self.unit != Unit.LEVEL:
            raise SeriesError(f"Cumulative series {self.name!r} must have unit 'level'")
        object.__setattr__(self, "base_year", int(self.base_year))

    def _replace(self, **changes) -> CumulativeSeries:
        kwargs = {
            "name": self.name,
            "unit": self.unit,
            "first_year": self.first_year,
            "values": self.values,
            "base_year": self.base_year,
        }
        kwargs.update(changes)
        return CumulativeSeries(**kwargs)


@dataclass(frozen=True, slots=True)
class SeriesStats:
    """Mean and sample standard deviation of a series."""

    mean: float
    sd: float
    n: int


# ─────────────────────────── operations ──────────────────────────────────────


def log_change(x: AnnualSeries) -> AnnualSeries:
    """Backward log-difference ln x(t) - ln x(t-1); first year moves forward by one."""
    if len(x) < 2:
        raise TooShort(f"log_change needs at least 2 values, {x.name!r} has {len(x)}")
    if np.any(x.values <= 0):
        year = x.first_year + int(np.flatnonzero(x.values <= 0)[0])
        raise NonPositiveLevel(f"{x.name!r} has a non-positive level in {year}")
    logs = np.log(x.values)
    return AnnualSeries(
        name=x.name,
        unit=Unit.FRACTION,
        first_year=x.first_year + 1,
        values=logs[1:] - logs[:-1],
    )


def cumulative(r: AnnualSeries, base_year: int) -> CumulativeSeries:
    """Running sum of ``r`` starting at ``base_year``: out(base_year) = r(base_year)."""
    if not r.contains(base_year):
        raise YearOutOfRange(
            f"Base year {base_year} outside {r.name!r} ({r.first_year}..{r.last_year})"
        )
    tail = r.values[base_year - r.first_year :]
    return CumulativeSeries(
        name=r.name,
        unit=Unit.LEVEL,
        first_year=base_year,
        values=np.cumsum(tail),
        base_year=base_year,
    )


def moving_average(x: AnnualSeries, window: int) -> AnnualSeries:
    """Centered moving average of odd width; the ends are trimmed, never padded."""
    if window < 1 or window % 2 == 0 or window > len(x):
        raise BadWindow(f"Window must be odd and within 1..{len(x)}, got {window}")
    if window == 1:
        return x
    half = (window - 1) // 2
    frames = np.lib.stride_tricks.sliding_window_view(x.values, window)
    centers = x.values[half : len(x) - half]
    # Averaging deviations from the center keeps constant stretches exact.
    smoothed = centers + (frames - centers[:, None]).mean(axis=1)
    return AnnualSeries(
        name=x.name,
        unit=x.unit,
        first_year=x.first_year + half,
        values=smoothed,
    )


def shift(x: AnnualSeries, lag: int) -> AnnualSeries:
    """Lag a series: out(t) = x(t - lag). Negative lags lead."""
    return AnnualSeries(name=x.name, unit=x.unit, first_year=x.first_year + lag, values=x.values)


def align(*series: AnnualSeries) -> tuple[AnnualSeries, ...]:
    """Restrict all series to their common year window."""
    if not series:
        return ()
    start = max(s.first_year for s in series)
    end = min(s.last_year for s in series)
    if start > end:
        names = ", ".join(repr(s.name) for s in series)
        raise InsufficientOverlap(f"No common years between {names}")
    return tuple(s.window(start, end) for s in series)


def pearson_r(a: AnnualSeries, b: AnnualSeries, lag: int = 0) -> float:
    """Pearson correlation of a(t) with b(t - lag) on the overlapping years."""
    try:
        a_w, b_w = align(a, shift(b, lag))
    except InsufficientOverlap as e:
        raise InsufficientOverlap(f"pearson_r at lag {lag}: {e}") from e
    if len(a_w) < 3:
        raise InsufficientOverlap(
            f"pearson_r needs >= 3 overlapping years, got {len(a_w)} at lag {lag}"
        )
    da = a_w.values - a_w.values.mean()
    db = b_w.values - b_w.values.mean()
    saa = float(da @ da)
    sbb = float(db @ db)
    if saa == 0.0 or sbb == 0.0:
        raise ZeroVariance(f"Constant series on the overlap of {a.name!r} and {b.name!r}")
    return float(da @ db) / float(np.sqrt(saa * sbb))


def redistribute_step(x: AnnualSeries, step_year: int, step_amount: float) -> AnnualSeries:
    """
    Remove a step revision at ``step_year`` by spreading it evenly backwards.

    Values before the step receive linearly ramped increments from 0 at the
    first year to ``step_amount`` at ``step_year``; values from the step on are
    unchanged. The first and last values are preserved exactly.
    """
    if not (x.first_year < step_year < x.last_year):
        raise YearOutOfRange(
            f"Step year {step_year} must lie strictly inside "
            f"{x.first_year}..{x.last_year} of {x.name!r}"
        )
    k = step_year - x.first_year
    out = x.values.copy()
    ramp = step_amount * np.arange(k) / k
    out[:k] = x.values[:k] + ramp
    return x._replace(values=out)


def to_fraction(x: AnnualSeries) -> AnnualSeries:
    """Convert a percent series to fraction-per-year; fraction input is returned unchanged."""
    if x.unit == Unit.FRACTION:
        return x
    if x.unit == Unit.PERCENT:
        return x._replace(unit=Unit.FRACTION, values=x.values / 100.0)
    raise SeriesError(f"Cannot express level series {x.name!r} as a rate")


def difference(x: AnnualSeries, h: int = 1) -> AnnualSeries:
    """h-step difference x(t) - x(t - h)."""
    if h < 1:
        raise SeriesError(f"Difference horizon must be >= 1, got {h}")
    if len(x) <= h:
        raise TooShort(f"{x.name!r} has {len(x)} values, horizon {h} needs more")
    return x._replace(first_year=x.first_year + h, values=x.values[h:] - x.values[:-h])


def summary_stats(x: AnnualSeries) -> SeriesStats:
    """Mean and sample standard deviation (ddof=1; 0.0 for a single value)."""
    sd = float(np.std(x.values, ddof=1)) if len(x) > 1 else 0.0
    return SeriesStats(mean=float(np.mean(x.values)), sd=sd, n=len(x))
