"""Exception hierarchy.

Every error condition a public operation can raise has its own class so that
callers (and the CLI exit-code mapping) can tell them apart. Input validation
errors also derive from ``ValueError``.
"""


class LfPhillipsError(Exception):
    """Base class for all errors raised by lfphillips."""


class ConfigError(LfPhillipsError, ValueError):
    """Invalid run configuration (CLI flags, settings, unknown ids)."""


# ─────────────────────────── series-core ─────────────────────────────────────


class SeriesError(LfPhillipsError, ValueError):
    """Invalid annual series or transformation argument."""


class NonPositiveLevel(SeriesError):
    """A level series used for log-differencing contains a value <= 0."""


class TooShort(SeriesError):
    """A series is shorter than the operation requires."""


class YearOutOfRange(SeriesError):
    """A requested year lies outside the series range."""


class BadWindow(SeriesError):
    """Moving-average window is even, < 1 or longer than the series."""


class InsufficientOverlap(SeriesError):
    """Two series share too few years after alignment."""


class ZeroVariance(SeriesError):
    """A statistic is undefined because a series is constant."""


class NonConsecutiveYears(SeriesError):
    """Years in the input are not consecutive integers."""


class NonFiniteValue(SeriesError):
    """The input contains NaN or infinite values."""


# ─────────────────────────── ingest ──────────────────────────────────────────


class IngestError(LfPhillipsError):
    """Problem loading a manifest or series file."""


class ParseError(IngestError, ValueError):
    """A manifest or CSV file does not follow its schema."""


class DuplicateSeriesId(IngestError, ValueError):
    """Two manifest entries share the same series_id."""


class UnknownUnit(IngestError, ValueError):
    """A manifest entry declares an unrecognized unit."""


class MissingSeries(IngestError, KeyError):
    """A series_id is not registered in the manifest."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class BadSpec(IngestError, ValueError):
    """Invalid synthetic-data specification."""


# ─────────────────────────── segfit ──────────────────────────────────────────


class FitError(LfPhillipsError):
    """Model estimation failed."""


class DegeneratePredictor(FitError, ValueError):
    """The constrained design has zero variance (cumulative proportional to time)."""


class CollinearPredictors(FitError, ValueError):
    """The constrained two-predictor design is rank-deficient."""


class WindowTooShort(FitError, ValueError):
    """A fit window has too few years for the number of free parameters."""


class EmptyGrid(FitError, ValueError):
    """No (lag, break) candidate could be evaluated."""


# ─────────────────────────── econtests ───────────────────────────────────────


class TestError(LfPhillipsError):
    """A statistical test cannot be computed."""

    __test__ = False  # not a pytest test class


class RangeMismatch(TestError, ValueError):
    """Two series passed to a test cover different years."""


class SingularMoments(TestError, ValueError):
    """Moment matrices of the VECM are singular."""


class BadTestOption(TestError, ValueError):
    """A lag order or bandwidth is out of range."""


# ─────────────────────────── forecast ────────────────────────────────────────


class ForecastError(LfPhillipsError):
    """Prediction or projection failed."""


class MissingPredictorYears(ForecastError, ValueError):
    """Predictor data do not cover the lagged years a prediction needs."""
