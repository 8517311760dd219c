"""Pydantic schemas for machine-readable reports."""

from typing import ClassVar, Literal

from pydantic import BaseModel, Field

from lfphillips.schemas.model import GridCell, ModelSpec, SegmentCoefficients

SIGNIFICANCE_LEVELS = ("1%", "5%", "10%")

Tail = Literal["left", "right"]


class TestStatistic(BaseModel):
    """A statistic with its embedded critical values and rejection flags."""

    __test__: ClassVar[bool] = False  # not a pytest test class

    value: float
    tail: Tail = "left"
    critical_values: dict[str, float]
    reject: dict[str, bool]

    @classmethod
    def build(cls, value: float, critical_values: dict[str, float], tail: Tail = "left"):
        """Derive rejection flags: left tail rejects below, right tail above."""
        if tail == "left":
            reject = {s: bool(value < cv) for s, cv in critical_values.items()}
        else:
            reject = {s: bool(value > cv) for s, cv in critical_values.items()}
        return cls(value=value, tail=tail, critical_values=critical_values, reject=reject)


class TestReport(BaseModel):
    """
    Result of a unit-root, cointegration or rank test.

    ``statistics`` is keyed by statistic name: ``tau`` for ADF, ``z_rho`` and
    ``z_t`` for Phillips-Perron, ``trace_r0`` and ``trace_r1`` for Johansen.
    A degenerate report (zero-variance input) carries no statistics.
    """

    __test__: ClassVar[bool] = False  # not a pytest test class

    test_name: str
    series_name: str = ""
    statistics: dict[str, TestStatistic] = Field(default_factory=dict)
    deterministic: str = "constant"
    lag_order: int | None = None
    bandwidth: int | None = None
    n_obs: int = 0
    eigenvalues: list[float] | None = None
    degenerate: bool = False
    note: str | None = None

    @property
    def statistic(self) -> float:
        """Value of the first (primary) statistic."""
        return next(iter(self.statistics.values())).value

    def rejects(self, level: str = "5%", name: str | None = None) -> bool:
        stat = self.statistics[name] if name else next(iter(self.statistics.values()))
        return stat.reject[level]


class FitMetrics(BaseModel):
    """In-sample accuracy of a fitted model; excluded years are not counted."""

    rmse_annual: float
    rmse_cumulative: float
    r2_annual: float | None
    r2_cumulative: float | None
    n_obs: int
    boundary_max_error: float


class FitReport(BaseModel):
    """Content of fit_report.json."""

    spec: ModelSpec
    segments: list[SegmentCoefficients]
    metrics: FitMetrics
    free_term_C: float = 0.0
    se_method: str = "annual-OLS SE"
    base_year: int
    grid: list[GridCell] = Field(default_factory=list)
    seed: int | None = None
    recovery: dict[str, float] | None = None


class OosReport(BaseModel):
    """Out-of-sample comparison with the no-change benchmark at the model horizon."""

    horizon: int
    train_end: int
    eval_window: tuple[int, int]
    model_rmsfe: float
    naive_rmsfe: float
    ar1_rmsfe: float | None = None
    normalized_model_rmsfe: float | None = None
    per_period: dict[str, dict[str, float]] = Field(default_factory=dict)


class DeflationReport(BaseModel):
    """Content of deflation.json."""

    target_id: str
    horizon: int
    through_year: int
    deflation_intervals: list[tuple[int, int]]
    in_gap_years: list[int] = Field(default_factory=list)
    oos: OosReport | None = None
    seed: int | None = None


class SourceComparison(BaseModel):
    """Content of sources.json: pairwise Pearson correlations per lag, mean and sd per series."""

    series: list[str]
    lags: list[int]
    matrices: dict[str, list[list[float | None]]]
    stats: dict[str, dict[str, float]] = Field(default_factory=dict)
