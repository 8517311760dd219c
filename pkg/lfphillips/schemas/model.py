"""Pydantic schemas for model specifications, coefficients and synthetic data."""

from typing import Literal

from pydantic import BaseModel, Field, field_validator, model_validator

from lfphillips.config import get_settings

PredictorKind = Literal["labour_force_change", "unemployment"]

YearRange = tuple[int, int]


class PredictorSpec(BaseModel):
    """One right-hand-side variable with its candidate lag range."""

    series_id: str = Field(..., min_length=1)
    kind: PredictorKind = "labour_force_change"
    lag_range: YearRange = (0, 0)

    @field_validator("lag_range")
    @classmethod
    def validate_lag_range(cls, v: YearRange) -> YearRange:
        if v[0] > v[1]:
            raise ValueError(f"lag range must satisfy lo <= hi, got {v[0]}..{v[1]}")
        return v

    @model_validator(mode="after")
    def validate_causality(self) -> "PredictorSpec":
        """Labour-force lags are non-negative; unemployment lags may lead."""
        settings = get_settings()
        lo, hi = self.lag_range
        if self.kind == "labour_force_change":
            if lo < 0 or hi > settings.labour_lag_bound:
                raise ValueError(
                    f"labour-force lag must lie within 0..{settings.labour_lag_bound}, "
                    f"got {lo}..{hi}"
                )
        else:
            bound = settings.unemployment_lag_bound
            if lo < -bound or hi > bound:
                raise ValueError(f"unemployment lag must lie within -{bound}..{bound}")
        return self

    @property
    def lag(self) -> int:
        """The lag of a resolved (single-valued) range."""
        return self.lag_range[0]

    @property
    def lags(self) -> range:
        return range(self.lag_range[0], self.lag_range[1] + 1)


class ModelSpec(BaseModel):
    """
    Segmented, lagged linear model of a target rate.

    ``break_year`` fixes the structural break, ``break_range`` asks the grid
    search to estimate it; with neither the model has a single segment.
    Years in ``excluded_interval`` belong to no segment.
    """

    target_id: str = Field(..., min_length=1)
    predictors: list[PredictorSpec] = Field(..., min_length=1, max_length=2)
    fit_window: YearRange
    break_year: int | None = None
    break_range: YearRange | None = None
    excluded_interval: YearRange | None = None
    pin_gamma: float | None = None

    @model_validator(mode="after")
    def validate_structure(self) -> "ModelSpec":
        start, end = self.fit_window
        if start >= end:
            raise ValueError(f"fit_window must satisfy start < end, got {start}..{end}")

        if len(self.predictors) == 2:
            kinds = sorted(p.kind for p in self.predictors)
            if kinds != ["labour_force_change", "unemployment"]:
                raise ValueError(
                    "a two-predictor model needs one labour_force_change and one "
                    "unemployment predictor"
                )

        if self.break_year is not None and self.break_range is not None:
            raise ValueError("give either break_year or break_range, not both")

        for year in self.break_candidates:
            if not start < year < end:
                raise ValueError(f"break year {year} must lie strictly inside {start}..{end}")

        if self.excluded_interval is not None:
            lo, hi = self.excluded_interval
            if lo > hi or not start < lo or not hi < end:
                raise ValueError(
                    f"excluded interval {lo}..{hi} must lie strictly inside {start}..{end}"
                )
            for year in self.break_candidates:
                if not lo - 1 <= year <= hi:
                    raise ValueError(
                        f"break year {year} must abut or lie inside the excluded interval "
                        f"{lo}..{hi}"
                    )

        if self.pin_gamma is not None:
            if len(self.predictors) != 2 or self.unemployment_index is None:
                raise ValueError("pin_gamma needs a two-predictor model with unemployment")
        return self

    @property
    def break_candidates(self) -> list[int]:
        if self.break_year is not None:
            return [self.break_year]
        if self.break_range is not None:
            return list(range(self.break_range[0], self.break_range[1] + 1))
        if self.excluded_interval is not None:
            return [self.excluded_interval[1]]
        return []

    @property
    def unemployment_index(self) -> int | None:
        for i, p in enumerate(self.predictors):
            if p.kind == "unemployment":
                return i
        return None

    @property
    def slope_order(self) -> list[int]:
        """Predictor indices in coefficient order: beta first, then gamma."""
        if len(self.predictors) == 1:
            return [0]
        u_idx = self.unemployment_index
        return [1 - u_idx, u_idx] if u_idx is not None else [0, 1]

    def segment_windows(self, break_year: int | None) -> list[YearRange]:
        """Segment windows for one break candidate, honoring the excluded interval."""
        start, end = self.fit_window
        if break_year is None:
            return [(start, end)]
        first_end = break_year
        second_start = break_year + 1
        if self.excluded_interval is not None:
            lo, hi = self.excluded_interval
            first_end = min(break_year, lo - 1)
            second_start = max(break_year + 1, hi + 1)
        return [(start, first_end), (second_start, end)]

    def resolved(self, lags: tuple[int, ...], break_year: int | None) -> "ModelSpec":
        """Copy with the lag and break fixed to the selected grid point."""
        predictors = [
            p.model_copy(update={"lag_range": (lag, lag)})
            for p, lag in zip(self.predictors, lags, strict=True)
        ]
        return self.model_copy(
            update={"predictors": predictors, "break_year": break_year, "break_range": None}
        )


class SegmentCoefficients(BaseModel):
    """
    Estimated coefficients of one segment.

    With a single predictor its slope is ``beta``; with two, ``beta`` is the
    labour-force slope and ``gamma`` the unemployment slope. Standard errors
    are classical annual-OLS SEs evaluated at these estimates.
    """

    window: YearRange
    alpha: float
    beta: float
    gamma: float | None = None
    alpha_se: float = Field(default=0.0, ge=0.0)
    beta_se: float = Field(default=0.0, ge=0.0)
    gamma_se: float | None = Field(default=None, ge=0.0)
    anchor_value: float = 0.0
    sse_cumulative: float = Field(default=0.0, ge=0.0)

    @property
    def slopes(self) -> list[float]:
        return [self.beta] if self.gamma is None else [self.beta, self.gamma]

    def contains(self, year: int) -> bool:
        return self.window[0] <= year <= self.window[1]


class GridCell(BaseModel):
    """Total cumulative SSE of one (lags, break) candidate."""

    lags: list[int]
    break_year: int | None
    sse: float | None
    error: str | None = None


# ─────────────────────────── synthetic data ──────────────────────────────────


class SynthSegment(BaseModel):
    """True coefficients of one regime."""

    alpha: float
    beta: float
    gamma: float = 0.0


class SynthModel(BaseModel):
    """Generating model: one or two regimes applied to l(t - lag) [and u(t - u_lag)]."""

    lag: int = Field(default=0, ge=0)
    u_lag: int = 0
    break_year: int | None = None
    pre: SynthSegment
    post: SynthSegment | None = None

    @model_validator(mode="after")
    def validate_regimes(self) -> "SynthModel":
        if (self.break_year is None) != (self.post is None):
            raise ValueError("break_year and post regime must be given together")
        return self

    def segment_for(self, year: int) -> SynthSegment:
        if self.break_year is not None and year > self.break_year:
            assert self.post is not None
            return self.post
        return self.pre


class SynthSpec(BaseModel):
    """
    Seeded synthetic dataset specification.

    Labour-force levels follow a log random walk with drift ``lf_drift`` and
    innovation sd ``lf_noise_sd``. Unemployment is either generated from
    ``u_model`` or drawn as ``u_mean`` plus Gaussian noise ``u_sd``.
    ``lf_level_noise_sd`` adds measurement noise to the reported log level
    after the targets were generated from the true series.
    """

    seed: int
    years: YearRange
    lf_drift: float = 0.008
    lf_noise_sd: float = Field(default=0.01, ge=0.0)
    lf_start_level: float = Field(default=3000.0, gt=0.0)
    lf_level_noise_sd: float = Field(default=0.0, ge=0.0)
    model: SynthModel
    u_model: SynthModel | None = None
    u_mean: float = 0.04
    u_sd: float = Field(default=0.01, ge=0.0)
    obs_noise_sd: float = Field(default=0.0, ge=0.0)

    @field_validator("years")
    @classmethod
    def validate_years(cls, v: YearRange) -> YearRange:
        if v[0] >= v[1]:
            raise ValueError(f"years must satisfy start < end, got {v[0]}..{v[1]}")
        return v
