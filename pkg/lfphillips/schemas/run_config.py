"""Pydantic schema for a CLI run configuration."""

from pathlib import Path
from typing import Literal

from pydantic import BaseModel, Field, field_validator, model_validator

YearRange = tuple[int, int]

Command = Literal["fit", "unitroot", "cointegration", "forecast", "compare-sources", "synth"]


class RunConfig(BaseModel):
    """Options shared by all CLI commands; unused ones stay at their defaults."""

    command: Command
    manifest_path: Path | None = None
    target: str | None = None
    predictors: list[str] = Field(default_factory=list)
    series: list[str] = Field(default_factory=list)
    lag_range: YearRange | None = None
    u_lag_range: YearRange = (0, 0)
    break_range: YearRange | None = None
    break_year: int | None = None
    no_break: bool = False
    exclude: YearRange | None = None
    window: YearRange | None = None
    base_year: int | None = None
    horizon: int | None = Field(default=None, ge=1)
    pin_gamma: float | None = None
    projection: str | None = None
    through: int | None = None
    train_end: int | None = None
    smooth: bool = False
    fit_report: Path | None = None
    ar1_benchmark: bool = False
    max_lag: int | Literal["auto"] = "auto"
    bandwidth: int | Literal["auto"] = "auto"
    trend: bool = False
    var_lag: int = Field(default=1, ge=0)
    synth_spec: Path | None = None
    years: YearRange | None = None
    out_dir: Path
    seed: int

    @field_validator("lag_range", "u_lag_range", "break_range", "exclude", "window", "years")
    @classmethod
    def validate_range(cls, v: YearRange | None) -> YearRange | None:
        """Ranges are closed and well-formed (lo <= hi)."""
        if v is not None and v[0] > v[1]:
            raise ValueError(f"range must satisfy lo <= hi, got {v[0]}..{v[1]}")
        return v

    @field_validator("max_lag", "bandwidth")
    @classmethod
    def validate_order(cls, v: int | str) -> int | str:
        """Lag orders and bandwidths are non-negative or 'auto'."""
        if isinstance(v, int) and v < 0:
            raise ValueError(f"must be >= 0 or 'auto', got {v}")
        return v

    @model_validator(mode="after")
    def validate_command(self) -> "RunConfig":
        """Each command gets the inputs it needs."""
        needs_manifest = self.command != "synth" and not (
            self.command == "cointegration" and self.fit_report is not None
        )
        if needs_manifest and self.manifest_path is None:
            raise ValueError(f"'{self.command}' needs --manifest")
        if self.command in ("fit", "forecast") and (not self.target or not self.predictors):
            raise ValueError(f"'{self.command}' needs --target and at least one --predictor")
        if self.command == "cointegration" and self.fit_report is None and (
            not self.target or not self.predictors
        ):
            raise ValueError("'cointegration' needs --fit-report or --target/--predictor")
        if self.command == "unitroot" and not self.series:
            raise ValueError("'unitroot' needs at least one --series")
        if self.command == "compare-sources" and len(self.series) < 2:
            raise ValueError("'compare-sources' needs at least two --series")
        if len(self.predictors) > 2:
            raise ValueError("at most two predictors are supported")
        if sum([self.break_year is not None, self.break_range is not None, self.no_break]) > 1:
            raise ValueError("--break, --break-range and --no-break are mutually exclusive")
        return self

    @property
    def series_ids(self) -> list[str]:
        """Every series id the run reads from the manifest."""
        ids = [self.target] if self.target else []
        ids += self.predictors + self.series
        if self.projection:
            ids.append(self.projection)
        return list(dict.fromkeys(ids))
