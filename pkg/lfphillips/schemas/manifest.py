"""Pydantic schemas for the dataset manifest."""

from pathlib import Path
from typing import Literal

from pydantic import BaseModel, Field, field_validator, model_validator

from lfphillips.schemas.model import SynthModel
from lfphillips.series import Unit

Variable = Literal["cpi", "dgdp", "unemployment", "labour_force", "population"]


class ManifestEntry(BaseModel):
    """One registered series: a CSV file or a year-by-year sum of other entries."""

    series_id: str = Field(..., min_length=1, max_length=100)
    path: Path | None = None
    variable: Variable
    source: str = Field(default="")
    unit: Unit
    sum_of: list[str] | None = None

    @field_validator("series_id")
    @classmethod
    def validate_series_id(cls, v: str) -> str:
        """Ids are used in file names and CLI flags."""
        v = v.strip()
        allowed = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-.")
        if not v or not all(c in allowed for c in v):
            raise ValueError(
                "series_id can only contain letters, numbers, dots, underscores, and hyphens"
            )
        return v

    @field_validator("sum_of")
    @classmethod
    def validate_sum_of(cls, v: list[str] | None) -> list[str] | None:
        if v is not None and len(v) < 2:
            raise ValueError("sum_of needs at least two series ids")
        return v

    @model_validator(mode="after")
    def validate_source_kind(self) -> "ManifestEntry":
        """File entries and composite entries are mutually exclusive."""
        if (self.path is None) == (self.sum_of is None):
            raise ValueError(
                f"Entry {self.series_id!r} needs exactly one of 'path' or 'sum_of'"
            )
        return self


class DatasetManifest(BaseModel):
    """
    Validated collection of series entries; ``root`` anchors relative paths.

    Synthetic datasets also record the generating model in ``truth``.
    """

    entries: list[ManifestEntry] = Field(default_factory=list)
    truth: SynthModel | None = None
    root: Path = Field(default=Path("."), exclude=True)

    @property
    def series_ids(self) -> list[str]:
        return [e.series_id for e in self.entries]

    def get(self, series_id: str) -> ManifestEntry | None:
        for entry in self.entries:
            if entry.series_id == series_id:
                return entry
        return None

    def resolve_path(self, entry: ManifestEntry) -> Path:
        assert entry.path is not None
        return entry.path if entry.path.is_absolute() else self.root / entry.path
