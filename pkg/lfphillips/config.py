"""Application configuration using pydantic-settings."""

from pathlib import Path
from typing import Literal

from pydantic import model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Settings loaded from LFPHILLIPS_* environment variables and an optional .env file."""

    model_config = SettingsConfigDict(
        env_prefix="LFPHILLIPS_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Logging
    log_level: str = "INFO"
    log_format: Literal["pretty", "json"] = "pretty"

    # Directories
    base_dir: Path = Path.cwd()
    output_dir: Path = Path("./out")

    # Grid search defaults
    default_lag_range: tuple[int, int] = (0, 3)
    default_break_range: tuple[int, int] = (1980, 1990)
    unemployment_lag_bound: int = 5  # |t0| <= bound
    labour_lag_bound: int = 5  # 0 <= t1, t2 <= bound
    grid_workers: int = 1

    # Numerics
    boundary_tolerance: float = 1e-10
    degeneracy_tolerance: float = 1e-12

    # Stochastic validation
    default_seed: int = 42

    @model_validator(mode="after")
    def validate_ranges(self) -> "Settings":
        """Make paths absolute and reject malformed ranges."""
        if not self.output_dir.is_absolute():
            self.output_dir = self.base_dir / self.output_dir

        for name in ("default_lag_range", "default_break_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} must satisfy lo <= hi, got {lo}..{hi}")

        if self.default_lag_range[0] < 0 or self.default_lag_range[1] > self.labour_lag_bound:
            raise ValueError(
                f"default_lag_range must lie within 0..{self.labour_lag_bound}"
            )
        if self.grid_workers < 1:
            raise ValueError("grid_workers must be at least 1")
        return self


_settings_cache: Settings | None = None


def get_settings(reload: bool = False) -> Settings:
    """Get settings instance with optional reload."""
    global _settings_cache
    if _settings_cache is None or reload:
        _settings_cache = Settings()
    return _settings_cache
