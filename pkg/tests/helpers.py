"""Shared builders for test data."""

import json
from pathlib import Path

import numpy as np

from lfphillips.schemas.model import SynthModel, SynthSegment, SynthSpec
from lfphillips.series import AnnualSeries, Unit, shift


def dgdp_like_spec(seed: int = 42, lag: int = 0, obs_noise_sd: float = 0.002) -> SynthSpec:
    """Two regimes broken in 1986 with the slopes of the DGDP relation."""
    return SynthSpec(
        seed=seed,
        years=(1960, 2012),
        lf_drift=0.008,
        lf_noise_sd=0.02,
        obs_noise_sd=obs_noise_sd,
        model=SynthModel(
            lag=lag,
            break_year=1986,
            pre=SynthSegment(alpha=0.0484, beta=3.846),
            post=SynthSegment(alpha=0.0, beta=2.383),
        ),
    )


def write_manifest(root: Path, entries: list[dict]) -> Path:
    path = root / "manifest.json"
    path.write_text(json.dumps({"entries": entries}))
    return path


def write_csv(path: Path, years, values) -> Path:
    lines = ["year,value"] + [f"{y},{float(v)!r}" for y, v in zip(years, values, strict=True)]
    path.write_text("\n".join(lines) + "\n")
    return path


TWO_REGIMES = [(1986, 0.0484, 3.846), (2012, 0.0, 2.383)]


def random_rate(seed: int = 1, first: int = 1950, last: int = 2012, name: str = "l",
                mean: float = 0.015, sd: float = 0.01) -> AnnualSeries:
    rng = np.random.default_rng(seed)
    return AnnualSeries(name=name, unit=Unit.FRACTION, first_year=first,
                        values=mean + sd * rng.standard_normal(last - first + 1))


def regime_target(l_rate: AnnualSeries, lag: int, regimes, window=(1961, 2012),
                  noise_sd=0.0, seed=9, name="pi") -> AnnualSeries:
    """Target over ``window`` built from [(last_year, alpha, beta), ...] regimes."""
    start, end = window
    lagged = shift(l_rate, lag)
    rng = np.random.default_rng(seed)
    values = []
    for year in range(start, end + 1):
        alpha, beta = next((a, b) for last, a, b in regimes if year <= last)
        values.append(alpha + beta * lagged.value(year))
    values = np.asarray(values) + noise_sd * rng.standard_normal(len(values))
    return AnnualSeries(name=name, unit=Unit.FRACTION, first_year=start, values=values)
