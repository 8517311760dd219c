"""Pytest configuration and fixtures for lfphillips tests."""

import logging
import os
from collections.abc import Callable
from pathlib import Path

import numpy as np
import pytest

from lfphillips.config import get_settings
from lfphillips.logging import ROOT_LOGGER
from lfphillips.series import AnnualSeries, Unit
from lfphillips.services.ingest import SyntheticData, generate_synthetic, write_synthetic
from tests.helpers import dgdp_like_spec

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch, tmp_path):
    """Settings are rebuilt per test from a clean environment."""
    for var in list(os.environ):
        if var.startswith("LFPHILLIPS_"):
            monkeypatch.delenv(var)
    monkeypatch.chdir(tmp_path)
    get_settings(reload=True)
    yield
    get_settings(reload=True)


@pytest.fixture(autouse=True)
def reset_package_logger():
    """Undo configure_logging so later tests keep caplog propagation."""
    yield
    logger = logging.getLogger(ROOT_LOGGER)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
    logger.setLevel(logging.NOTSET)
    logger.propagate = True


@pytest.fixture
def make_series() -> Callable[..., AnnualSeries]:
    """Factory: make_series([v1, v2, ...], first_year=2000, unit='fraction-per-year')."""

    def _make(
        values,
        first_year: int = 2000,
        unit: Unit | str = Unit.FRACTION,
        name: str = "x",
    ) -> AnnualSeries:
        return AnnualSeries(name=name, unit=Unit(unit), first_year=first_year, values=values)

    return _make


@pytest.fixture
def dgdp_data() -> SyntheticData:
    """Seed-42 synthetic dataset with a 1986 break at lag 0."""
    return generate_synthetic(dgdp_like_spec())


@pytest.fixture
def dataset_dir(tmp_path, dgdp_data) -> Path:
    """Directory holding the synthetic CSVs and their manifest."""
    out = tmp_path / "data"
    write_synthetic(dgdp_data, out)
    return out


@pytest.fixture
def ar_fixture() -> AnnualSeries:
    """Committed 20-point AR(0.5) series."""
    rows = [
        line.split(",")
        for line in (FIXTURES / "ar_half_20.csv").read_text().splitlines()
        if line and not line.startswith("#") and not line.startswith("year")
    ]
    return AnnualSeries(
        name="ar_half",
        unit=Unit.LEVEL,
        first_year=int(rows[0][0]),
        values=np.array([float(v) for _, v in rows]),
    )
