"""Manifest and CSV ingestion, plus seeded synthetic datasets.

Series CSV files have a ``year,value`` header, one row per year and may
contain ``#`` comment lines. Units are never guessed from magnitudes: the
manifest declares them and percent series are divided by 100 on load.

Synthetic data use numpy's ``default_rng`` (PCG64) seeded with
``SynthSpec.seed``; the seed is embedded in every file written from it.
"""

import json
import logging
from dataclasses import dataclass
from io import StringIO
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from pydantic import ValidationError

from lfphillips.exceptions import (
    BadSpec,
    DuplicateSeriesId,
    InsufficientOverlap,
    MissingSeries,
    ParseError,
    UnknownUnit,
)
from lfphillips.schemas.manifest import DatasetManifest, ManifestEntry
from lfphillips.schemas.model import SynthModel, SynthSpec
from lfphillips.series import AnnualSeries, Unit, align, log_change, shift, to_fraction
from lfphillips.services.reports import atomic_write_text

logger = logging.getLogger(__name__)

CSV_HEADER = ["year", "value"]


# ─────────────────────────── manifest ────────────────────────────────────────


def parse_manifest(payload: Any, root: Path = Path(".")) -> DatasetManifest:
    """Validate an already-decoded manifest document."""
    if not isinstance(payload, dict) or not isinstance(payload.get("entries"), list):
        raise ParseError("Manifest must be an object with an 'entries' array")

    known_units = {u.value for u in Unit}
    seen: set[str] = set()
    for raw in payload["entries"]:
        if not isinstance(raw, dict):
            raise ParseError(f"Manifest entry must be an object, got {raw!r}")
        unit = raw.get("unit")
        if unit not in known_units:
            raise UnknownUnit(
                f"Entry {raw.get('series_id')!r} declares unknown unit {unit!r}; "
                f"expected one of {sorted(known_units)}"
            )
        series_id = raw.get("series_id")
        if series_id in seen:
            raise DuplicateSeriesId(f"series_id {series_id!r} appears more than once")
        seen.add(series_id)

    try:
        manifest = DatasetManifest.model_validate(
            {"entries": payload["entries"], "truth": payload.get("truth"), "root": root}
        )
    except ValidationError as e:
        raise ParseError(f"Invalid manifest: {e}") from e

    for entry in manifest.entries:
        for ref in entry.sum_of or []:
            if ref not in seen:
                raise ParseError(f"Entry {entry.series_id!r} sums unknown series {ref!r}")
            if ref == entry.series_id:
                raise ParseError(f"Entry {entry.series_id!r} cannot sum itself")
    _check_acyclic(manifest)
    return manifest


def _check_acyclic(manifest: DatasetManifest) -> None:
    """Refuse composites that (indirectly) sum themselves."""
    graph = {e.series_id: list(e.sum_of or []) for e in manifest.entries}
    done: set[str] = set()

    def visit(node: str, path: list[str]) -> None:
        if node in path:
            cycle = path[path.index(node):] + [node]
            raise ParseError(f"cyclic sum_of: {' -> '.join(cycle)}")
        if node in done:
            return
        for ref in graph.get(node, []):
            visit(ref, [*path, node])
        done.add(node)

    for series_id in graph:
        visit(series_id, [])


def load_manifest(path: Path | str) -> DatasetManifest:
    """Read and validate a manifest JSON file; relative paths resolve against its directory."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ParseError(f"Cannot read manifest {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ParseError(f"Manifest {path} is not valid JSON: {e}") from e

    manifest = parse_manifest(payload, root=path.parent.resolve())
    logger.info(f"Loaded manifest {path} with {len(manifest.entries)} series")
    return manifest


# ─────────────────────────── series files ────────────────────────────────────


def read_series_csv(path: Path, name: str, unit: Unit) -> AnnualSeries:
    """Parse one ``year,value`` CSV file into a series in its declared unit."""
    try:
        frame = pd.read_csv(path, comment="#", skip_blank_lines=True, skipinitialspace=True)
    except FileNotFoundError as e:
        raise ParseError(f"Series file {path} does not exist") from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ParseError(f"Cannot parse {path}: {e}") from e

    if [str(c).strip().lower() for c in frame.columns] != CSV_HEADER:
        raise ParseError(f"{path}: expected header 'year,value', got {list(frame.columns)}")
    frame.columns = CSV_HEADER

    years = pd.to_numeric(frame["year"], errors="coerce")
    if years.isna().any() or not np.all(np.equal(np.mod(years, 1), 0)):
        raise ParseError(f"{path}: year column must hold integers")
    values = pd.to_numeric(frame["value"], errors="coerce")
    if values.isna().any() and not frame["value"].isna().any():
        raise ParseError(f"{path}: value column must hold decimal numbers")

    return AnnualSeries.from_pairs(name, unit, years.astype(int), values.astype(float))


def load_series(manifest: DatasetManifest, series_id: str) -> AnnualSeries:
    """
    Load a registered series, normalized to fraction-per-year when declared in percent.

    Composite ``sum_of`` entries are summed year by year over the years all
    components share.
    """
    entry = manifest.get(series_id)
    if entry is None:
        raise MissingSeries(f"Series {series_id!r} is not in the manifest")

    if entry.sum_of:
        series = _load_composite(manifest, entry)
    else:
        path = manifest.resolve_path(entry)
        series = read_series_csv(path, series_id, entry.unit)

    if series.unit == Unit.PERCENT:
        if np.any(np.abs(series.values) > 100):
            logger.warning(f"Series {series_id!r} is declared in percent but exceeds 100")
        series = to_fraction(series)

    logger.debug(
        f"Loaded {series_id!r}: {series.first_year}..{series.last_year} ({series.unit.value})"
    )
    return series


def _load_composite(manifest: DatasetManifest, entry: ManifestEntry) -> AnnualSeries:
    assert entry.sum_of is not None
    parts = [load_series(manifest, ref) for ref in entry.sum_of]
    units = {p.unit for p in parts}
    if len(units) != 1:
        raise ParseError(f"Components of {entry.series_id!r} have mixed units {sorted(units)}")
    try:
        aligned = align(*parts)
    except InsufficientOverlap as e:
        raise ParseError(f"Components of {entry.series_id!r} share no years") from e
    total = np.sum([p.values for p in aligned], axis=0)
    return AnnualSeries(
        name=entry.series_id,
        unit=entry.unit if entry.unit != Unit.PERCENT else Unit.FRACTION,
        first_year=aligned[0].first_year,
        values=total,
    )


def render_series_csv(series: AnnualSeries, comment: str | None = None) -> str:
    """Series in the CSV schema with optional leading comment lines."""
    buffer = StringIO()
    if comment:
        for line in comment.splitlines():
            buffer.write(f"# {line}\n")
    frame = pd.DataFrame({"year": series.years, "value": series.values})
    frame.to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()


def save_series(series: AnnualSeries, path: Path | str, comment: str | None = None) -> Path:
    """Write a series in the CSV schema (atomically, full float precision)."""
    path = Path(path)
    atomic_write_text(path, render_series_csv(series, comment))
    return path


class SeriesLoader:
    """Loads series from one manifest and caches them by id."""

    def __init__(self, manifest: DatasetManifest) -> None:
        self.manifest = manifest
        self._cache: dict[str, AnnualSeries] = {}

    @classmethod
    def from_path(cls, path: Path | str) -> "SeriesLoader":
        return cls(load_manifest(path))

    def has(self, series_id: str) -> bool:
        return self.manifest.get(series_id) is not None

    def get(self, series_id: str) -> AnnualSeries:
        if series_id not in self._cache:
            self._cache[series_id] = load_series(self.manifest, series_id)
        return self._cache[series_id]

    def rate(self, series_id: str) -> AnnualSeries:
        """The series as a rate: level series are log-differenced, rates pass through."""
        series = self.get(series_id)
        return log_change(series) if series.unit == Unit.LEVEL else series

    def entry(self, series_id: str) -> ManifestEntry:
        entry = self.manifest.get(series_id)
        if entry is None:
            raise MissingSeries(f"Series {series_id!r} is not in the manifest")
        return entry


# ─────────────────────────── synthetic data ──────────────────────────────────


@dataclass(frozen=True)
class SyntheticData:
    """Generated labour-force levels, inflation and unemployment rates."""

    lf: AnnualSeries
    pi: AnnualSeries
    u: AnnualSeries
    seed: int
    truth: SynthModel | None = None


def generate_synthetic(spec: SynthSpec | dict[str, Any]) -> SyntheticData:
    """
    Generate a dataset from known coefficients.

    Random draws happen in a fixed order (labour-force innovations,
    unemployment noise, inflation noise, level measurement noise) and always
    with full size, so the same seed yields bit-identical output whatever the
    noise scales are.
    """
    if not isinstance(spec, SynthSpec):
        try:
            spec = SynthSpec.model_validate(spec)
        except ValidationError as e:
            raise BadSpec(f"Invalid synthetic spec: {e}") from e

    start, end = spec.years
    n_years = end - start + 1
    rng = np.random.default_rng(spec.seed)

    innovations = rng.standard_normal(n_years - 1)
    ln_lf = np.log(spec.lf_start_level) + np.concatenate(
        [[0.0], np.cumsum(spec.lf_drift + spec.lf_noise_sd * innovations)]
    )
    lf_true = AnnualSeries(name="lf", unit=Unit.LEVEL, first_year=start, values=np.exp(ln_lf))
    l_true = log_change(lf_true)

    u_noise = rng.standard_normal(len(l_true))
    if spec.u_model is not None:
        u = _apply_model(spec.u_model, l_true, None, u_noise * spec.obs_noise_sd, "u")
    else:
        u = AnnualSeries(
            name="u",
            unit=Unit.FRACTION,
            first_year=l_true.first_year,
            values=spec.u_mean + spec.u_sd * u_noise,
        )

    pi_noise = rng.standard_normal(len(l_true))
    pi = _apply_model(spec.model, l_true, u, pi_noise * spec.obs_noise_sd, "pi")

    level_noise = rng.standard_normal(n_years)
    lf = AnnualSeries(
        name="lf",
        unit=Unit.LEVEL,
        first_year=start,
        values=np.exp(ln_lf + spec.lf_level_noise_sd * level_noise),
    )

    logger.debug(f"Generated synthetic data {start}..{end} with seed {spec.seed}")
    return SyntheticData(lf=lf, pi=pi, u=u, seed=spec.seed, truth=spec.model)


def _apply_model(
    model: SynthModel,
    l_rate: AnnualSeries,
    u_rate: AnnualSeries | None,
    noise: np.ndarray,
    name: str,
) -> AnnualSeries:
    uses_u = any(
        seg is not None and seg.gamma != 0.0 for seg in (model.pre, model.post)
    )
    if uses_u and u_rate is None:
        raise BadSpec(f"Model for {name!r} uses gamma but no unemployment input exists")

    inputs = [shift(l_rate, model.lag)]
    if uses_u:
        inputs.append(shift(u_rate, model.u_lag))
    first = max(s.first_year for s in inputs)
    last = min(s.last_year for s in inputs)
    if last - first < 1:
        raise BadSpec(f"Years too short to generate {name!r} at lag {model.lag}")
    if model.break_year is not None and not first <= model.break_year < last:
        raise BadSpec(f"Break year {model.break_year} outside generated years {first}..{last}")

    years = np.arange(first, last + 1)
    l_vals = inputs[0].window(first, last).values
    u_vals = inputs[1].window(first, last).values if uses_u else np.zeros(years.size)
    values = np.empty(years.size)
    for i, year in enumerate(years):
        seg = model.segment_for(int(year))
        values[i] = seg.alpha + seg.beta * l_vals[i] + seg.gamma * u_vals[i]
    # Noise is drawn for every l year; use the trailing part aligned to the output.
    values = values + noise[noise.size - years.size :]
    return AnnualSeries(name=name, unit=Unit.FRACTION, first_year=first, values=values)


def synthetic_files(data: SyntheticData) -> dict[str, str]:
    """Rendered CSV files and manifest of a synthetic dataset, keyed by file name."""
    comment = f"synthetic, seed={data.seed}"
    files = {
        "lf.csv": render_series_csv(data.lf, comment),
        "pi.csv": render_series_csv(data.pi, comment),
        "u.csv": render_series_csv(data.u, comment),
    }
    manifest: dict[str, Any] = {
        "seed": data.seed,
        "entries": [
            {"series_id": "lf", "path": "lf.csv", "variable": "labour_force",
             "source": "synthetic", "unit": "level"},
            {"series_id": "pi", "path": "pi.csv", "variable": "dgdp",
             "source": "synthetic", "unit": "fraction-per-year"},
            {"series_id": "u", "path": "u.csv", "variable": "unemployment",
             "source": "synthetic", "unit": "fraction-per-year"},
        ],
    }
    if data.truth is not None:
        manifest["truth"] = data.truth.model_dump()
    files["manifest.json"] = json.dumps(manifest, indent=2) + "\n"
    return files


def write_synthetic(data: SyntheticData, out_dir: Path) -> Path:
    """Write the three series and a manifest describing them; returns the manifest path."""
    for name, text in synthetic_files(data).items():
        atomic_write_text(out_dir / name, text)
    return out_dir / "manifest.json"
