"""Pydantic schemas for manifests, model specifications and reports."""

from lfphillips.schemas.manifest import DatasetManifest, ManifestEntry
from lfphillips.schemas.model import (
    GridCell,
    ModelSpec,
    PredictorSpec,
    SegmentCoefficients,
    SynthModel,
    SynthSegment,
    SynthSpec,
)
from lfphillips.schemas.reports import (
    DeflationReport,
    FitMetrics,
    FitReport,
    OosReport,
    SourceComparison,
    TestReport,
    TestStatistic,
)
from lfphillips.schemas.run_config import RunConfig

__all__ = [
    "DatasetManifest",
    "ManifestEntry",
    "GridCell",
    "ModelSpec",
    "PredictorSpec",
    "SegmentCoefficients",
    "SynthModel",
    "SynthSegment",
    "SynthSpec",
    "DeflationReport",
    "FitMetrics",
    "FitReport",
    "OosReport",
    "SourceComparison",
    "TestReport",
    "TestStatistic",
    "RunConfig",
]
