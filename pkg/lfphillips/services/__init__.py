"""Services package."""

from lfphillips.services.econtests import (
    adf_test,
    johansen_trace,
    naive_rmsfe,
    pp_test,
    r_squared,
    residual_cointegration,
    rmse,
)
from lfphillips.services.forecast import ForecastResult, oos_evaluate, predict, project
from lfphillips.services.ingest import SeriesLoader, generate_synthetic, load_manifest, load_series
from lfphillips.services.segfit import (
    FitResult,
    fit_generalized,
    fit_model,
    fit_segment,
    fit_unemployment,
    standard_errors,
)

__all__ = [
    "adf_test",
    "johansen_trace",
    "naive_rmsfe",
    "pp_test",
    "r_squared",
    "residual_cointegration",
    "rmse",
    "ForecastResult",
    "oos_evaluate",
    "predict",
    "project",
    "SeriesLoader",
    "generate_synthetic",
    "load_manifest",
    "load_series",
    "FitResult",
    "fit_generalized",
    "fit_model",
    "fit_segment",
    "fit_unemployment",
    "standard_errors",
]
