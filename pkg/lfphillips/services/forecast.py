"""Prediction at the model horizon, long-range projection and forecast evaluation."""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from lfphillips.exceptions import (
    BadWindow,
    ConfigError,
    MissingPredictorYears,
    TooShort,
    ZeroVariance,
)
from lfphillips.schemas.model import ModelSpec
from lfphillips.schemas.reports import DeflationReport, OosReport
from lfphillips.series import AnnualSeries, Unit, log_change, moving_average, shift
from lfphillips.services.econtests import ar1_rmsfe, normalized_error, rmse
from lfphillips.services.segfit import FitResult, fit_model, segment_rate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ForecastResult:
    """Predicted rates of a fitted model with their deflation runs."""

    predicted: AnnualSeries
    horizon: int
    model: FitResult
    deflation_intervals: list[tuple[int, int]]
    in_gap_years: list[int] = field(default_factory=list)

    def to_report(
        self, through_year: int | None = None, seed: int | None = None
    ) -> DeflationReport:
        return DeflationReport(
            target_id=self.model.spec.target_id,
            horizon=self.horizon,
            through_year=through_year or self.predicted.last_year,
            deflation_intervals=self.deflation_intervals,
            in_gap_years=self.in_gap_years,
            seed=seed,
        )


def deflation_intervals(series: AnnualSeries) -> list[tuple[int, int]]:
    """Maximal runs of strictly negative values as inclusive (start, end) years."""
    negative = series.values < 0.0
    edges = np.diff(np.concatenate([[0], negative.astype(int), [0]]))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1) - 1
    return [
        (series.first_year + int(s), series.first_year + int(e))
        for s, e in zip(starts, ends, strict=True)
    ]


def _ordered(spec: ModelSpec, items: Sequence):
    return [items[i] for i in spec.slope_order]


def _lagged_columns(
    model: FitResult, predictors: Sequence[AnnualSeries], start: int, end: int
) -> np.ndarray:
    columns = []
    for rate, spec in zip(
        _ordered(model.spec, predictors), _ordered(model.spec, model.spec.predictors), strict=True
    ):
        shifted = shift(rate, spec.lag)
        if not shifted.covers(start, end):
            raise MissingPredictorYears(
                f"Predicting {start}..{end} needs {rate.name!r} over "
                f"{start - spec.lag}..{end - spec.lag}, "
                f"data cover {rate.first_year}..{rate.last_year}"
            )
        columns.append(shifted.window(start, end).values)
    return np.column_stack(columns)


def _predictable_years(model: FitResult, predictors: Sequence[AnnualSeries]) -> tuple[int, int]:
    shifted = [shift(r, p.lag) for r, p in zip(predictors, model.spec.predictors, strict=True)]
    start = max([model.spec.fit_window[0], *(s.first_year for s in shifted)])
    end = min(s.last_year for s in shifted)
    if start > end:
        raise MissingPredictorYears(f"Predictors leave no predictable year after {start}")
    return start, end


def predict(
    model: FitResult,
    predictors: Sequence[AnnualSeries],
    years: tuple[int, int] | None = None,
) -> ForecastResult:
    """
    Apply a fitted model to predictor data.

    ``predictors`` are rate series in the order of ``model.spec.predictors``.
    Each year uses the segment whose window contains it; years after the
    break use the later segment, and years between two segment windows use
    the earlier one and are reported in ``in_gap_years``. Without ``years``
    every year from the window start up to ``horizon`` years past the last
    predictor observation is predicted.
    """
    if len(predictors) != len(model.spec.predictors):
        raise ConfigError(
            f"Model uses {len(model.spec.predictors)} predictor(s), {len(predictors)} supplied"
        )
    start, end = years or _predictable_years(model, predictors)
    values = _lagged_columns(model, predictors, start, end)

    fit_start, fit_end = model.spec.fit_window
    predicted = np.empty(end - start + 1)
    gap_years = []
    for i, year in enumerate(range(start, end + 1)):
        seg = model.segment_for(year)
        predicted[i] = segment_rate(seg, values[i])
        if fit_start <= year <= fit_end and not any(s.contains(year) for s in model.segments):
            gap_years.append(year)

    series = AnnualSeries(
        name=f"{model.spec.target_id}_predicted",
        unit=Unit.FRACTION,
        first_year=start,
        values=predicted,
    )
    return ForecastResult(
        predicted=series,
        horizon=model.horizon,
        model=model,
        deflation_intervals=deflation_intervals(series),
        in_gap_years=gap_years,
    )


def projected_rate(projection: AnnualSeries, history: AnnualSeries | None = None) -> AnnualSeries:
    """
    Labour-force change implied by a projection.

    Rate projections pass through. Level projections are log-differenced; with
    a historical level series the last observed level before the projection
    bridges the first projected year and the historical rates are prepended.
    """
    if projection.unit != Unit.LEVEL:
        projected = projection
        if history is None:
            return projected
        hist_rate = log_change(history) if history.unit == Unit.LEVEL else history
        return _splice(hist_rate, projected)

    if history is None:
        return log_change(projection)
    if history.unit != Unit.LEVEL:
        raise ConfigError("A level projection needs a level history to bridge from")
    bridge = projection.first_year - 1
    if not history.contains(bridge):
        raise MissingPredictorYears(
            f"Bridging {projection.name!r} needs the historical level in {bridge}, "
            f"history covers {history.first_year}..{history.last_year}"
        )
    levels = np.concatenate([history.window(history.first_year, bridge).values, projection.values])
    combined = projection._replace(first_year=history.first_year, values=levels)
    return log_change(combined)


def _splice(history: AnnualSeries, projected: AnnualSeries) -> AnnualSeries:
    if projected.first_year > history.last_year + 1:
        raise MissingPredictorYears(
            f"Projection starts in {projected.first_year}, history ends in {history.last_year}"
        )
    if projected.first_year <= history.first_year:
        return projected
    head = history.window(history.first_year, projected.first_year - 1).values
    return projected._replace(
        first_year=history.first_year, values=np.concatenate([head, projected.values])
    )


def project(
    model: FitResult,
    lf_projection: AnnualSeries,
    through_year: int,
    history: AnnualSeries | None = None,
    unemployment: AnnualSeries | None = None,
    start_year: int | None = None,
) -> ForecastResult:
    """
    Extrapolate the post-break segment with projected labour-force change.

    Predicts ``start_year`` (default: the year after the fit window) through
    ``through_year``. A model with an unemployment predictor also needs an
    ``unemployment`` rate path covering the lagged years.
    """
    l_rate = projected_rate(lf_projection, history)
    start = model.spec.fit_window[1] + 1 if start_year is None else start_year
    if through_year < start:
        raise ConfigError(f"through year {through_year} precedes the projection start {start}")

    inputs = []
    for p in model.spec.predictors:
        if p.kind == "labour_force_change":
            inputs.append(l_rate)
        elif unemployment is None:
            raise MissingPredictorYears("The model uses unemployment but no path was supplied")
        else:
            inputs.append(unemployment)
    values = _lagged_columns(model, inputs, start, through_year)

    seg = model.segments[-1]
    predicted = np.array([segment_rate(seg, row) for row in values])
    series = AnnualSeries(
        name=f"{model.spec.target_id}_projected",
        unit=Unit.FRACTION,
        first_year=start,
        values=predicted,
    )
    intervals = deflation_intervals(series)
    logger.info(
        f"Projected {model.spec.target_id!r} {start}..{through_year}: "
        f"{len(intervals)} deflation interval(s)"
    )
    return ForecastResult(
        predicted=series,
        horizon=model.horizon,
        model=model,
        deflation_intervals=intervals,
    )


def projection_frame(
    model: FitResult, forecast: ForecastResult, smooth: bool = False
) -> pd.DataFrame:
    """
    Observed and predicted history joined with the projected path.

    With ``smooth`` each curve also gets a centered three-year moving
    average column (``*_ma3``); the end years of each curve have none.
    """
    curves = {
        "observed_rate": model.observed_rate,
        "predicted_rate": model.predicted_rate,
        "projected_rate": forecast.predicted,
    }
    years = np.arange(model.observed_rate.first_year, forecast.predicted.last_year + 1)
    frame = pd.DataFrame({"year": years})
    for name, series in curves.items():
        frame = frame.merge(
            pd.DataFrame({"year": series.years, name: series.values}), on="year", how="left"
        )
        if smooth:
            try:
                ma = moving_average(series, 3)
            except BadWindow:
                logger.debug(f"Series {name} too short to smooth")
                continue
            frame = frame.merge(
                pd.DataFrame({"year": ma.years, f"{name}_ma3": ma.values}), on="year", how="left"
            )
    return frame


# ─────────────────────────── evaluation ──────────────────────────────────────


def _training_spec(spec: ModelSpec, train_end: int) -> ModelSpec:
    try:
        return ModelSpec.model_validate(
            {**spec.model_dump(), "fit_window": (spec.fit_window[0], train_end)}
        )
    except ValueError as e:
        raise ConfigError(f"Model cannot be trained through {train_end}: {e}") from e


def oos_evaluate(
    spec: ModelSpec,
    target: AnnualSeries,
    predictors: Sequence[AnnualSeries],
    train_end: int | None = None,
    eval_window: tuple[int, int] | None = None,
    base_year: int | None = None,
    ar1_benchmark: bool = False,
    horizon: int | None = None,
) -> OosReport:
    """
    Compare the model with the no-change forecast at the model horizon.

    The model is refitted on ``[fit start, train_end]`` and each evaluation
    year t is predicted from predictors observed at t - lag. Without
    ``train_end`` the model is fitted on its whole window and evaluated on
    it (in-sample). The naive benchmark predicts x(t) by x(t - h) with
    h = max(1, model horizon) unless ``horizon`` overrides it. Gap years are
    not scored.
    """
    fit_start, fit_end = spec.fit_window
    if train_end is None:
        train_spec = spec
        train_end = fit_end
    else:
        train_spec = _training_spec(spec, train_end)

    model = fit_model(train_spec, target, predictors, base_year=base_year)
    horizon = horizon or max(1, model.horizon)

    if eval_window is not None:
        eval_start, eval_end = eval_window
    elif train_end < fit_end:
        eval_start, eval_end = train_end + 1, fit_end
    else:
        eval_start, eval_end = max(fit_start, target.first_year + horizon), fit_end
    if train_end < fit_end and eval_start < train_end + max(1, model.horizon):
        raise ConfigError(
            f"Evaluation starting {eval_start} overlaps training through {train_end} "
            f"at horizon {model.horizon}"
        )
    if eval_start > eval_end:
        raise ConfigError(f"Empty evaluation window {eval_start}..{eval_end}")
    if eval_start - horizon < target.first_year or not target.contains(eval_end):
        raise TooShort(
            f"Evaluating {eval_start}..{eval_end} at horizon {horizon} needs {target.name!r} "
            f"over {eval_start - horizon}..{eval_end}"
        )

    forecast = predict(model, predictors, years=(eval_start, eval_end))
    years = forecast.predicted.years
    observed = target.window(eval_start, eval_end).values
    scored = ~np.isin(years, forecast.in_gap_years)
    model_err = observed - forecast.predicted.values
    naive_err = observed - target.window(eval_start - horizon, eval_end - horizon).values

    per_period: dict[str, dict[str, float]] = {}
    if model.break_year is not None:
        periods = (("pre", years <= model.break_year), ("post", years > model.break_year))
        for label, mask in periods:
            mask = mask & scored
            if mask.any():
                per_period[label] = {
                    "model_rmsfe": rmse(model_err[mask]),
                    "naive_rmsfe": rmse(naive_err[mask]),
                    "n_obs": float(mask.sum()),
                }

    model_rmsfe = rmse(model_err[scored])
    ar1 = None
    if ar1_benchmark:
        ar1 = ar1_rmsfe(target.window(eval_start - horizon, eval_end), horizon)
    try:
        normalized = normalized_error(model_rmsfe, target.window(eval_start, eval_end))
    except ZeroVariance:
        normalized = None

    report = OosReport(
        horizon=horizon,
        train_end=train_end,
        eval_window=(eval_start, eval_end),
        model_rmsfe=model_rmsfe,
        naive_rmsfe=rmse(naive_err[scored]),
        ar1_rmsfe=ar1,
        normalized_model_rmsfe=normalized,
        per_period=per_period,
    )
    logger.info(
        f"OOS {spec.target_id!r} h={horizon}: model {report.model_rmsfe:.4g} "
        f"vs naive {report.naive_rmsfe:.4g}"
    )
    return report
