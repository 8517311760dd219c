"""Segmented lagged linear models fitted on cumulative curves.

Each segment is fitted by least squares between the observed cumulative
curve and the predicted one, with the cumulative level at the segment end
fixed to the observed value. The equality constraint eliminates the
intercept, which leaves an unconstrained problem in the slopes::

    S(t)   = sum of the target over [start, t]
    X_j(t) = sum of predictor j at lag j over [start, t]
    n(t)   = t - start + 1

    S~ = S - S(end) n / N,   X~_j = X_j - X_j(end) n / N
    b  = argmin |S~ - X~ b|^2,  alpha = (S(end) - sum_j b_j X_j(end)) / N

Pinned slopes are moved to the left-hand side before solving.
"""

import itertools
import logging
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from lfphillips.config import get_settings
from lfphillips.exceptions import (
    CollinearPredictors,
    ConfigError,
    DegeneratePredictor,
    EmptyGrid,
    FitError,
    LfPhillipsError,
    WindowTooShort,
    YearOutOfRange,
    ZeroVariance,
)
from lfphillips.logging import log_with_data
from lfphillips.schemas.model import GridCell, ModelSpec, SegmentCoefficients
from lfphillips.schemas.reports import FitMetrics, FitReport
from lfphillips.series import AnnualSeries, CumulativeSeries, Unit, cumulative, shift
from lfphillips.services.econtests import ols, r_squared, rmse
from lfphillips.timer import timer

logger = logging.getLogger(__name__)

SE_METHOD = "annual-OLS SE"
COLLINEARITY_RATIO = 1e-10
DEFAULT_UNEMPLOYMENT_GAP = (1982, 1986)


def _lagged_window(rate: AnnualSeries, lag: int, window: tuple[int, int]) -> np.ndarray:
    start, end = window
    shifted = shift(rate, lag)
    if not shifted.covers(start, end):
        raise YearOutOfRange(
            f"Predictor {rate.name!r} at lag {lag} covers "
            f"{shifted.first_year}..{shifted.last_year}, window needs {start}..{end}"
        )
    return shifted.window(start, end).values


def _check_inputs(
    obs_rate: AnnualSeries,
    predictor_rates: Sequence[AnnualSeries],
    lags: Sequence[int],
    window: tuple[int, int],
) -> tuple[np.ndarray, np.ndarray]:
    if not 1 <= len(predictor_rates) <= 2 or len(lags) != len(predictor_rates):
        raise ConfigError(
            f"Need 1 or 2 predictors with one lag each, got {len(predictor_rates)} / {len(lags)}"
        )
    start, end = window
    n_years = end - start + 1
    if n_years < len(predictor_rates) + 2:
        raise WindowTooShort(
            f"Window {start}..{end} has {n_years} years, "
            f"{len(predictor_rates)} predictor(s) need {len(predictor_rates) + 2}"
        )
    if not obs_rate.covers(start, end):
        raise YearOutOfRange(
            f"Target {obs_rate.name!r} covers {obs_rate.first_year}..{obs_rate.last_year}, "
            f"window needs {start}..{end}"
        )
    y = obs_rate.window(start, end).values
    Z = np.column_stack(
        [_lagged_window(r, lag, window) for r, lag in zip(predictor_rates, lags, strict=True)]
    )
    return y, Z


def _coefficients_to_segment(
    window: tuple[int, int],
    alpha: float,
    coefs: np.ndarray,
    ses: tuple[float, float, float | None],
    anchor_value: float,
    sse: float,
) -> SegmentCoefficients:
    alpha_se, beta_se, gamma_se = ses
    return SegmentCoefficients(
        window=window,
        alpha=float(alpha),
        beta=float(coefs[0]),
        gamma=float(coefs[1]) if coefs.size > 1 else None,
        alpha_se=alpha_se,
        beta_se=beta_se,
        gamma_se=gamma_se,
        anchor_value=float(anchor_value),
        sse_cumulative=float(sse),
    )


def fit_segment(
    obs_rate: AnnualSeries,
    predictor_rates: Sequence[AnnualSeries],
    lags: Sequence[int],
    window: tuple[int, int],
    anchor_value: float = 0.0,
    pinned: Mapping[int, float] | None = None,
) -> SegmentCoefficients:
    """
    Constrained cumulative least squares on one segment.

    ``predictor_rates`` are in coefficient order: the first slope is reported
    as beta, the second as gamma. ``pinned`` maps a predictor index to a
    fixed slope. ``anchor_value`` shifts both cumulative curves equally, so
    it does not change the coefficients; it is kept on the result to place
    the segment on the observed cumulative curve.
    """
    pinned = dict(pinned or {})
    y, Z = _check_inputs(obs_rate, predictor_rates, lags, window)
    settings = get_settings()

    n_years = y.size
    n = np.arange(1, n_years + 1, dtype=float)
    weight = n / n_years
    S = np.cumsum(y)
    X = np.cumsum(Z, axis=0)
    s_t = S - S[-1] * weight
    x_t = X - np.outer(weight, X[-1])

    k = Z.shape[1]
    coefs = np.zeros(k)
    for j, value in pinned.items():
        coefs[j] = value
        s_t = s_t - value * x_t[:, j]
    free = [j for j in range(k) if j not in pinned]

    if free:
        for j in free:
            scale = float(np.linalg.norm(X[:, j]))
            spread = float(np.linalg.norm(x_t[:, j]))
            if scale == 0.0 or spread <= settings.degeneracy_tolerance * scale:
                raise DegeneratePredictor(
                    f"Cumulative of {predictor_rates[j].name!r} at lag {lags[j]} is proportional "
                    f"to time over {window[0]}..{window[1]}"
                )
        design = x_t[:, free]
        if len(free) > 1:
            sv = np.linalg.svd(design, compute_uv=False)
            if sv[-1] <= COLLINEARITY_RATIO * sv[0]:
                raise CollinearPredictors(
                    f"Constrained design is rank-deficient over {window[0]}..{window[1]}"
                )
        solution, *_ = np.linalg.lstsq(design, s_t, rcond=None)
        coefs[free] = solution

    alpha = (S[-1] - float(X[-1] @ coefs)) / n_years
    fitted = X @ coefs + alpha * n
    sse = float(np.sum((S - fitted) ** 2))
    ses = _standard_errors(y, Z, alpha, coefs, free, window)
    return _coefficients_to_segment(window, alpha, coefs, ses, anchor_value, sse)


def _standard_errors(
    y: np.ndarray,
    Z: np.ndarray,
    alpha: float,
    coefs: np.ndarray,
    free: list[int],
    window: tuple[int, int],
) -> tuple[float, float, float | None]:
    n_years, k = Z.shape
    dof = n_years - len(free) - 1
    if dof < 1:
        raise WindowTooShort(
            f"Standard errors over {window[0]}..{window[1]} need more than "
            f"{len(free) + 1} annual observations"
        )
    resid = y - alpha - Z @ coefs
    sigma2 = float(resid @ resid) / dof
    design = np.column_stack([np.ones(n_years), Z[:, free]])
    cov = sigma2 * np.linalg.pinv(design.T @ design)
    se_free = np.sqrt(np.clip(np.diag(cov), 0.0, None))

    slope_se = np.zeros(k)
    slope_se[free] = se_free[1:]
    gamma_se = float(slope_se[1]) if k > 1 else None
    return float(se_free[0]), float(slope_se[0]), gamma_se


def standard_errors(
    segment: SegmentCoefficients,
    obs_rate: AnnualSeries,
    predictor_rates: Sequence[AnnualSeries],
    lags: Sequence[int],
    pinned: Mapping[int, float] | None = None,
) -> tuple[float, float, float | None]:
    """
    Classical annual-OLS standard errors at the cumulative-fit estimates.

    Residuals are the annual errors of the segment's own coefficients; the
    covariance is sigma^2 (D'D)^-1 for the design D of a constant and the
    free predictors. Pinned slopes get a standard error of 0.
    """
    y, Z = _check_inputs(obs_rate, predictor_rates, lags, segment.window)
    coefs = np.asarray(segment.slopes, dtype=float)
    free = [j for j in range(Z.shape[1]) if j not in (pinned or {})]
    return _standard_errors(y, Z, segment.alpha, coefs, free, segment.window)


@dataclass(frozen=True, slots=True)
class AnnualOls:
    """Plain least-squares fit of the annual rates, for comparison with the cumulative fit."""

    window: tuple[int, int]
    alpha: float
    slopes: list[float]
    alpha_se: float
    slope_se: list[float]
    n_obs: int


def annual_ols(
    obs_rate: AnnualSeries,
    predictor_rates: Sequence[AnnualSeries],
    lags: Sequence[int],
    window: tuple[int, int],
) -> AnnualOls:
    y, Z = _check_inputs(obs_rate, predictor_rates, lags, window)
    fit = ols(y, np.column_stack([np.ones(y.size), Z]))
    return AnnualOls(
        window=window,
        alpha=float(fit.params[0]),
        slopes=[float(v) for v in fit.params[1:]],
        alpha_se=float(fit.bse[0]),
        slope_se=[float(v) for v in fit.bse[1:]],
        n_obs=fit.nobs,
    )


# ─────────────────────────── fitted model ────────────────────────────────────


@dataclass(frozen=True)
class FitResult:
    """
    A fitted segmented model with its curves on the fit window.

    Years between two segment windows (an excluded interval) are predicted
    with the earlier segment, flagged in ``in_gap`` and left out of every
    statistic in ``metrics``.
    """

    spec: ModelSpec
    segments: list[SegmentCoefficients]
    base_year: int
    observed_rate: AnnualSeries
    predicted_rate: AnnualSeries
    observed_cumulative: CumulativeSeries
    predicted_cumulative: AnnualSeries
    residual_annual: AnnualSeries
    in_gap: np.ndarray
    metrics: FitMetrics
    grid: list[GridCell] = field(default_factory=list)
    free_term_C: float = 0.0

    @property
    def lags(self) -> list[int]:
        return [p.lag for p in self.spec.predictors]

    @property
    def break_year(self) -> int | None:
        return self.spec.break_year

    @property
    def horizon(self) -> int:
        """Years ahead the model predicts from observed predictors (0 for nowcasts)."""
        return max(0, min(p.lag for p in self.spec.predictors))

    def segment_for(self, year: int) -> SegmentCoefficients:
        """Segment whose window contains ``year``; gaps and later years use the preceding one."""
        return _segment_containing(self.segments, year)

    @property
    def rmse_annual(self) -> float:
        return self.metrics.rmse_annual

    @property
    def rmse_cumulative(self) -> float:
        return self.metrics.rmse_cumulative

    @property
    def r2_annual(self) -> float | None:
        return self.metrics.r2_annual

    @property
    def r2_cumulative(self) -> float | None:
        return self.metrics.r2_cumulative

    def to_report(
        self, seed: int | None = None, recovery: dict[str, float] | None = None
    ) -> FitReport:
        return FitReport(
            spec=self.spec,
            segments=self.segments,
            metrics=self.metrics,
            free_term_C=self.free_term_C,
            se_method=SE_METHOD,
            base_year=self.base_year,
            grid=self.grid,
            seed=seed,
            recovery=recovery,
        )

    def curves_frame(self) -> pd.DataFrame:
        """Plot-ready curves: one row per fit-window year."""
        return pd.DataFrame(
            {
                "year": self.observed_rate.years,
                "observed_rate": self.observed_rate.values,
                "predicted_rate": self.predicted_rate.values,
                "observed_cumulative": self.observed_cumulative.values,
                "predicted_cumulative": self.predicted_cumulative.values,
                "residual": self.residual_annual.values,
                "in_gap": self.in_gap.astype(int),
            }
        )


def _ordered(spec: ModelSpec, items: Sequence):
    return [items[i] for i in spec.slope_order]


def _pinned(spec: ModelSpec) -> dict[int, float]:
    # gamma is always the second coefficient
    return {1: spec.pin_gamma} if spec.pin_gamma is not None else {}


def _segments_for(
    spec: ModelSpec,
    target: AnnualSeries,
    observed_cum: CumulativeSeries,
    predictors: Sequence[AnnualSeries],
    lags: Sequence[int],
    break_year: int | None,
) -> list[SegmentCoefficients]:
    rates = _ordered(spec, predictors)
    ordered_lags = _ordered(spec, lags)
    segments = []
    for window in spec.segment_windows(break_year):
        anchor_year = window[0] - 1
        anchor = observed_cum.value(anchor_year) if observed_cum.contains(anchor_year) else 0.0
        segments.append(
            fit_segment(target, rates, ordered_lags, window, anchor, pinned=_pinned(spec))
        )
    return segments


def _observed_cumulative(target: AnnualSeries, base_year: int, end: int) -> CumulativeSeries:
    cum = cumulative(target, base_year)
    return cum.window(base_year, end)


def _assemble(
    spec: ModelSpec,
    segments: list[SegmentCoefficients],
    target: AnnualSeries,
    predictors: Sequence[AnnualSeries],
    base_year: int,
    grid: list[GridCell],
) -> FitResult:
    start, end = spec.fit_window
    years = np.arange(start, end + 1)
    observed = target.window(start, end)
    observed_cum_full = _observed_cumulative(target, base_year, end)
    observed_cum = observed_cum_full.window(start, end)

    rates = _ordered(spec, predictors)
    lags = _ordered(spec, [p.lag for p in spec.predictors])
    values = np.column_stack(
        [_lagged_window(r, lag, (start, end)) for r, lag in zip(rates, lags, strict=True)]
    )

    predicted = np.empty(years.size)
    predicted_cum = np.empty(years.size)
    in_gap = np.ones(years.size, dtype=bool)
    for i, year in enumerate(years):
        seg = _segment_containing(segments, int(year))
        predicted[i] = segment_rate(seg, values[i])
        if seg.window[0] == year:
            running = seg.anchor_value
        else:
            running = predicted_cum[i - 1]
        predicted_cum[i] = running + predicted[i]
        in_gap[i] = not seg.contains(int(year))

    residual = observed.values - predicted
    used = ~in_gap
    boundary = max(
        abs(predicted_cum[seg.window[1] - start] - observed_cum.values[seg.window[1] - start])
        for seg in segments
    )
    metrics = FitMetrics(
        rmse_annual=rmse(residual[used]),
        rmse_cumulative=rmse(observed_cum.values[used] - predicted_cum[used]),
        r2_annual=_r2_or_none(observed.values[used], predicted[used]),
        r2_cumulative=_r2_or_none(observed_cum.values[used], predicted_cum[used]),
        n_obs=int(used.sum()),
        boundary_max_error=float(boundary),
    )
    scale = max(1.0, float(np.abs(observed_cum.values).max()))
    if boundary > get_settings().boundary_tolerance * scale:
        logger.warning(f"Boundary condition violated by {boundary:.3e}")

    def series(name: str, vals: np.ndarray, unit: Unit = Unit.FRACTION) -> AnnualSeries:
        return AnnualSeries(name=name, unit=unit, first_year=start, values=vals)

    return FitResult(
        spec=spec,
        segments=segments,
        base_year=base_year,
        observed_rate=observed,
        predicted_rate=series(f"{target.name}_predicted", predicted),
        observed_cumulative=observed_cum,
        predicted_cumulative=series(
            f"{target.name}_predicted_cumulative", predicted_cum, Unit.LEVEL
        ),
        residual_annual=series(f"{target.name}_residual", residual),
        in_gap=in_gap,
        metrics=metrics,
        grid=grid,
    )


def segment_rate(segment: SegmentCoefficients, row: np.ndarray) -> float:
    """Predicted rate for one year given the lagged predictor values in coefficient order."""
    return segment.alpha + float(row @ np.asarray(segment.slopes))


def _segment_containing(segments: list[SegmentCoefficients], year: int) -> SegmentCoefficients:
    chosen = segments[0]
    for seg in segments:
        if seg.window[0] <= year:
            chosen = seg
    return chosen


def _r2_or_none(obs: np.ndarray, pred: np.ndarray) -> float | None:
    try:
        return r_squared(obs, pred)
    except ZeroVariance:
        return None


@dataclass(frozen=True, slots=True)
class _Candidate:
    lags: tuple[int, ...]
    break_year: int | None
    segments: list[SegmentCoefficients] | None = None
    error: LfPhillipsError | None = None

    @property
    def sse(self) -> float | None:
        if self.segments is None:
            return None
        return sum(seg.sse_cumulative for seg in self.segments)

    @property
    def key(self) -> tuple:
        """Tie-break order: smaller lags, then earlier break."""
        brk = self.break_year if self.break_year is not None else 0
        return (sum(abs(lag) for lag in self.lags), self.lags, brk)

    def cell(self) -> GridCell:
        return GridCell(
            lags=list(self.lags),
            break_year=self.break_year,
            sse=self.sse,
            error=str(self.error) if self.error else None,
        )


def fit_model(
    spec: ModelSpec,
    target: AnnualSeries,
    predictors: Sequence[AnnualSeries],
    base_year: int | None = None,
    workers: int | None = None,
) -> FitResult:
    """
    Exhaustive grid search over predictor lags and break year.

    ``predictors`` are rate series in the order of ``spec.predictors``.
    Segment 1 is anchored at the observed cumulative before the window
    (0 when ``base_year`` is the window start), later segments at the
    observed cumulative in the year before they start. The candidate with
    the smallest total cumulative SSE wins; the reduction runs in grid order
    so the result does not depend on ``workers``.
    """
    if len(predictors) != len(spec.predictors):
        raise ConfigError(
            f"Model names {len(spec.predictors)} predictor(s), {len(predictors)} supplied"
        )
    start, end = spec.fit_window
    base_year = start if base_year is None else base_year
    if base_year > start:
        raise ConfigError(f"Base year {base_year} must not follow the window start {start}")
    if not target.covers(base_year, end):
        raise YearOutOfRange(
            f"Target {target.name!r} covers {target.first_year}..{target.last_year}, "
            f"fit needs {base_year}..{end}"
        )
    observed_cum = _observed_cumulative(target, base_year, end)

    lag_grid = list(itertools.product(*(p.lags for p in spec.predictors)))
    breaks: list[int | None] = list(spec.break_candidates) or [None]
    grid = [(lags, brk) for lags in lag_grid for brk in breaks]

    def evaluate(point: tuple[tuple[int, ...], int | None]) -> _Candidate:
        lags, brk = point
        try:
            segments = _segments_for(spec, target, observed_cum, predictors, lags, brk)
        except LfPhillipsError as e:
            logger.debug(f"Candidate lags={lags} break={brk} failed: {e}")
            return _Candidate(lags=lags, break_year=brk, error=e)
        return _Candidate(lags=lags, break_year=brk, segments=segments)

    workers = workers or get_settings().grid_workers
    with timer(f"grid search over {len(grid)} candidate(s)", logger=logger):
        if workers > 1 and len(grid) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                candidates = list(pool.map(evaluate, grid))
        else:
            candidates = [evaluate(point) for point in grid]

    fitted = [c for c in candidates if c.segments is not None]
    if not fitted:
        if len(candidates) == 1 and candidates[0].error is not None:
            raise candidates[0].error
        raise EmptyGrid(f"None of {len(candidates)} grid candidate(s) could be fitted")

    best = min(fitted, key=lambda c: (c.sse, c.key))
    resolved = spec.resolved(best.lags, best.break_year)
    result = _assemble(
        resolved, best.segments, target, predictors, base_year, [c.cell() for c in candidates]
    )
    log_with_data(
        logger,
        f"Fitted {spec.target_id!r}: lags={list(best.lags)} break={best.break_year}",
        sse=best.sse,
        rmse_annual=result.metrics.rmse_annual,
        candidates=len(candidates),
    )
    return result


def fit_unemployment(
    spec: ModelSpec,
    target: AnnualSeries,
    labour: AnnualSeries,
    base_year: int | None = None,
) -> FitResult:
    """
    Unemployment from labour-force change at lag 0 in two independent segments.

    The excluded interval defaults to 1982..1986; its years count in no
    statistic and the later segment is anchored at the observed cumulative
    at the interval end.
    """
    if len(spec.predictors) != 1 or spec.predictors[0].kind != "labour_force_change":
        raise ConfigError("fit_unemployment takes exactly one labour_force_change predictor")
    excluded = spec.excluded_interval or DEFAULT_UNEMPLOYMENT_GAP
    try:
        coerced = ModelSpec.model_validate(
            {
                **spec.model_dump(),
                "predictors": [spec.predictors[0].model_copy(update={"lag_range": (0, 0)})],
                "break_year": None,
                "break_range": None,
                "excluded_interval": excluded,
            }
        )
    except ValueError as e:
        raise ConfigError(f"Invalid unemployment model: {e}") from e
    return fit_model(coerced, target, [labour], base_year=base_year)


def fit_generalized(
    spec: ModelSpec,
    target: AnnualSeries,
    predictors: Sequence[AnnualSeries],
    base_year: int | None = None,
) -> FitResult:
    """Inflation from labour-force change and unemployment; gamma may be pinned (e.g. -1)."""
    if len(spec.predictors) != 2:
        raise ConfigError("fit_generalized needs a labour-force and an unemployment predictor")
    return fit_model(spec, target, predictors, base_year=base_year)


def extend_segment(
    result: FitResult,
    segment_index: int,
    predictors: Sequence[AnnualSeries],
    years: tuple[int, int] | None = None,
) -> AnnualSeries:
    """
    Counterfactual rates from one segment's coefficients applied over ``years``.

    Defaults to the whole fit window, which carries e.g. the pre-break
    relation past the break.
    """
    if not 0 <= segment_index < len(result.segments):
        raise FitError(f"Model has {len(result.segments)} segment(s), no index {segment_index}")
    seg = result.segments[segment_index]
    start, end = years or result.spec.fit_window
    rates = _ordered(result.spec, predictors)
    lags = _ordered(result.spec, result.lags)
    values = np.column_stack(
        [_lagged_window(r, lag, (start, end)) for r, lag in zip(rates, lags, strict=True)]
    )
    return AnnualSeries(
        name=f"{result.spec.target_id}_segment{segment_index + 1}",
        unit=Unit.FRACTION,
        first_year=start,
        values=seg.alpha + values @ np.asarray(seg.slopes),
    )
