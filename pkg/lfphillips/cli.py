"""Command-line entry point: ``lfphillips <command> [options]``.

Exit codes: 0 on success, 1 when a computation fails or an output cannot
be written, 2 on invalid configuration (bad flags, unknown series ids).
Reports are staged in memory and written only after the command succeeded.
"""

import argparse
import json
import logging
import sys
from collections.abc import Callable, Sequence
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import ValidationError

from lfphillips.config import Settings, get_settings
from lfphillips.exceptions import (
    ConfigError,
    InsufficientOverlap,
    LfPhillipsError,
    ParseError,
    ZeroVariance,
)
from lfphillips.logging import configure_logging
from lfphillips.schemas.model import ModelSpec, PredictorSpec, SynthModel, SynthSegment, SynthSpec
from lfphillips.schemas.reports import SourceComparison
from lfphillips.schemas.run_config import RunConfig
from lfphillips.series import AnnualSeries, CumulativeSeries, Unit, pearson_r, summary_stats
from lfphillips.services.econtests import (
    adf_test,
    johansen_rank,
    johansen_trace,
    pp_test,
    residual_cointegration,
)
from lfphillips.services.forecast import (
    oos_evaluate,
    predict,
    project,
    projection_frame,
)
from lfphillips.services.ingest import SeriesLoader, generate_synthetic, synthetic_files
from lfphillips.services.reports import ReportWriter
from lfphillips.services.segfit import FitResult, extend_segment, fit_model, fit_unemployment

logger = logging.getLogger(__name__)

Summary = list[str]


# ─────────────────────────── argument parsing ────────────────────────────────


def parse_range(text: str) -> tuple[int, int]:
    """Parse ``LO..HI`` (or a single integer) into a closed range."""
    lo, sep, hi = text.partition("..")
    try:
        bounds = (int(lo), int(hi)) if sep else (int(lo), int(lo))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected LO..HI, got {text!r}") from e
    if bounds[0] > bounds[1]:
        raise argparse.ArgumentTypeError(f"range must satisfy LO <= HI, got {text!r}")
    return bounds


def parse_auto_int(text: str) -> int | str:
    if text == "auto":
        return text
    try:
        return int(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected an integer or 'auto', got {text!r}") from e


def build_parser(settings: Settings) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lfphillips",
        description="Inflation, unemployment and labour-force models fitted on cumulative curves.",
    )
    parser.add_argument("--log-level", default=settings.log_level)
    parser.add_argument("--log-format", choices=["pretty", "json"], default=settings.log_format)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--manifest", type=Path, dest="manifest_path")
        p.add_argument("--out", type=Path, dest="out_dir", default=settings.output_dir)
        p.add_argument("--seed", type=int, default=settings.default_seed)

    def model_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--target")
        p.add_argument("--predictor", action="append", dest="predictors", default=[])
        lag = p.add_mutually_exclusive_group()
        lag.add_argument("--lag-range", type=parse_range)
        lag.add_argument("--lag", type=parse_range, dest="lag_range")
        p.add_argument("--u-lag", type=parse_range, dest="u_lag_range", default=(0, 0))
        brk = p.add_mutually_exclusive_group()
        brk.add_argument("--break-range", type=parse_range)
        brk.add_argument("--break", type=int, dest="break_year")
        brk.add_argument("--no-break", action="store_true")
        p.add_argument("--exclude", type=parse_range)
        p.add_argument("--window", type=parse_range)
        p.add_argument("--base-year", type=int)
        p.add_argument("--pin-gamma", type=float)

    fit = sub.add_parser("fit", help="fit a segmented model; writes fit_report.json, curves.csv")
    common(fit)
    model_flags(fit)

    unitroot = sub.add_parser("unitroot", help="ADF and PP tests; writes tests.json")
    common(unitroot)
    unitroot.add_argument("--series", action="append", default=[])
    unitroot.add_argument("--max-lag", type=parse_auto_int, default="auto")
    unitroot.add_argument("--bandwidth", type=parse_auto_int, default="auto")
    unitroot.add_argument("--trend", action="store_true")

    coint = sub.add_parser("cointegration", help="tests on cumulative curves of a fit")
    common(coint)
    model_flags(coint)
    coint.add_argument("--fit-report", type=Path)
    coint.add_argument("--max-lag", type=parse_auto_int, default=0)
    coint.add_argument("--bandwidth", type=parse_auto_int, default="auto")
    coint.add_argument("--var-lag", type=int, default=1)

    forecast = sub.add_parser("forecast", help="prediction, projection and naive comparison")
    common(forecast)
    model_flags(forecast)
    forecast.add_argument("--projection")
    forecast.add_argument("--through", type=int)
    forecast.add_argument("--horizon", type=int)
    forecast.add_argument("--train-end", type=int)
    forecast.add_argument("--ar1-benchmark", action="store_true")
    forecast.add_argument("--smooth", action="store_true")

    compare = sub.add_parser("compare-sources", help="pairwise correlations; writes sources.json")
    common(compare)
    compare.add_argument("--series", action="append", default=[])
    compare.add_argument("--lag-range", type=parse_range)

    synth = sub.add_parser("synth", help="write a seeded synthetic dataset")
    common(synth)
    synth.add_argument("--years", type=parse_range, default=(1960, 2012))
    synth.add_argument("--lag", type=int, default=0)
    synth.add_argument("--spec", type=Path, dest="synth_spec")
    return parser


def to_run_config(args: argparse.Namespace) -> RunConfig:
    values = {k: v for k, v in vars(args).items() if k not in ("log_level", "log_format", "lag")}
    if args.command == "synth":
        values["lag_range"] = (args.lag, args.lag)
    try:
        return RunConfig.model_validate(values)
    except ValidationError as e:
        raise ConfigError(f"Invalid options: {e}") from e


# ─────────────────────────── shared steps ────────────────────────────────────


def open_loader(config: RunConfig) -> SeriesLoader:
    """Load the manifest and check that every referenced id is registered."""
    assert config.manifest_path is not None
    try:
        loader = SeriesLoader.from_path(config.manifest_path)
    except ParseError as e:
        raise ConfigError(str(e)) from e
    missing = [sid for sid in config.series_ids if not loader.has(sid)]
    if missing:
        raise ConfigError(f"Unknown series id(s): {', '.join(missing)}")
    return loader


def build_model_spec(config: RunConfig, loader: SeriesLoader) -> ModelSpec:
    settings = get_settings()
    assert config.target is not None
    lag_range = config.lag_range or settings.default_lag_range

    predictors = []
    for sid in config.predictors:
        if loader.entry(sid).variable == "unemployment":
            predictors.append(
                PredictorSpec(series_id=sid, kind="unemployment", lag_range=config.u_lag_range)
            )
        else:
            predictors.append(
                PredictorSpec(series_id=sid, kind="labour_force_change", lag_range=lag_range)
            )

    break_range = config.break_range
    if (
        config.break_year is None
        and break_range is None
        and not config.no_break
        and config.exclude is None
    ):
        break_range = settings.default_break_range

    window = config.window or default_window(config, loader, predictors)
    return ModelSpec(
        target_id=config.target,
        predictors=predictors,
        fit_window=window,
        break_year=config.break_year,
        break_range=break_range,
        excluded_interval=config.exclude,
        pin_gamma=config.pin_gamma,
    )


def default_window(
    config: RunConfig, loader: SeriesLoader, predictors: list[PredictorSpec]
) -> tuple[int, int]:
    """Largest window every candidate lag covers."""
    assert config.target is not None
    target = loader.rate(config.target)
    start, end = target.first_year, target.last_year
    for p in predictors:
        rate = loader.rate(p.series_id)
        start = max(start, rate.first_year + p.lag_range[1])
        end = min(end, rate.last_year + p.lag_range[0])
    return start, end


def run_fit(config: RunConfig, loader: SeriesLoader) -> FitResult:
    try:
        spec = build_model_spec(config, loader)
    except ValidationError as e:
        raise ConfigError(f"Invalid model: {e}") from e
    target = loader.rate(spec.target_id)
    predictors = [loader.rate(p.series_id) for p in spec.predictors]

    explicit_break = config.break_year is not None or config.break_range is not None
    is_unemployment = loader.entry(spec.target_id).variable == "unemployment"
    if is_unemployment and len(predictors) == 1 and not (explicit_break or config.no_break):
        return fit_unemployment(spec, target, predictors[0], base_year=config.base_year)
    return fit_model(spec, target, predictors, base_year=config.base_year)


def recovery_errors(result: FitResult, truth: SynthModel) -> dict[str, float]:
    """Absolute coefficient errors against the generating model of a synthetic dataset."""
    errors: dict[str, float] = {}
    regimes: list[SynthSegment] = [truth.pre] + ([truth.post] if truth.post else [])
    for i, (seg, regime) in enumerate(zip(result.segments, regimes, strict=False), start=1):
        errors[f"segment{i}_alpha"] = abs(seg.alpha - regime.alpha)
        errors[f"segment{i}_beta"] = abs(seg.beta - regime.beta)
        if seg.gamma is not None:
            errors[f"segment{i}_gamma"] = abs(seg.gamma - regime.gamma)
    if truth.break_year is not None and result.break_year is not None:
        errors["break_year"] = float(abs(result.break_year - truth.break_year))
    errors["lag"] = float(abs(result.lags[0] - truth.lag))
    return errors


# ─────────────────────────── commands ────────────────────────────────────────


def cmd_fit(config: RunConfig, writer: ReportWriter) -> Summary:
    loader = open_loader(config)
    result = run_fit(config, loader)
    truth = loader.manifest.truth
    recovery = recovery_errors(result, truth) if truth is not None else None
    writer.stage_json("fit_report.json", result.to_report(seed=config.seed, recovery=recovery))
    curves = result.curves_frame()
    if len(result.segments) > 1:
        # first-segment relation carried over the whole window
        predictors = [loader.rate(p.series_id) for p in result.spec.predictors]
        extended = extend_segment(result, 0, predictors)
        by_year = pd.Series(extended.values, index=extended.years)
        curves["extended_pre_break"] = by_year.reindex(curves["year"]).to_numpy()
    writer.stage_csv("curves.csv", curves)
    return fit_summary(result)


def fit_summary(result: FitResult) -> Summary:
    lines = [f"lags={result.lags} break={result.break_year}"]
    for i, seg in enumerate(result.segments, start=1):
        slopes = f"beta={seg.beta:.3f} ({seg.beta_se:.3f})"
        if seg.gamma is not None:
            slopes += f" gamma={seg.gamma:.3f} ({seg.gamma_se or 0.0:.3f})"
        lines.append(
            f"segment {i} {seg.window[0]}..{seg.window[1]}: {slopes} "
            f"alpha={seg.alpha:.4f} ({seg.alpha_se:.4f})"
        )
    m = result.metrics
    r2 = f"{m.r2_annual:.2f}" if m.r2_annual is not None else "n/a"
    lines.append(f"RMSE annual={m.rmse_annual:.4f} cumulative={m.rmse_cumulative:.4f} R2={r2}")
    return lines


def cmd_unitroot(config: RunConfig, writer: ReportWriter) -> Summary:
    loader = open_loader(config)
    deterministic = "constant+trend" if config.trend else "constant"
    reports = []
    lines = []
    for sid in config.series:
        series = loader.rate(sid).renamed(sid)
        adf = adf_test(series, max_lag=config.max_lag, deterministic=deterministic)
        pp = pp_test(series, bandwidth=config.bandwidth, deterministic=deterministic)
        reports += [adf, pp]
        tau_1pct = adf.statistics["tau"].critical_values["1%"]
        z_rho, z_t = pp.statistics["z_rho"].value, pp.statistics["z_t"].value
        lines.append(
            f"{sid}: ADF={adf.statistic:.2f} (1% {tau_1pct:.2f}) "
            f"PP z(rho)={z_rho:.2f} z(t)={z_t:.2f}"
        )
    writer.stage_json(
        "tests.json", {"seed": config.seed, "reports": [r.model_dump() for r in reports]}
    )
    return lines


def curves_from_report(path: Path) -> tuple[CumulativeSeries, AnnualSeries]:
    """
    Observed and predicted cumulative curves from the curves.csv next to a fit report.

    Years flagged ``in_gap`` stay in both curves, as they do when the model is
    fitted in the same run: the tests need consecutive years, and the
    predicted curve carries the pre-gap segment through the excluded interval
    until the next segment is re-anchored on the observed curve.
    """
    curves_path = path.parent / "curves.csv"
    try:
        report = json.loads(path.read_text(encoding="utf-8"))
        frame = pd.read_csv(curves_path)
    except (OSError, json.JSONDecodeError, pd.errors.ParserError) as e:
        raise ConfigError(f"Cannot read fit output {path} / {curves_path}: {e}") from e
    try:
        years = frame["year"].astype(int)
        observed = CumulativeSeries.from_pairs(
            "observed_cumulative", Unit.LEVEL, years, frame["observed_cumulative"]
        )
        predicted = AnnualSeries.from_pairs(
            "predicted_cumulative", Unit.LEVEL, years, frame["predicted_cumulative"]
        )
    except KeyError as e:
        raise ConfigError(f"{curves_path} lacks column {e}") from e
    if "in_gap" in frame and frame["in_gap"].any():
        gap = years[frame["in_gap"].astype(bool)]
        logger.info(f"Keeping excluded years {gap.min()}..{gap.max()} in the cumulative curves")
    logger.info(f"Using curves of a fit of {report.get('spec', {}).get('target_id')!r}")
    return observed, predicted


def cmd_cointegration(config: RunConfig, writer: ReportWriter) -> Summary:
    if config.fit_report is not None:
        observed, predicted = curves_from_report(config.fit_report)
    else:
        result = run_fit(config, open_loader(config))
        observed, predicted = result.observed_cumulative, result.predicted_cumulative

    residual = residual_cointegration(
        observed, predicted, max_lag=config.max_lag, bandwidth=config.bandwidth
    )
    johansen = johansen_trace(observed, predicted, var_lag=config.var_lag)
    rank = johansen_rank(johansen)
    writer.stage_json(
        "cointegration.json",
        {
            "seed": config.seed,
            "residual": residual.model_dump(),
            "johansen": johansen.model_dump(),
            "johansen_rank_5pct": rank,
        },
    )
    lines = [f"Johansen rank (5%): {rank}"]
    if not residual.degenerate:
        adf = residual.statistics["adf_tau"]
        lines.insert(0, f"residual ADF={adf.value:.2f} (1% {adf.critical_values['1%']:.2f})")
    return lines


def cmd_forecast(config: RunConfig, writer: ReportWriter) -> Summary:
    loader = open_loader(config)
    result = run_fit(config, loader)
    spec = result.spec
    predictors = [loader.rate(p.series_id) for p in spec.predictors]

    if config.projection:
        labour = next(
            (p.series_id for p in spec.predictors if p.kind == "labour_force_change"), None
        )
        if labour is None:
            raise ConfigError("--projection needs a labour-force predictor")
        projection = loader.get(config.projection)
        history = loader.get(labour)
        through = config.through or projection.last_year + result.horizon
        unemployment = next(
            (loader.rate(p.series_id) for p in spec.predictors if p.kind == "unemployment"), None
        )
        forecast = project(result, projection, through, history=history, unemployment=unemployment)
    else:
        forecast = predict(result, predictors)
        through = forecast.predicted.last_year

    oos = oos_evaluate(
        spec,
        loader.rate(spec.target_id),
        predictors,
        train_end=config.train_end,
        base_year=config.base_year,
        ar1_benchmark=config.ar1_benchmark,
        horizon=config.horizon,
    )
    report = forecast.to_report(through_year=through, seed=config.seed).model_copy(
        update={"oos": oos}
    )
    writer.stage_csv("projection.csv", projection_frame(result, forecast, smooth=config.smooth))
    writer.stage_json("deflation.json", report)

    lines = [f"predicted {forecast.predicted.first_year}..{through} (horizon {forecast.horizon})"]
    lines.append(f"deflation intervals: {forecast.deflation_intervals or 'none'}")
    lines.append(f"RMSFE model={oos.model_rmsfe:.4f} naive={oos.naive_rmsfe:.4f} (h={oos.horizon})")
    return lines


def cmd_compare_sources(config: RunConfig, writer: ReportWriter) -> Summary:
    loader = open_loader(config)
    lo, hi = config.lag_range or (0, 0)
    series = [loader.rate(sid).renamed(sid) for sid in config.series]
    matrices: dict[str, list[list[float | None]]] = {}
    for lag in range(lo, hi + 1):
        matrix: list[list[float | None]] = []
        for a in series:
            row: list[float | None] = []
            for b in series:
                try:
                    row.append(pearson_r(a, b, lag))
                except (InsufficientOverlap, ZeroVariance) as e:
                    logger.warning(f"No correlation for {a.name}/{b.name} at lag {lag}: {e}")
                    row.append(None)
            matrix.append(row)
        matrices[str(lag)] = matrix
    stats: dict[str, dict[str, float]] = {}
    for sid, s in zip(config.series, series, strict=True):
        st = summary_stats(s)
        stats[sid] = {"mean": st.mean, "sd": st.sd, "n": float(st.n)}
    writer.stage_json(
        "sources.json",
        SourceComparison(
            series=config.series, lags=list(range(lo, hi + 1)), matrices=matrices, stats=stats
        ),
    )
    lines = [f"{sid}: mean={st['mean']:.4f} sd={st['sd']:.4f}" for sid, st in stats.items()]
    return lines + [
        f"lag {lag}: {np.round(np.array(m, dtype=float), 2).tolist()}"
        for lag, m in matrices.items()
    ]


def default_synth_spec(config: RunConfig) -> SynthSpec:
    """Two regimes with a break in 1986, after the DGDP relation to labour-force change."""
    lag = config.lag_range[0] if config.lag_range else 0
    return SynthSpec(
        seed=config.seed,
        years=config.years or (1960, 2012),
        lf_noise_sd=0.02,
        obs_noise_sd=0.002,
        model=SynthModel(
            lag=lag,
            break_year=1986,
            pre=SynthSegment(alpha=0.0484, beta=3.846),
            post=SynthSegment(alpha=0.0, beta=2.383),
        ),
    )


def cmd_synth(config: RunConfig, writer: ReportWriter) -> Summary:
    if config.synth_spec is not None:
        try:
            payload = json.loads(config.synth_spec.read_text(encoding="utf-8"))
            spec = SynthSpec.model_validate({**payload, "seed": payload.get("seed", config.seed)})
        except (OSError, json.JSONDecodeError, ValidationError) as e:
            raise ConfigError(f"Invalid synthetic spec {config.synth_spec}: {e}") from e
    else:
        spec = default_synth_spec(config)
    data = generate_synthetic(spec)
    for name, text in synthetic_files(data).items():
        writer.stage_text(name, text)
    return [f"synthetic {spec.years[0]}..{spec.years[1]} seed={spec.seed}"]


COMMANDS: dict[str, Callable[[RunConfig, ReportWriter], Summary]] = {
    "fit": cmd_fit,
    "unitroot": cmd_unitroot,
    "cointegration": cmd_cointegration,
    "forecast": cmd_forecast,
    "compare-sources": cmd_compare_sources,
    "synth": cmd_synth,
}


def main(argv: Sequence[str] | None = None) -> int:
    settings = get_settings()
    args = build_parser(settings).parse_args(argv)
    configure_logging(args.log_level.upper(), args.log_format)

    try:
        config = to_run_config(args)
        writer = ReportWriter(config.out_dir)
        summary = COMMANDS[config.command](config, writer)
        written = writer.commit()
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return 2
    except LfPhillipsError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return 1
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return 1

    for line in summary:
        print(line)
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
