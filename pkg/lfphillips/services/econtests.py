"""Unit-root, cointegration and forecast-accuracy statistics.

All tests refuse zero-variance input instead of returning infinite
statistics. Critical values come from the embedded tables in
``lfphillips.services.critical_values``.
"""

import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import linalg

from lfphillips.exceptions import (
    BadTestOption,
    InsufficientOverlap,
    RangeMismatch,
    SingularMoments,
    TooShort,
    ZeroVariance,
)
from lfphillips.schemas.reports import TestReport, TestStatistic
from lfphillips.series import AnnualSeries, align
from lfphillips.services.critical_values import (
    df_rho_critical,
    df_tau_critical,
    johansen_trace_critical,
)

logger = logging.getLogger(__name__)

Deterministic = Literal["constant", "constant+trend"]

ADF_MIN_EXTRA = 10
PP_MIN_LENGTH = 15
JOHANSEN_MIN_LENGTH = 20


@dataclass(frozen=True, slots=True)
class OlsFit:
    """Coefficients, residuals and classical standard errors of one OLS regression."""

    params: np.ndarray
    bse: np.ndarray
    resid: np.ndarray
    ssr: float
    nobs: int
    df_resid: int


def ols(y: np.ndarray, X: np.ndarray) -> OlsFit:
    """Ordinary least squares with the homoskedastic covariance sigma^2 (X'X)^-1."""
    nobs, k = X.shape
    params, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ params
    ssr = float(resid @ resid)
    df_resid = nobs - k
    if df_resid <= 0:
        raise TooShort(f"Regression with {k} regressors needs more than {nobs} observations")
    sigma2 = ssr / df_resid
    cov = sigma2 * np.linalg.pinv(X.T @ X)
    bse = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    return OlsFit(params=params, bse=bse, resid=resid, ssr=ssr, nobs=nobs, df_resid=df_resid)


def _require_variance(x: AnnualSeries, test_name: str) -> np.ndarray:
    values = x.values
    if np.ptp(values) == 0.0:
        raise ZeroVariance(f"{test_name}: series {x.name!r} is constant")
    return values


def _deterministic_columns(nobs: int, deterministic: Deterministic) -> list[np.ndarray]:
    columns = [np.ones(nobs)]
    if deterministic == "constant+trend":
        columns.append(np.arange(1, nobs + 1, dtype=float))
    return columns


# ─────────────────────────── ADF ─────────────────────────────────────────────


def schwert_max_lag(n: int) -> int:
    """Default upper bound of the lag search: floor(12 (n/100)^(1/4))."""
    return int(math.floor(12.0 * (n / 100.0) ** 0.25))


def _adf_design(
    values: np.ndarray, p: int, first_row: int, deterministic: Deterministic
) -> tuple[np.ndarray, np.ndarray]:
    """ADF regression rows for dx[t], t = first_row .. n-2."""
    dx = np.diff(values)
    rows = np.arange(first_row, dx.size)
    columns = [values[rows]]
    columns += [dx[rows - i] for i in range(1, p + 1)]
    columns += _deterministic_columns(rows.size, deterministic)
    return dx[rows], np.column_stack(columns)


def _aic(fit: OlsFit) -> float:
    n = fit.nobs
    llf = -0.5 * n * (math.log(2 * math.pi) + math.log(fit.ssr / n) + 1.0)
    return -2.0 * llf + 2.0 * (n - fit.df_resid)


def adf_test(
    x: AnnualSeries,
    max_lag: int | Literal["auto"] = "auto",
    deterministic: Deterministic = "constant",
    autolag: bool | None = None,
) -> TestReport:
    """
    Augmented Dickey-Fuller t-test on the lagged level.

    With ``max_lag="auto"`` the lag order is chosen by AIC over
    0..floor(12 (n/100)^(1/4)); an integer ``max_lag`` is used as the fixed
    order unless ``autolag=True`` makes it the upper bound of the AIC search.
    All candidates of a search share one estimation sample, the selected
    order is then re-estimated on its full sample.
    """
    n = len(x)
    search = max_lag == "auto" if autolag is None else autolag
    if max_lag == "auto":
        upper = min(schwert_max_lag(n), max(n - ADF_MIN_EXTRA, 0))
    else:
        upper = int(max_lag)
        if upper < 0:
            raise BadTestOption(f"max_lag must be >= 0, got {upper}")
    if n < upper + ADF_MIN_EXTRA:
        raise TooShort(f"ADF with max_lag {upper} needs {upper + ADF_MIN_EXTRA} values, got {n}")
    values = _require_variance(x, "ADF")

    if search:
        best_p, best_aic = 0, math.inf
        for p in range(upper + 1):
            y, X = _adf_design(values, p, upper, deterministic)
            aic = _aic(ols(y, X))
            if aic < best_aic:
                best_p, best_aic = p, aic
        p = best_p
    else:
        p = upper

    y, X = _adf_design(values, p, p, deterministic)
    fit = ols(y, X)
    if fit.bse[0] == 0.0:
        raise ZeroVariance(f"ADF: residual variance of {x.name!r} is zero")
    tau = float(fit.params[0] / fit.bse[0])
    logger.debug(f"ADF {x.name!r}: tau={tau:.4f} p={p} nobs={fit.nobs}")
    return TestReport(
        test_name="ADF",
        series_name=x.name,
        statistics={
            "tau": TestStatistic.build(tau, df_tau_critical(fit.nobs, deterministic)),
        },
        deterministic=deterministic,
        lag_order=p,
        n_obs=fit.nobs,
    )


# ─────────────────────────── Phillips-Perron ─────────────────────────────────


def auto_bandwidth(n: int) -> int:
    """Newey-West rule of thumb: floor(4 (n/100)^(2/9))."""
    return int(math.floor(4.0 * (n / 100.0) ** (2.0 / 9.0)))


def long_run_variance(u: np.ndarray, bandwidth: int) -> float:
    """Newey-West estimate with Bartlett weights 1 - j/(bandwidth+1); ``u`` is not demeaned."""
    u = np.asarray(u, dtype=float)
    n = u.size
    lrv = float(u @ u) / n
    for j in range(1, min(bandwidth, n - 1) + 1):
        weight = 1.0 - j / (bandwidth + 1.0)
        lrv += 2.0 * weight * float(u[j:] @ u[:-j]) / n
    return lrv


def pp_test(
    x: AnnualSeries,
    bandwidth: int | Literal["auto"] = "auto",
    deterministic: Deterministic = "constant",
) -> TestReport:
    """Phillips-Perron z(rho) and z(t) from the Dickey-Fuller level regression."""
    n = len(x)
    if n < PP_MIN_LENGTH:
        raise TooShort(f"PP test needs at least {PP_MIN_LENGTH} values, got {n}")
    values = _require_variance(x, "PP")

    y = values[1:]
    nobs = y.size
    X = np.column_stack([values[:-1], *_deterministic_columns(nobs, deterministic)])
    fit = ols(y, X)
    if fit.ssr == 0.0:
        raise ZeroVariance(f"PP: residual variance of {x.name!r} is zero")
    bw = auto_bandwidth(nobs) if bandwidth == "auto" else int(bandwidth)
    if bw < 0:
        raise BadTestOption(f"bandwidth must be >= 0, got {bw}")

    rho = float(fit.params[0])
    sigma = float(fit.bse[0])
    s2 = fit.ssr / fit.df_resid
    gamma0 = fit.ssr / nobs
    lam2 = long_run_variance(fit.resid, bw)
    lam = math.sqrt(lam2)

    z_t = math.sqrt(gamma0 / lam2) * (rho - 1.0) / sigma - 0.5 * (
        (lam2 - gamma0) / lam
    ) * (nobs * sigma / math.sqrt(s2))
    z_rho = nobs * (rho - 1.0) - 0.5 * (nobs**2 * sigma**2 / s2) * (lam2 - gamma0)

    logger.debug(f"PP {x.name!r}: z_rho={z_rho:.4f} z_t={z_t:.4f} bw={bw} nobs={nobs}")
    return TestReport(
        test_name="Phillips-Perron",
        series_name=x.name,
        statistics={
            "z_rho": TestStatistic.build(z_rho, df_rho_critical(nobs, deterministic)),
            "z_t": TestStatistic.build(z_t, df_tau_critical(nobs, deterministic)),
        },
        deterministic=deterministic,
        bandwidth=bw,
        n_obs=nobs,
    )


# ─────────────────────────── cointegration ───────────────────────────────────


def _same_range(a: AnnualSeries, b: AnnualSeries) -> None:
    if a.first_year != b.first_year or a.last_year != b.last_year:
        raise RangeMismatch(
            f"{a.name!r} covers {a.first_year}..{a.last_year}, "
            f"{b.name!r} covers {b.first_year}..{b.last_year}"
        )


def residual_cointegration(
    obs_cum: AnnualSeries,
    pred_cum: AnnualSeries,
    max_lag: int | Literal["auto"] = 0,
    bandwidth: int | Literal["auto"] = "auto",
) -> TestReport:
    """
    ADF and PP on the plain difference obs_cum - pred_cum.

    A difference that is zero up to rounding is reported as degenerate
    without statistics.
    """
    _same_range(obs_cum, pred_cum)
    diff = obs_cum._replace(
        name=f"{obs_cum.name}-minus-predicted", values=obs_cum.values - pred_cum.values
    )
    scale = max(1.0, float(np.max(np.abs(obs_cum.values))))
    if float(np.std(diff.values)) <= 1e-12 * scale:
        logger.warning(f"Cumulative difference of {obs_cum.name!r} has zero variance")
        return TestReport(
            test_name="residual cointegration",
            series_name=diff.name,
            n_obs=len(diff),
            degenerate=True,
            note="difference between cumulative curves has zero variance",
        )

    adf = adf_test(diff, max_lag=max_lag)
    pp = pp_test(diff, bandwidth=bandwidth)
    return TestReport(
        test_name="residual cointegration",
        series_name=diff.name,
        statistics={
            "adf_tau": adf.statistics["tau"],
            "pp_z_rho": pp.statistics["z_rho"],
            "pp_z_t": pp.statistics["z_t"],
        },
        lag_order=adf.lag_order,
        bandwidth=pp.bandwidth,
        n_obs=adf.n_obs,
    )


def johansen_trace(a: AnnualSeries, b: AnnualSeries, var_lag: int = 1) -> TestReport:
    """
    Johansen trace test for a bivariate VECM with an unrestricted constant.

    ``trace_r0`` tests rank 0 against 2, ``trace_r1`` rank <= 1 against 2;
    both are right-tailed.
    """
    _same_range(a, b)
    if len(a) < JOHANSEN_MIN_LENGTH:
        raise TooShort(f"Johansen test needs at least {JOHANSEN_MIN_LENGTH} values, got {len(a)}")
    if var_lag < 0:
        raise BadTestOption(f"var_lag must be >= 0, got {var_lag}")
    _require_variance(a, "Johansen")
    _require_variance(b, "Johansen")

    levels = np.column_stack([a.values, b.values])
    dy = np.diff(levels, axis=0)
    rows = np.arange(var_lag, dy.shape[0])
    z0 = dy[rows]
    z1 = levels[rows]
    z2 = np.column_stack([np.ones(rows.size), *[dy[rows - i] for i in range(1, var_lag + 1)]])

    coef0, *_ = np.linalg.lstsq(z2, z0, rcond=None)
    coef1, *_ = np.linalg.lstsq(z2, z1, rcond=None)
    r0 = z0 - z2 @ coef0
    r1 = z1 - z2 @ coef1
    t = rows.size

    s00 = r0.T @ r0 / t
    s11 = r1.T @ r1 / t
    s01 = r0.T @ r1 / t
    for name, mat in (("S00", s00), ("S11", s11)):
        if np.linalg.cond(mat) > 1e12:
            raise SingularMoments(f"Johansen moment matrix {name} is singular")

    try:
        lhs = s01.T @ linalg.solve(s00, s01, assume_a="pos")
        eig = linalg.eigh(lhs, s11, eigvals_only=True)
    except linalg.LinAlgError as e:
        raise SingularMoments(f"Johansen eigenproblem failed: {e}") from e
    eig = np.clip(np.sort(eig)[::-1], 0.0, 1.0 - 1e-15)

    logs = np.log1p(-eig)
    trace_r0 = float(-t * logs.sum())
    trace_r1 = float(-t * logs[1:].sum())
    logger.debug(f"Johansen: eig={eig.tolist()} trace=({trace_r0:.4f}, {trace_r1:.4f})")
    return TestReport(
        test_name="Johansen trace",
        series_name=f"{a.name},{b.name}",
        statistics={
            "trace_r0": TestStatistic.build(trace_r0, johansen_trace_critical(2), tail="right"),
            "trace_r1": TestStatistic.build(trace_r1, johansen_trace_critical(1), tail="right"),
        },
        deterministic="unrestricted constant",
        lag_order=var_lag,
        n_obs=t,
        eigenvalues=[float(v) for v in eig],
    )


def johansen_rank(report: TestReport, level: str = "5%") -> int:
    """Cointegration rank implied by sequential trace testing."""
    if not report.rejects(level, "trace_r0"):
        return 0
    if not report.rejects(level, "trace_r1"):
        return 1
    return 2


# ─────────────────────────── accuracy ────────────────────────────────────────


def _values(x: AnnualSeries | np.ndarray) -> np.ndarray:
    return x.values if isinstance(x, AnnualSeries) else np.asarray(x, dtype=float)


def rmse(residual: AnnualSeries | np.ndarray) -> float:
    """Root-mean-square of residuals."""
    values = _values(residual)
    if values.size == 0:
        raise InsufficientOverlap("rmse of an empty residual series")
    return float(np.sqrt(np.mean(values**2)))


def r_squared(obs: AnnualSeries | np.ndarray, pred: AnnualSeries | np.ndarray) -> float:
    """1 - SSE/SST over the common years of ``obs`` and ``pred``."""
    if isinstance(obs, AnnualSeries) and isinstance(pred, AnnualSeries):
        obs, pred = align(obs, pred)
    o, p = _values(obs), _values(pred)
    if o.size == 0 or o.size != p.size:
        raise InsufficientOverlap(f"r_squared needs equal nonempty inputs, got {o.size}/{p.size}")
    dev = o - o.mean()
    sst = float(dev @ dev)
    if sst == 0.0:
        raise ZeroVariance("R² is undefined for constant observations")
    err = o - p
    return 1.0 - float(err @ err) / sst


def naive_rmsfe(x: AnnualSeries, h: int = 1) -> float:
    """RMS error of the no-change forecast x(t-h) for x(t)."""
    if h < 1:
        raise BadTestOption(f"horizon must be >= 1, got {h}")
    if len(x) <= h:
        raise TooShort(f"naive_rmsfe at horizon {h} needs more than {h} values, got {len(x)}")
    d = x.values[h:] - x.values[:-h]
    return float(np.sqrt(np.mean(d**2)))


def ar1_rmsfe(x: AnnualSeries, h: int = 1) -> float:
    """
    RMS error of an AR(1) with estimated intercept and coefficient, iterated h steps.

    The AR(1) is estimated once on the whole series, so this is an in-sample
    benchmark comparable with ``naive_rmsfe``.
    """
    if h < 1:
        raise BadTestOption(f"horizon must be >= 1, got {h}")
    if len(x) < h + 3:
        raise TooShort(f"ar1_rmsfe at horizon {h} needs {h + 3} values, got {len(x)}")
    values = _require_variance(x, "AR(1)")
    fit = ols(values[1:], np.column_stack([np.ones(len(x) - 1), values[:-1]]))
    c, phi = float(fit.params[0]), float(fit.params[1])
    level = c * sum(phi**i for i in range(h))
    forecast = level + phi**h * values[:-h]
    err = values[h:] - forecast
    return float(np.sqrt(np.mean(err**2)))


def normalized_error(error: float, x: AnnualSeries) -> float:
    """Forecast error relative to the sample standard deviation of ``x``."""
    sd = float(np.std(_require_variance(x, "normalized_error"), ddof=1))
    return error / sd
