"""Embedded critical-value tables.

Dickey-Fuller quantiles are Fuller's finite-sample tables (Fuller 1976,
reproduced as Tables B.5/B.6 in Hamilton, Time Series Analysis, 1994) for
the t-statistic (``tau``) and the normalized bias ``n(rho - 1)`` (``rho``).
They are interpolated linearly in the number of regression observations
between the tabulated sizes, and linearly in 1/n between 500 and infinity.

The normalized bias has no MacKinnon response surface, so tau uses Fuller's
tables as well. At the tabulated sizes from n = 50 on they agree with the
MacKinnon (2010) response surface to within 0.02.

Johansen trace quantiles are MacKinnon, Haug and Michelis (1999) values for
a VECM with an unrestricted constant.
"""

import math

import numpy as np

from lfphillips.exceptions import TestError

LEVELS = ("1%", "5%", "10%")

SAMPLE_SIZES = (25, 50, 100, 250, 500, math.inf)

#                     1%      5%     10%
DF_TAU = {
    "constant": (
        (-3.75, -3.00, -2.63),
        (-3.58, -2.93, -2.60),
        (-3.51, -2.89, -2.58),
        (-3.46, -2.88, -2.57),
        (-3.44, -2.87, -2.57),
        (-3.43, -2.86, -2.57),
    ),
    "constant+trend": (
        (-4.38, -3.60, -3.24),
        (-4.15, -3.50, -3.18),
        (-4.04, -3.45, -3.15),
        (-3.99, -3.43, -3.13),
        (-3.98, -3.42, -3.13),
        (-3.96, -3.41, -3.12),
    ),
}

DF_RHO = {
    "constant": (
        (-17.2, -12.5, -10.2),
        (-18.9, -13.3, -10.7),
        (-19.8, -13.7, -11.0),
        (-20.3, -14.0, -11.2),
        (-20.5, -14.0, -11.2),
        (-20.7, -14.1, -11.3),
    ),
    "constant+trend": (
        (-22.5, -17.9, -15.6),
        (-25.7, -19.8, -16.8),
        (-27.4, -20.7, -17.5),
        (-28.4, -21.3, -18.0),
        (-28.9, -21.5, -18.1),
        (-29.5, -21.8, -18.3),
    ),
}

# keyed by n - r (number of common trends under the null)
JOHANSEN_TRACE_CONSTANT = {
    1: {"1%": 6.6349, "5%": 3.8415, "10%": 2.7055},
    2: {"1%": 19.9349, "5%": 15.4943, "10%": 13.4294},
}


def _interpolate(table: tuple[tuple[float, float, float], ...], n_obs: int) -> dict[str, float]:
    rows = np.asarray(table, dtype=float)
    finite = np.asarray(SAMPLE_SIZES[:-1], dtype=float)
    if n_obs <= finite[0]:
        values = rows[0]
    elif n_obs <= finite[-1]:
        values = np.array([np.interp(n_obs, finite, rows[:-1, j]) for j in range(3)])
    else:
        # between 500 and infinity: linear in 1/n
        w = (1.0 / n_obs) / (1.0 / finite[-1])
        values = rows[-1] + w * (rows[-2] - rows[-1])
    return {level: float(v) for level, v in zip(LEVELS, values, strict=True)}


def df_tau_critical(n_obs: int, deterministic: str = "constant") -> dict[str, float]:
    """Critical values of the Dickey-Fuller t-statistic (ADF, PP z(t))."""
    try:
        return _interpolate(DF_TAU[deterministic], n_obs)
    except KeyError as e:
        raise TestError(f"No tau table for deterministic={deterministic!r}") from e


def df_rho_critical(n_obs: int, deterministic: str = "constant") -> dict[str, float]:
    """Critical values of the normalized-bias statistic (PP z(rho))."""
    try:
        return _interpolate(DF_RHO[deterministic], n_obs)
    except KeyError as e:
        raise TestError(f"No rho table for deterministic={deterministic!r}") from e


def johansen_trace_critical(common_trends: int) -> dict[str, float]:
    """Trace-test critical values for ``common_trends`` = n - r in a bivariate VECM."""
    try:
        return dict(JOHANSEN_TRACE_CONSTANT[common_trends])
    except KeyError as e:
        raise TestError(f"No trace table for n - r = {common_trends}") from e
