"""Unit tests for unit-root, cointegration and accuracy statistics."""

from pathlib import Path

import numpy as np
import pytest

from lfphillips.exceptions import (
    BadTestOption,
    InsufficientOverlap,
    RangeMismatch,
    SingularMoments,
    TestError,
    TooShort,
    ZeroVariance,
)
from lfphillips.series import AnnualSeries, Unit
from lfphillips.services.critical_values import (
    df_rho_critical,
    df_tau_critical,
    johansen_trace_critical,
)
from lfphillips.services.econtests import (
    adf_test,
    ar1_rmsfe,
    auto_bandwidth,
    johansen_rank,
    johansen_trace,
    long_run_variance,
    naive_rmsfe,
    normalized_error,
    pp_test,
    r_squared,
    residual_cointegration,
    rmse,
    schwert_max_lag,
)

FIXTURES = Path(__file__).parents[2] / "fixtures"


def level(values, first_year=1950, name="x") -> AnnualSeries:
    return AnnualSeries(name=name, unit=Unit.LEVEL, first_year=first_year, values=values)


def walk(n: int, seed: int, drift: float = 0.0, name: str = "x") -> AnnualSeries:
    rng = np.random.default_rng(seed)
    return level(np.cumsum(drift + rng.standard_normal(n)), name=name)


@pytest.fixture
def random_walk_60() -> AnnualSeries:
    """Committed random walk with drift, 1950..2009."""
    data = np.loadtxt(FIXTURES / "random_walk_60.csv", delimiter=",", comments="#",
                      skiprows=2)
    return level(data[:, 1], first_year=int(data[0, 0]), name="rw")


def ols_tau(y: np.ndarray, X: np.ndarray) -> float:
    """t-ratio of the first coefficient from the normal equations."""
    xtx = X.T @ X
    beta = np.linalg.solve(xtx, X.T @ y)
    resid = y - X @ beta
    s2 = resid @ resid / (y.size - X.shape[1])
    return beta[0] / np.sqrt(s2 * np.linalg.inv(xtx)[0, 0])


# ─────────────────────────── critical values ─────────────────────────────────


class TestCriticalValues:
    """Interpolated Dickey-Fuller and Johansen tables."""

    def test_tau_interpolated_in_n(self):
        """1% tau at 52 and 47 observations."""
        assert round(df_tau_critical(52)["1%"], 2) == -3.58
        assert round(df_tau_critical(47)["1%"], 2) == -3.60

    def test_small_samples_use_first_row(self):
        """Below 25 observations the 25 row applies."""
        assert df_tau_critical(12) == df_tau_critical(25)

    def test_beyond_500_linear_in_inverse_n(self):
        """At n=1000 the value is halfway between the 500 row and the limit."""
        assert df_tau_critical(1000)["5%"] == pytest.approx(-2.865)

    def test_trend_table(self):
        """The trend table is more negative."""
        assert df_tau_critical(50, "constant+trend")["5%"] == -3.50
        assert df_rho_critical(100, "constant+trend")["5%"] == -20.7

    @pytest.mark.parametrize("n_obs", [50, 100, 250, 500, 1000])
    @pytest.mark.parametrize(("deterministic", "regression"), [("constant", "c"),
                                                               ("constant+trend", "ct")])
    def test_tau_close_to_response_surface(self, n_obs, deterministic, regression):
        """Tabulated tau agrees with MacKinnon's response surface within 0.02."""
        adfvalues = pytest.importorskip("statsmodels.tsa.adfvalues")
        surface = adfvalues.mackinnoncrit(N=1, regression=regression, nobs=n_obs)
        table = df_tau_critical(n_obs, deterministic)
        for level, expected in zip(("1%", "5%", "10%"), surface, strict=True):
            assert table[level] == pytest.approx(expected, abs=0.02)

    def test_unknown_table(self):
        """Unknown deterministic terms are refused."""
        with pytest.raises(TestError):
            df_tau_critical(50, "none")
        with pytest.raises(TestError):
            johansen_trace_critical(3)


# ─────────────────────────── ADF ─────────────────────────────────────────────


class TestAdf:
    """Augmented Dickey-Fuller regressions."""

    def test_fixed_lag_matches_normal_equations(self, ar_fixture):
        """tau with one lagged difference equals an independent OLS."""
        x = ar_fixture.values
        dx = np.diff(x)
        X = np.column_stack([x[1:-1], dx[:-1], np.ones(dx.size - 1)])
        expected = ols_tau(dx[1:], X)

        report = adf_test(ar_fixture, max_lag=1)
        assert report.statistic == pytest.approx(expected, abs=1e-8)
        assert report.lag_order == 1
        assert report.n_obs == 18

    def test_trend_matches_normal_equations(self, ar_fixture):
        """The trend column enters as 1..nobs."""
        x = ar_fixture.values
        dx = np.diff(x)
        X = np.column_stack([x[:-1], np.ones(dx.size), np.arange(1, dx.size + 1)])
        report = adf_test(ar_fixture, max_lag=0, deterministic="constant+trend")
        assert report.statistic == pytest.approx(ols_tau(dx, X), abs=1e-8)
        assert report.statistics["tau"].critical_values == df_tau_critical(19, "constant+trend")

    def test_random_walk_not_rejected(self, random_walk_60):
        """A random walk keeps its unit root at 5%."""
        report = adf_test(random_walk_60, max_lag=0)
        assert report.n_obs == 59
        assert not report.rejects("5%")

    def test_white_noise_rejected(self):
        """Independent draws have no unit root."""
        noise = level(np.random.default_rng(3).standard_normal(100))
        assert adf_test(noise).rejects("1%")

    def test_auto_lag_bounded(self, ar_fixture):
        """The AIC search stays within the Schwert bound."""
        report = adf_test(ar_fixture)
        assert 0 <= report.lag_order <= schwert_max_lag(20)

    def test_autolag_with_integer_bound(self, random_walk_60):
        """An integer max_lag becomes the search bound with autolag=True."""
        report = adf_test(random_walk_60, max_lag=3, autolag=True)
        assert 0 <= report.lag_order <= 3

    def test_matches_statsmodels(self, random_walk_60):
        """Fixed-lag and AIC-selected statistics agree with statsmodels."""
        stattools = pytest.importorskip("statsmodels.tsa.stattools")
        x = random_walk_60.values

        fixed = stattools.adfuller(x, maxlag=2, regression="c", autolag=None)
        assert adf_test(random_walk_60, max_lag=2).statistic == pytest.approx(fixed[0], abs=1e-8)

        searched = stattools.adfuller(x, maxlag=4, regression="c", autolag="AIC")
        report = adf_test(random_walk_60, max_lag=4, autolag=True)
        assert report.lag_order == searched[2]
        assert report.statistic == pytest.approx(searched[0], abs=1e-8)

    def test_too_short(self):
        """n must be at least max_lag + 10."""
        with pytest.raises(TooShort):
            adf_test(walk(12, seed=1), max_lag=3)

    def test_constant_series(self):
        """A constant series has no variance to test."""
        with pytest.raises(ZeroVariance):
            adf_test(level(np.full(30, 2.0)), max_lag=0)

    def test_negative_lag(self):
        """Lag orders are non-negative."""
        with pytest.raises(BadTestOption):
            adf_test(walk(30, seed=1), max_lag=-1)

    def test_schwert_bound(self):
        """floor(12 (n/100)^(1/4))."""
        assert schwert_max_lag(100) == 12
        assert schwert_max_lag(52) == 10


# ─────────────────────────── Phillips-Perron ─────────────────────────────────


class TestPhillipsPerron:

    @pytest.mark.parametrize("fixture", ["random_walk_60", "ar_fixture"])
    def test_zero_bandwidth_equals_df(self, request, fixture):
        """Without autocorrelation correction z(t) is the Dickey-Fuller t."""
        series = request.getfixturevalue(fixture)
        pp = pp_test(series, bandwidth=0)
        adf = adf_test(series, max_lag=0)
        assert pp.statistics["z_t"].value == pytest.approx(adf.statistic, abs=1e-10)

    def test_zero_bandwidth_z_rho(self, random_walk_60):
        """z(rho) reduces to n(rho - 1)."""
        x = random_walk_60.values
        X = np.column_stack([x[:-1], np.ones(x.size - 1)])
        rho = np.linalg.lstsq(X, x[1:], rcond=None)[0][0]
        pp = pp_test(random_walk_60, bandwidth=0)
        assert pp.statistics["z_rho"].value == pytest.approx(59 * (rho - 1.0), abs=1e-9)

    def test_negative_bandwidth(self, random_walk_60):
        """Bandwidths are non-negative."""
        with pytest.raises(BadTestOption, match="bandwidth"):
            pp_test(random_walk_60, bandwidth=-1)

    def test_auto_bandwidth(self, random_walk_60):
        """floor(4 (nobs/100)^(2/9))."""
        assert auto_bandwidth(100) == 4
        assert pp_test(random_walk_60).bandwidth == auto_bandwidth(59) == 3

    def test_statistics_and_tails(self, random_walk_60):
        """Both statistics are left-tailed with their own tables."""
        pp = pp_test(random_walk_60)
        assert set(pp.statistics) == {"z_rho", "z_t"}
        assert pp.statistics["z_rho"].critical_values == df_rho_critical(59)
        assert all(s.tail == "left" for s in pp.statistics.values())

    def test_long_run_variance(self):
        """Bartlett-weighted autocovariances of an undemeaned series."""
        u = np.array([1.0, -1.0, 1.0, -1.0])
        # gamma0 = 1, gamma1 = -3/4, weight 1/2
        assert long_run_variance(u, 1) == pytest.approx(1.0 - 0.75)
        assert long_run_variance(u, 0) == pytest.approx(1.0)

    def test_too_short(self):
        """At least 15 values."""
        with pytest.raises(TooShort):
            pp_test(walk(14, seed=1))


# ─────────────────────────── cointegration ───────────────────────────────────


class TestResidualCointegration:

    def test_identical_curves_are_degenerate(self, random_walk_60):
        """A zero difference reports no statistics."""
        report = residual_cointegration(random_walk_60, random_walk_60)
        assert report.degenerate
        assert report.statistics == {}

    def test_stationary_difference_rejected(self, random_walk_60):
        """obs - pred equal to white noise rejects the unit root."""
        noise = np.random.default_rng(5).normal(0, 0.5, 60)
        pred = random_walk_60._replace(values=random_walk_60.values - noise)
        report = residual_cointegration(random_walk_60, pred)
        assert set(report.statistics) == {"adf_tau", "pp_z_rho", "pp_z_t"}
        assert report.lag_order == 0
        assert report.rejects("5%", "adf_tau")

    def test_difference_is_plain(self, random_walk_60):
        """The statistic is the ADF of obs - pred."""
        noise = np.random.default_rng(6).normal(0, 0.5, 60)
        pred = random_walk_60._replace(values=random_walk_60.values - noise)
        report = residual_cointegration(random_walk_60, pred)
        assert report.statistics["adf_tau"].value == pytest.approx(
            adf_test(level(noise), max_lag=0).statistic, abs=1e-8
        )

    def test_range_mismatch(self, random_walk_60):
        """Both curves must cover the same years."""
        with pytest.raises(RangeMismatch):
            residual_cointegration(random_walk_60, random_walk_60.window(1951, 2009))


class TestJohansen:

    def test_independent_walks(self):
        """Eigenvalues are ordered in [0, 1) and traces are nonnegative."""
        report = johansen_trace(walk(100, 1, name="a"), walk(100, 2, name="b"))
        eig = report.eigenvalues
        assert 1 > eig[0] >= eig[1] >= 0
        r0 = report.statistics["trace_r0"].value
        r1 = report.statistics["trace_r1"].value
        assert r0 >= r1 >= 0
        assert report.n_obs == 98

    def test_cointegrated_pair(self):
        """A walk and the walk plus noise have rank at least one."""
        a = walk(200, 3, drift=0.5, name="a")
        noise = np.random.default_rng(4).normal(0, 0.5, 200)
        b = a._replace(name="b", values=a.values + noise)
        report = johansen_trace(a, b)
        assert report.rejects("1%", "trace_r0")
        assert johansen_rank(report) >= 1

    def test_right_tailed(self):
        """Trace statistics reject above the table values."""
        report = johansen_trace(walk(60, 1, name="a"), walk(60, 2, name="b"), var_lag=2)
        stat = report.statistics["trace_r1"]
        assert stat.tail == "right"
        assert stat.critical_values == johansen_trace_critical(1)
        assert stat.reject["5%"] == (stat.value > 3.8415)

    def test_singular_moments(self):
        """Exactly proportional series have singular moment matrices."""
        a = walk(60, 1, name="a")
        with pytest.raises(SingularMoments):
            johansen_trace(a, a._replace(name="b", values=2.0 * a.values))

    def test_too_short(self):
        """At least 20 observations."""
        with pytest.raises(TooShort):
            johansen_trace(walk(19, 1), walk(19, 2))

    def test_rank_from_flags(self):
        """Rank stops at the first non-rejection."""
        report = johansen_trace(walk(100, 1, name="a"), walk(100, 2, name="b"))
        expected = 0 if not report.rejects("5%", "trace_r0") else (
            1 if not report.rejects("5%", "trace_r1") else 2
        )
        assert johansen_rank(report) == expected


# ─────────────────────────── accuracy ────────────────────────────────────────


class TestAccuracy:

    def test_rmse(self):
        """sqrt of the mean square."""
        assert rmse(np.array([3.0, 4.0])) == pytest.approx(np.sqrt(12.5))

    def test_rmse_empty(self):
        """An empty residual has no RMSE."""
        with pytest.raises(InsufficientOverlap):
            rmse(np.array([]))

    def test_r_squared(self, make_series):
        """Perfect prediction gives 1, the mean gives 0."""
        obs = make_series([1.0, 2.0, 3.0, 4.0])
        assert r_squared(obs, obs) == 1.0
        assert r_squared(obs, make_series([2.5] * 4)) == pytest.approx(0.0)

    def test_r_squared_aligns_series(self, make_series):
        """Only common years are compared."""
        obs = make_series([1.0, 2.0, 3.0], first_year=2000)
        pred = make_series([2.0, 3.0, 9.0], first_year=2001)
        assert r_squared(obs, pred) == 1.0

    def test_r_squared_constant(self, make_series):
        """Constant observations have no variance to explain."""
        with pytest.raises(ZeroVariance):
            r_squared(make_series([1.0, 1.0]), make_series([1.0, 2.0]))

    def test_naive_rmsfe(self, make_series):
        """No-change errors at horizons 1 and 2."""
        x = make_series([1.0, 2.0, 4.0, 7.0])
        assert naive_rmsfe(x) == pytest.approx(np.sqrt(14 / 3))
        assert naive_rmsfe(x, 2) == pytest.approx(np.sqrt(17))

    @pytest.mark.parametrize("seed", range(10))
    @pytest.mark.parametrize("h", [1, 3])
    def test_naive_matches_differences(self, make_series, seed, h):
        """No-change RMSFE is the RMS of the h-year differences."""
        x = np.random.default_rng(seed).normal(0.02, 0.01, 30).cumsum()
        expected = np.sqrt(np.mean((x[h:] - x[:-h]) ** 2))
        assert naive_rmsfe(make_series(list(x)), h) == pytest.approx(expected, rel=1e-12)

    def test_naive_constant(self, make_series):
        """A constant series is forecast without error."""
        assert naive_rmsfe(make_series([0.03] * 12), 2) == 0.0

    def test_naive_too_short(self, make_series):
        """The horizon must fit inside the series."""
        with pytest.raises(TooShort):
            naive_rmsfe(make_series([1.0, 2.0]), 2)

    def test_ar1_exact(self, make_series):
        """A deterministic AR(1) is forecast without error."""
        values = [3.0]
        for _ in range(15):
            values.append(0.5 + 0.5 * values[-1])
        x = make_series(values)
        assert ar1_rmsfe(x, 1) < 1e-10
        assert ar1_rmsfe(x, 3) < 1e-10

    def test_normalized_error(self, make_series):
        """Errors are scaled by the sample standard deviation."""
        x = make_series([1.0, 2.0, 3.0])
        assert normalized_error(2.0, x) == pytest.approx(2.0)
