"""Unit tests for lfphillips.series: AnnualSeries and its transformations."""

import numpy as np
import pytest

from lfphillips.exceptions import (
    BadWindow,
    InsufficientOverlap,
    NonConsecutiveYears,
    NonFiniteValue,
    NonPositiveLevel,
    TooShort,
    YearOutOfRange,
    ZeroVariance,
)
from lfphillips.series import (
    AnnualSeries,
    CumulativeSeries,
    Unit,
    align,
    cumulative,
    difference,
    log_change,
    moving_average,
    pearson_r,
    redistribute_step,
    shift,
    summary_stats,
    to_fraction,
)

# ─────────────────────────── construction ────────────────────────────────────


class TestAnnualSeries:
    """Construction, immutability and accessors."""

    def test_values_are_read_only(self, make_series):
        """Values cannot be modified after construction."""
        s = make_series([1.0, 2.0])
        with pytest.raises(ValueError):
            s.values[0] = 5.0

    def test_input_array_is_copied(self, make_series):
        """Mutating the source array does not change the series."""
        raw = np.array([1.0, 2.0])
        s = make_series(raw)
        raw[0] = 9.0
        assert s.values[0] == 1.0

    def test_nan_rejected(self, make_series):
        """NaN values are refused with the offending year."""
        with pytest.raises(NonFiniteValue, match="2001"):
            make_series([1.0, float("nan")])

    def test_empty_rejected(self, make_series):
        """A series needs at least one value."""
        with pytest.raises(TooShort):
            make_series([])

    def test_from_pairs_rejects_gap(self):
        """Years 1960, 1962 are not consecutive."""
        with pytest.raises(NonConsecutiveYears):
            AnnualSeries.from_pairs("x", "level", [1960, 1962], [1.0, 2.0])

    def test_from_pairs_rejects_disorder(self):
        """Descending years are refused."""
        with pytest.raises(NonConsecutiveYears):
            AnnualSeries.from_pairs("x", "level", [1961, 1960], [1.0, 2.0])

    def test_years_and_value(self, make_series):
        """Year accessors follow first_year."""
        s = make_series([1.0, 2.0, 3.0], first_year=1990)
        assert s.last_year == 1992
        assert s.years.tolist() == [1990, 1991, 1992]
        assert s.value(1991) == 2.0

    def test_value_out_of_range(self, make_series):
        """Asking for a year outside the range raises."""
        with pytest.raises(YearOutOfRange):
            make_series([1.0], first_year=1990).value(1991)

    def test_window(self, make_series):
        """Windows are inclusive on both ends."""
        s = make_series([1.0, 2.0, 3.0, 4.0], first_year=1990)
        w = s.window(1991, 1992)
        assert w.first_year == 1991
        assert w.values.tolist() == [2.0, 3.0]

    def test_equality_compares_values(self, make_series):
        """Two series with equal unit, years and values are equal."""
        assert make_series([1.0, 2.0]) == make_series([1.0, 2.0], name="other")
        assert make_series([1.0, 2.0]) != make_series([1.0, 2.5])

    def test_cumulative_requires_level(self):
        """CumulativeSeries are always in level units."""
        from lfphillips.exceptions import SeriesError

        with pytest.raises(SeriesError):
            CumulativeSeries(name="c", unit=Unit.FRACTION, first_year=2000, values=[1.0])


# ─────────────────────────── transformations ─────────────────────────────────


class TestLogChange:
    """Backward log-differences of level series."""

    def test_matches_hand_computation(self, make_series):
        """Three levels give two log-changes starting one year later."""
        s = make_series([100.0, 110.0, 121.0], first_year=1960, unit="level")
        r = log_change(s)
        assert r.first_year == 1961
        assert r.unit == Unit.FRACTION
        np.testing.assert_allclose(r.values, [np.log(1.1), np.log(1.1)], rtol=1e-14)

    def test_constant_level_gives_zeros(self, make_series):
        """Constant level → zero change."""
        r = log_change(make_series([5.0, 5.0, 5.0], unit="level"))
        assert np.all(r.values == 0.0)

    def test_non_positive_rejected(self, make_series):
        """A zero level has no logarithm."""
        with pytest.raises(NonPositiveLevel, match="2001"):
            log_change(make_series([1.0, 0.0, 2.0], unit="level"))

    def test_too_short(self, make_series):
        """A single value cannot be differenced."""
        with pytest.raises(TooShort):
            log_change(make_series([1.0], unit="level"))


class TestCumulative:
    """Running sums from a base year."""

    def test_running_sum(self, make_series):
        """out(base) equals r(base) and every step adds one value."""
        r = make_series([0.1, 0.2, 0.3, 0.4], first_year=1960)
        c = cumulative(r, 1961)
        assert c.first_year == 1961
        assert c.base_year == 1961
        np.testing.assert_allclose(c.values, [0.2, 0.5, 0.9])

    def test_difference_recovers_rate(self, make_series):
        """First differences of the cumulative give back the rates."""
        r = make_series([0.03, -0.01, 0.02, 0.05], first_year=1960)
        c = cumulative(r, 1960)
        np.testing.assert_allclose(np.diff(c.values), r.values[1:], atol=1e-15)

    def test_base_year_outside(self, make_series):
        """The base year must lie in the series."""
        with pytest.raises(YearOutOfRange):
            cumulative(make_series([0.1, 0.2], first_year=1960), 1959)


class TestMovingAverage:
    """Centered odd-width moving averages."""

    def test_trims_ends(self, make_series):
        """Window 3 drops one year at each end."""
        ma = moving_average(make_series([1.0, 2.0, 3.0, 4.0, 5.0], first_year=2000), 3)
        assert ma.first_year == 2001
        np.testing.assert_allclose(ma.values, [2.0, 3.0, 4.0])

    def test_constant_series_is_exact(self, make_series):
        """A constant stays exactly constant."""
        ma = moving_average(make_series([0.1] * 7), 3)
        assert np.all(ma.values == 0.1)

    def test_window_one_is_identity(self, make_series):
        """Window 1 returns the input."""
        s = make_series([1.0, 2.0])
        assert moving_average(s, 1) == s

    @pytest.mark.parametrize("window", [0, 2, 7])
    def test_bad_window(self, make_series, window):
        """Even, non-positive and too-long windows are refused."""
        with pytest.raises(BadWindow):
            moving_average(make_series([1.0, 2.0, 3.0, 4.0, 5.0]), window)


class TestShiftAndAlign:
    """Lagging and common-window alignment."""

    def test_shift_moves_years(self, make_series):
        """out(t) = x(t - lag)."""
        s = make_series([1.0, 2.0], first_year=2000)
        lagged = shift(s, 2)
        assert lagged.first_year == 2002
        assert lagged.value(2002) == s.value(2000)

    def test_negative_lag_leads(self, make_series):
        """Negative lags move the series earlier."""
        assert shift(make_series([1.0], first_year=2000), -1).first_year == 1999

    def test_align_intersects(self, make_series):
        """Aligned series share the overlapping years."""
        a, b = align(make_series([1, 2, 3], 2000), make_series([4, 5, 6], 2001))
        assert (a.first_year, a.last_year) == (2001, 2002)
        assert b.values.tolist() == [4.0, 5.0]

    def test_align_disjoint(self, make_series):
        """No common year → InsufficientOverlap."""
        with pytest.raises(InsufficientOverlap):
            align(make_series([1.0], 2000), make_series([1.0], 2005))


class TestPearson:
    """Lagged Pearson correlation."""

    def test_identical_series(self, make_series):
        """A series correlates perfectly with itself."""
        s = make_series([0.01, 0.03, 0.02, 0.05, 0.04])
        assert pearson_r(s, s) == pytest.approx(1.0, abs=1e-12)

    def test_lag_aligns_shifted_copy(self, make_series):
        """b lagged by 1 matches a series that trails it by one year."""
        b = make_series([1.0, 3.0, 2.0, 5.0, 4.0, 6.0], first_year=2000)
        a = make_series(b.values[:-1], first_year=2001)
        assert pearson_r(a, b, lag=1) == pytest.approx(1.0, abs=1e-12)

    def test_constant_series(self, make_series):
        """Correlation with a constant is undefined."""
        with pytest.raises(ZeroVariance):
            pearson_r(make_series([1.0, 2.0, 3.0]), make_series([2.0, 2.0, 2.0]))

    def test_needs_three_points(self, make_series):
        """Two overlapping years are not enough."""
        with pytest.raises(InsufficientOverlap):
            pearson_r(make_series([1.0, 2.0]), make_series([2.0, 1.0]))


class TestRedistributeStep:
    """Spreading a step revision backwards."""

    def test_preserves_first_and_last(self, make_series):
        """First and last values are unchanged."""
        s = make_series([10.0, 10.0, 10.0, 20.0, 20.0], first_year=1990)
        out = redistribute_step(s, 1993, 10.0)
        assert out.values[0] == 10.0
        assert out.values[-1] == 20.0

    def test_removes_the_jump(self, make_series):
        """The step becomes a linear ramp."""
        s = make_series([10.0, 10.0, 10.0, 20.0, 20.0], first_year=1990)
        out = redistribute_step(s, 1993, 10.0)
        np.testing.assert_allclose(np.diff(out.values)[:3], [10 / 3] * 3)

    def test_step_year_must_be_interior(self, make_series):
        """The step cannot sit on the boundary."""
        with pytest.raises(YearOutOfRange):
            redistribute_step(make_series([1.0, 2.0, 3.0], first_year=1990), 1990, 1.0)


class TestUnitsAndStats:
    """Unit conversion, differences and summary statistics."""

    def test_percent_to_fraction(self, make_series):
        """2.5 percent is 0.025."""
        r = to_fraction(make_series([2.5, 3.0], unit="percent"))
        assert r.unit == Unit.FRACTION
        np.testing.assert_allclose(r.values, [0.025, 0.03])

    def test_difference(self, make_series):
        """h-step differences."""
        d = difference(make_series([1.0, 2.0, 4.0, 7.0], first_year=2000), 2)
        assert d.first_year == 2002
        assert d.values.tolist() == [3.0, 5.0]

    def test_summary_stats(self, make_series):
        """Mean and sample standard deviation."""
        stats = summary_stats(make_series([1.0, 2.0, 3.0]))
        assert stats.mean == pytest.approx(2.0)
        assert stats.sd == pytest.approx(1.0)
        assert stats.n == 3


class TestProperties:
    """Identities every transformation must satisfy."""

    def test_cumulative_log_change_telescopes(self, make_series):
        """Cumulative log-changes equal log-level differences."""
        rng = np.random.default_rng(3)
        levels = make_series(100 * np.exp(np.cumsum(rng.normal(0, 0.05, 30))), 1960, "level")
        c = cumulative(log_change(levels), 1965)
        expected = np.log(levels.values[5:]) - np.log(levels.value(1964))
        np.testing.assert_allclose(c.values, expected, atol=1e-12)

    def test_shift_round_trip(self, make_series):
        """shift(shift(x, k), -k) == x."""
        s = make_series([0.1, 0.2, 0.3])
        assert shift(shift(s, 3), -3) == s

    def test_pearson_symmetric(self, make_series):
        """pearson_r(a, b) == pearson_r(b, a)."""
        a = make_series([0.1, 0.4, 0.2, 0.6, 0.3])
        b = make_series([1.0, 0.5, 0.7, 0.2, 0.9])
        assert pearson_r(a, b) == pytest.approx(pearson_r(b, a), abs=1e-12)

    def test_zero_step_is_identity(self, make_series):
        """A step of 0 changes nothing."""
        s = make_series([10.0, 10.0, 10.0, 15.0, 15.0], first_year=1990)
        assert redistribute_step(s, 1993, 0.0) == s

    def test_step_ramp_is_monotone(self, make_series):
        """[10,10,10,15,15] with the step at the fourth year ramps from 10 to 15."""
        s = make_series([10.0, 10.0, 10.0, 15.0, 15.0], first_year=1990)
        out = redistribute_step(s, 1993, 5.0)
        assert np.all(np.diff(out.values) >= 0)
        assert out.values[0] == 10.0
        assert out.values[-1] == 15.0
