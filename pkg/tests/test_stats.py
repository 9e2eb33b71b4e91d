import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from hawkeslob.stats import (
    WeightedDistribution,
    compare_samples,
    conditional_waiting_time,
    cvm_two_sample,
    empirical_pdf,
    ks_two_sample,
    mid_price_variations,
    random_subsample,
    time_weighted_spread,
    wilcoxon_mw,
    write_test_results,
)


# -- densities


@pytest.mark.parametrize("binning", ["log", "linear", "unit"])
def test_pdf_integrates_to_one(binning):
    x = np.random.default_rng(0).exponential(3.0, 5000) + 0.01
    pdf = empirical_pdf(x, binning=binning, bins=40)
    assert abs(np.sum(pdf.density * pdf.widths) - 1.0) < 1e-9
    assert pdf.n == 5000


def test_equal_samples_single_bin():
    pdf = empirical_pdf([2.0] * 10, binning="linear")
    assert len(pdf.density) == 1
    assert pdf.density[0] == pytest.approx(1 / pdf.widths[0])


def test_empty_pdf_errors():
    with pytest.raises(ValueError):
        empirical_pdf([])


def test_log_pdf_matches_exponential():
    n = 10**6
    x = np.random.default_rng(1).exponential(1.0, n)
    pdf = empirical_pdf(x, binning=np.geomspace(1e-3, 10, 41))
    # the density is renormalised over the range, so compare masses with that in mind
    inside = np.exp(-1e-3) - np.exp(-10)
    p = (np.exp(-pdf.edges[:-1]) - np.exp(-pdf.edges[1:])) / inside
    expected = p / pdf.widths
    sigma = np.sqrt(p * (1 - p) / pdf.n) / pdf.widths
    assert np.all(np.abs(pdf.density - expected) <= 3 * sigma + 1e-12)


def test_log_centers_are_geometric():
    pdf = empirical_pdf([1.0, 10.0, 100.0], binning="log", bins=2)
    np.testing.assert_allclose(pdf.centers, [np.sqrt(10), np.sqrt(1000)])


def test_pdf_csv(tmp_path):
    pdf = empirical_pdf([1, 2, 2, 3], binning="unit")
    p = tmp_path / "pdf.csv"
    pdf.to_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0] == "x,density" and len(lines) == 4


def test_mass_below():
    pdf = empirical_pdf([1, 2, 2, 3], binning="unit")
    assert pdf.mass_below(2.5) == pytest.approx(0.75)


# -- spread distributions


def test_weighted_vs_event_time():
    weighted, event = time_weighted_spread([0.0, 9.0], [1, 5], end=10.0)
    assert weighted.as_dict() == pytest.approx({1.0: 0.9, 5.0: 0.1})
    assert event.as_dict() == pytest.approx({1.0: 0.5, 5.0: 0.5})


def test_constant_spread_point_mass():
    weighted, event = time_weighted_spread([0, 1, 3, 4], [2, 2, 2, 2], end=5)
    assert weighted.as_dict() == {2.0: 1.0} and event.as_dict() == {2.0: 1.0}


def test_short_series_errors():
    with pytest.raises(ValueError):
        time_weighted_spread([0.0], [1])


@given(st.lists(st.integers(1, 6), min_size=2, max_size=40), st.floats(0.01, 100))
def test_equal_holding_gives_event_time(spreads, dt):
    t = dt * np.arange(len(spreads))
    weighted, event = time_weighted_spread(t, spreads, end=t[-1] + dt)
    np.testing.assert_allclose(weighted.weights, event.weights, rtol=1e-9)


def test_weighted_moments():
    d = WeightedDistribution.from_samples([1, 3], [3, 1])
    assert d.mean() == pytest.approx(1.5)
    assert d.variance() == pytest.approx(0.75)
    assert d.mass_at_or_below(1) == pytest.approx(0.75)
    assert d.mass_above(1) == pytest.approx(0.25)
    assert d.quantile(0.5) == 1 and d.quantile(0.9) == 3


# -- terciles


def test_tercile_synthetic_tightening():
    rng = np.random.default_rng(4)
    # equal counts of 1..9 ticks put the boundaries strictly between 3|4 and 6|7
    spreads = rng.permutation(np.tile(np.arange(1, 10), 300))
    wait = np.where(spreads <= 3, 0.32, np.where(spreads >= 7, 0.2, 0.25))
    times = np.concatenate([[0.0], np.cumsum(wait)])
    res = conditional_waiting_time(times[:-1], spreads, event_times=times[1:])
    assert res.lower == pytest.approx(0.32) and res.upper == pytest.approx(0.2)


def test_tercile_constant_wait():
    spreads = np.tile([1, 2, 3, 4, 5, 6], 20)
    times = 0.7 * np.arange(len(spreads))
    res = conditional_waiting_time(times, spreads)
    assert res.lower == pytest.approx(0.7) and res.middle == pytest.approx(0.7)
    assert res.upper == pytest.approx(0.7)


def test_tercile_boundary_values_go_up():
    spreads = [1, 2, 2, 3, 3, 3, 4, 5, 6, 6]
    res = conditional_waiting_time(np.arange(10.0), spreads, event_times=np.arange(1.0, 11.0))
    # boundaries at 3 and 4; both boundary values move up a group
    assert res.boundaries == (3.0, 4.0)
    assert res.counts == (3, 3, 4)


def test_tercile_empty_group_is_nan():
    spreads = [1, 1, 1, 1, 2, 3]
    res = conditional_waiting_time(np.arange(6.0), spreads, event_times=np.arange(1.0, 7.0))
    # q1 equals the minimum, so nothing lies strictly below it
    assert res.counts == (0, 4, 2) and np.isnan(res.lower)


def test_tercile_needs_three_distinct_values():
    with pytest.raises(ValueError):
        conditional_waiting_time([0, 1, 2, 3], [1, 2, 1, 2])


# -- mid-price variations


def test_constant_mid():
    v = mid_price_variations(np.arange(0, 300, 7.0), np.full(43, 100.0))
    assert np.all(v == 0)


def test_stepping_mid():
    t = np.arange(0, 301, 30.0)
    v = mid_price_variations(t, 100 + np.arange(len(t)))
    assert len(v) == 10 and np.all(v == 1)


def test_previous_tick_sampling():
    v = mid_price_variations([0, 10, 40, 59], [0, 1, 2, 3], interval=30, end=60)
    np.testing.assert_array_equal(v, [1, 2])


def test_insufficient_span():
    with pytest.raises(ValueError):
        mid_price_variations([0, 10], [1, 2], interval=30)


# -- two-sample tests, against scipy as an independent oracle


def test_ks_matches_scipy():
    rng = np.random.default_rng(5)
    a, b = rng.normal(size=400), rng.normal(0.2, size=300)
    ours = ks_two_sample(a, b)
    ref = sps.ks_2samp(a, b, method="asymp")
    assert ours.statistic == pytest.approx(ref.statistic, abs=1e-15)
    en = np.sqrt(400 * 300 / 700)
    assert ours.p_value == pytest.approx(sps.kstwobign.sf(en * ref.statistic), rel=1e-9)


def test_cvm_matches_scipy():
    rng = np.random.default_rng(6)
    a, b = rng.normal(size=200), rng.normal(0.1, size=150)
    ours = cvm_two_sample(a, b)
    ref = sps.cramervonmises_2samp(a, b, method="asymptotic")
    assert ours.statistic == pytest.approx(ref.statistic, rel=1e-10)
    assert ours.p_value == pytest.approx(ref.pvalue, rel=1e-6, abs=1e-9)


@pytest.mark.parametrize("alternative", ["two-sided", "less", "greater"])
def test_mw_matches_scipy(alternative):
    rng = np.random.default_rng(7)
    a = rng.integers(0, 20, 300).astype(float)
    b = rng.integers(2, 22, 250).astype(float)
    ours = wilcoxon_mw(a, b, alternative)
    ref = sps.mannwhitneyu(a, b, alternative=alternative, method="asymptotic")
    assert ours.statistic == pytest.approx(ref.statistic)
    assert ours.p_value == pytest.approx(ref.pvalue, rel=1e-9)


def test_identical_samples():
    x = np.random.default_rng(8).random(100)
    assert ks_two_sample(x, x).statistic == 0
    assert wilcoxon_mw(x, x).statistic / (100 * 100) == pytest.approx(0.5)


def test_small_vectors_direction():
    r = wilcoxon_mw([1, 2, 3], [4, 5, 6], "less")
    assert r.statistic == 0 and r.direction == "a < b"


@given(st.lists(st.integers(0, 10), min_size=1, max_size=30),
       st.lists(st.integers(0, 10), min_size=1, max_size=30))
def test_mw_u_sum(a, b):
    ua = wilcoxon_mw(a, b).statistic
    ub = wilcoxon_mw(b, a).statistic
    assert ua + ub == pytest.approx(len(a) * len(b))


@settings(max_examples=50)
@given(st.lists(st.integers(-50, 50), min_size=1, max_size=40),
       st.lists(st.integers(-50, 50), min_size=1, max_size=40))
def test_ks_monotone_invariance(a, b):
    d = ks_two_sample(a, b).statistic
    # exact in floating point, so strict order is preserved
    f = lambda x: np.asarray(x, dtype=float) ** 3 + 5 * np.asarray(x, dtype=float) - 4
    assert ks_two_sample(f(a), f(b)).statistic == pytest.approx(d)


def test_power_check():
    rng = np.random.default_rng(9)
    a, b = rng.exponential(1.0, 10**4), rng.exponential(0.5, 10**4)
    assert all(r.p_value < 1e-3 for r in compare_samples(a, b))


def test_empty_sample_errors():
    with pytest.raises(ValueError):
        ks_two_sample([], [1.0])


def test_results_csv(tmp_path):
    p = tmp_path / "tests.csv"
    write_test_results(p, compare_samples([1, 2, 3], [4, 5, 6], "less"))
    lines = p.read_text().splitlines()
    assert lines[0] == "test,statistic,p_value,direction" and len(lines) == 4


def test_random_subsample():
    rng = np.random.default_rng(0)
    x = np.arange(100)
    sub = random_subsample(x, 10, rng)
    assert len(sub) == 10 and len(set(sub)) == 10 and (np.diff(sub) > 0).all()
    assert (random_subsample(x, 0, rng) == x).all()
    assert len(random_subsample(x, 500, rng)) == 100
