import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats as sps

from tabudyn.stats import (exp_cdf, kolmogorov_q, ks_one_sample, ks_two_sample,
                           ks_vs_exponential, left_tail_deficit, linear_regression,
                           loglog_regression, rint, summarize_costs)

samples = st.lists(st.integers(0, 50), min_size=1, max_size=40)


def test_rint():
    assert (rint(2.5), rint(2.49), rint(0.0), rint(-0.5), rint(3.5)) == (3, 2, 0, 0, 4)


def test_ks_two_sample_examples():
    assert ks_two_sample([1, 2, 3], [1, 2, 3]).d_stat == 0
    assert ks_two_sample([1, 2, 3, 4], [5, 6, 7, 8]).d_stat == 1
    assert ks_two_sample([1, 2], [1, 3]).d_stat == 0.5


@pytest.mark.filterwarnings("ignore::RuntimeWarning")  # scipy's own p-value on tiny samples
@given(samples, samples)
def test_ks_two_sample_matches_scipy(a, b):
    got = ks_two_sample(a, b)
    ref = sps.ks_2samp(a, b, method="asymp").statistic
    assert got.d_stat == pytest.approx(ref, abs=1e-12)
    assert got == ks_two_sample(b, a)
    assert 0 <= got.p_value <= 1


@given(samples, st.integers(1, 100), st.floats(0.1, 10))
def test_ks_two_sample_scale_and_shift_invariant(a, shift, scale):
    b = [x * 3 % 17 for x in a]
    d = ks_two_sample(a, b).d_stat
    assert ks_two_sample([x * scale + shift for x in a],
                         [x * scale + shift for x in b]).d_stat == pytest.approx(d)


def test_ks_one_sample_single_median_draw():
    mean = 7.0
    r = ks_vs_exponential([mean * math.log(2)], mean)
    assert r.d_stat == pytest.approx(0.5, abs=1e-12)


@given(st.lists(st.floats(0.01, 100), min_size=1, max_size=50), st.floats(0.5, 50))
def test_ks_one_sample_matches_scipy(x, mean):
    got = ks_vs_exponential(x, mean).d_stat
    ref = sps.kstest(x, "expon", args=(0, mean)).statistic
    assert got == pytest.approx(ref, abs=1e-12)


def test_quantile_samples_shrink():
    ds = []
    for n in (10, 100, 1000):
        q = -5 * np.log(1 - np.arange(1, n + 1) / (n + 1))
        ds.append(ks_vs_exponential(q, 5).d_stat)
    assert ds[0] > ds[1] > ds[2] and ds[2] < 0.01


def test_synthetic_converges_to_analytic():
    x = np.random.default_rng(1).exponential(4, 300) ** 1.2
    a = ks_vs_exponential(x, x.mean()).d_stat
    s = ks_vs_exponential(x, x.mean(), "synthetic", 400_000, rng=2).d_stat
    assert s == pytest.approx(a, abs=0.01)
    with pytest.raises(ValueError):
        ks_vs_exponential(x, 1, "bootstrap")
    with pytest.raises(ValueError):
        ks_vs_exponential(x, 0)


def test_p_values_agree_with_scipy_asymptotics():
    rng = np.random.default_rng(3)
    x = rng.exponential(10, 400)
    y = rng.gamma(2.0, 5, 400)
    ours = ks_vs_exponential(y, y.mean()).p_value
    assert ours < 0.01
    assert ks_vs_exponential(x, 10).p_value > 0.01
    # Stephens-corrected asymptotic p vs scipy's exact one-sample p
    ref = sps.kstest(x, "expon", args=(0, 10)).pvalue
    assert ks_vs_exponential(x, 10).p_value == pytest.approx(ref, abs=0.03)


def test_kolmogorov_q():
    assert kolmogorov_q(0) == 1
    assert kolmogorov_q(1.358) == pytest.approx(0.05, abs=5e-4)
    assert kolmogorov_q(1.628) == pytest.approx(0.01, abs=5e-4)
    for lam in (0.3, 0.7, 1.0, 2.0):
        assert kolmogorov_q(lam) == pytest.approx(sps.kstwobign.sf(lam), abs=1e-12)


def test_left_tail_deficit():
    rng = np.random.default_rng(0)
    shifted = 20 + rng.exponential(80, 2000)   # no short runs at all
    assert left_tail_deficit(shifted, shifted.mean())
    heavy = rng.exponential(100, 2000) * rng.choice([0.2, 1.8], 2000)
    assert not left_tail_deficit(heavy, heavy.mean())


def test_regression_examples():
    r = loglog_regression([1, 10, 100], [1, 10, 100])
    assert r.slope == pytest.approx(1, abs=1e-10) and abs(r.intercept) < 1e-10
    assert r.r_squared == pytest.approx(1, abs=1e-10)
    xs = np.array([1.0, 2, 5, 30])
    r = loglog_regression(xs, 100 * xs ** 2)
    assert (r.slope, r.intercept, r.r_squared) == pytest.approx((2, 2, 1), abs=1e-10)
    # (1,1), (2,3), (3,2): slope 1/2, intercept 1, r^2 = 1/4
    r = linear_regression([1, 2, 3], [1, 3, 2])
    assert r.slope == pytest.approx(0.5, abs=1e-10)
    assert r.intercept == pytest.approx(1.0, abs=1e-10)
    assert r.r_squared == pytest.approx(0.25, abs=1e-10)
    r = loglog_regression([10, 100, 1000], [10, 1000, 100])
    assert (r.slope, r.intercept, r.r_squared) == pytest.approx((0.5, 1, 0.25), abs=1e-10)


@given(st.lists(st.floats(-100, 100), min_size=3, max_size=30), st.integers(0, 2**31))
def test_regression_matches_scipy(x, seed):
    if np.ptp(x) < 1e-6:
        return
    y = np.asarray(x) * 0.7 + np.random.default_rng(seed).normal(0, 5, len(x))
    got = linear_regression(x, y)
    ref = sps.linregress(x, y)
    assert got.slope == pytest.approx(ref.slope, rel=1e-8, abs=1e-8)
    assert got.r_squared == pytest.approx(ref.rvalue ** 2, rel=1e-8, abs=1e-10)


def test_regression_errors():
    with pytest.raises(ValueError):
        loglog_regression([1, 2], [0, 3])
    with pytest.raises(ValueError):
        loglog_regression([1], [1])
    with pytest.raises(ValueError):
        linear_regression([2, 2, 2], [1, 2, 3])


def test_summarize_costs():
    assert summarize_costs([5]) == (5, 5)
    assert summarize_costs([1, 3]) == (2, 2)
    med, mean = summarize_costs([1, 2, 10])
    assert med == 2 and mean == pytest.approx(13 / 3)
    with pytest.raises(ValueError):
        summarize_costs([])


def test_exp_cdf():
    assert exp_cdf(2)(0) == 0
    assert exp_cdf(2)(2 * math.log(2)) == pytest.approx(0.5)
