"""Distribution estimation and fitting."""

import io
import math

import numpy as np
import pytest

from kinexch import analysis
from kinexch.analysis import DistributionEstimate
from kinexch.errors import ContractError, FitError


def pareto_samples(nu, n, seed, xmin=1.0):
    u = np.random.default_rng(seed).random(n)
    return xmin * u ** (-1.0 / nu)


# --- histograms and CCDF -------------------------------------------------------

def test_histogram_density_integrates_to_one():
    x = np.random.default_rng(0).exponential(1.0, 50_000)
    for binning in ("logarithmic", "linear"):
        est = analysis.histogram_estimate(x, binning)
        assert est.integrate() == pytest.approx(1.0, abs=1e-6)


def test_histogram_underflow_counted():
    est = analysis.histogram_estimate(
        np.array([0.0, 1.0, 2.0, 3.0]), "logarithmic",
        edges=np.array([0.5, 1.5, 2.5, 3.5]),
    )
    assert est.underflow == 1
    assert est.counts.sum() == 3


def test_histogram_rejects_bad_input():
    with pytest.raises(ContractError):
        analysis.histogram_estimate(np.array([]))
    with pytest.raises(ContractError):
        analysis.histogram_estimate(np.array([-1.0, 2.0]))
    with pytest.raises(ContractError):
        analysis.histogram_estimate(np.array([1.0]), edges=np.array([2.0, 1.0]))


def test_ccdf_simple_values():
    est = analysis.ccdf(np.array([1.0, 2.0, 3.0]))
    assert est.kind == "ccdf"
    np.testing.assert_allclose(est.edges, [1.0, 2.0, 3.0])
    np.testing.assert_allclose(est.density, [1.0, 2 / 3, 1 / 3])
    # monotone non-increasing on repeated data too
    est = analysis.ccdf(np.array([1.0, 1.0, 2.0, 5.0]))
    assert np.all(np.diff(est.density) <= 0)
    assert est.density[0] == 1.0


def test_ccdf_of_histogram_matches_bin_masses():
    x = np.array([0.5, 1.5, 1.5, 2.5])
    est = analysis.histogram_estimate(x, "linear", edges=np.array([0.0, 1.0, 2.0, 3.0]))
    q = analysis.ccdf(est)
    np.testing.assert_allclose(q.density, [1.0, 0.75, 0.25])


def test_csv_round_trip():
    x = np.random.default_rng(3).exponential(1.0, 20_000)
    est = analysis.histogram_estimate(x, "logarithmic")
    back = DistributionEstimate.from_csv(est.to_csv())
    np.testing.assert_allclose(back.edges, est.edges)
    np.testing.assert_array_equal(back.counts, est.counts)
    np.testing.assert_allclose(back.density, est.density)
    assert back.support == est.support
    with pytest.raises(ContractError):
        DistributionEstimate.from_csv("a,b\n1,2\n")


def test_ks_statistic_and_critical_value():
    x = np.random.default_rng(4).random(100_000)
    ks = analysis.ks_statistic(x, lambda v: v)
    assert ks < analysis.ks_critical_value(x.size)
    assert analysis.ks_critical_value(10_000) == pytest.approx(
        math.sqrt(-0.5 * math.log(0.005)) / 100.0
    )
    # shifted CDF must be flagged by a large distance
    assert analysis.ks_statistic(x, lambda v: np.clip(v - 0.2, 0, 1)) > 0.15


# --- Pareto tail ----------------------------------------------------------------

def test_pareto_fit_recovers_unit_exponent():
    x = pareto_samples(1.0, 1_000_000, seed=10)
    fit = analysis.fit_pareto_tail(x)
    assert fit.healthy
    assert fit.estimate == pytest.approx(1.0, abs=0.05)
    # both estimators are reported over the same window
    assert fit.params["nu_ls"] == pytest.approx(1.0, abs=0.08)
    assert fit.window[0] < fit.window[1]


def test_pareto_fit_recovers_steeper_exponent():
    x = pareto_samples(2.0, 1_000_000, seed=11)
    fit = analysis.fit_pareto_tail(x, window_policy="top_decade")
    assert fit.healthy
    assert fit.estimate == pytest.approx(2.0, abs=0.1)


def test_pareto_fit_binned_agrees_with_samples():
    x = pareto_samples(1.0, 1_000_000, seed=12)
    est = analysis.histogram_estimate(x, "logarithmic")
    fit = analysis.fit_pareto_tail(est)
    assert fit.healthy
    assert fit.estimate == pytest.approx(1.0, abs=0.07)


def test_pareto_fit_flags_exponential_data_unhealthy():
    x = np.random.default_rng(13).exponential(1.0, 1_000_000)
    fit = analysis.fit_pareto_tail(x)
    assert not fit.healthy


def test_pareto_fit_scale_equivariance():
    x = pareto_samples(1.5, 300_000, seed=14)
    a = analysis.fit_pareto_tail(x)
    b = analysis.fit_pareto_tail(100.0 * x)
    assert b.estimate == pytest.approx(a.estimate, rel=1e-9)
    assert b.window[0] == pytest.approx(100.0 * a.window[0], rel=1e-9)


def test_pareto_fit_explicit_window():
    x = pareto_samples(1.0, 500_000, seed=15)
    fit = analysis.fit_pareto_tail(x, window_policy=("window", 2.0, 50.0))
    assert fit.window == (2.0, 50.0)
    assert fit.estimate == pytest.approx(1.0, abs=0.05)


def test_pareto_fit_needs_a_decade_of_support():
    x = np.random.default_rng(16).uniform(1.0, 3.0, 10_000)
    with pytest.raises(FitError):
        analysis.fit_pareto_tail(x, window_policy=("window", 1.0, 2.0))
    with pytest.raises(FitError):
        analysis.fit_pareto_tail(np.ones(50))  # too few samples


def test_hill_estimate_truncated_window():
    x = pareto_samples(1.0, 1_000_000, seed=17)
    nu, se, k = analysis.hill_estimate(x, 2.0, 200.0)
    assert nu == pytest.approx(1.0, abs=0.03)
    assert k > 100_000
    assert 0 < se < 0.01
    with pytest.raises(FitError):
        analysis.hill_estimate(x, x.max() * 2)


# --- Gamma and exponential fits ----------------------------------------------------

def test_gamma_fit_mle_on_synthetic_data():
    # alpha = 3, T = 0.25 -> Gamma(shape 4, scale 0.25), unit mean
    x = np.random.default_rng(20).gamma(4.0, 0.25, 400_000)
    fit = analysis.fit_gamma(x)
    assert fit.method == "gamma_mle"
    assert fit.estimate == pytest.approx(3.0, abs=0.05)
    assert fit.params["T"] == pytest.approx(0.25, abs=0.01)
    assert fit.params["implied_lambda"] == pytest.approx(0.5, abs=0.01)


def test_gamma_fit_fixed_mean_on_synthetic_data():
    x = np.random.default_rng(21).gamma(4.0, 0.25, 400_000)
    fit = analysis.fit_gamma(x, fix_mean=1.0)
    assert fit.method == "gamma_fixed_mean"
    assert fit.healthy
    assert fit.estimate == pytest.approx(3.0, abs=0.1)
    assert fit.params["T"] == pytest.approx(1.0 / (fit.estimate + 1.0), rel=1e-12)


def test_gamma_fit_binned_path():
    x = np.random.default_rng(22).gamma(4.0, 0.25, 400_000)
    est = analysis.histogram_estimate(x, "linear", bins=400)
    fit = analysis.fit_gamma(est)
    assert fit.method == "gamma_wls"
    assert fit.estimate == pytest.approx(3.0, abs=0.2)


def test_exponential_fit_raw_and_binned():
    x = np.random.default_rng(23).exponential(0.5, 400_000)
    fit = analysis.fit_exponential(x)
    assert fit.healthy
    assert fit.estimate == pytest.approx(0.5, abs=0.01)
    est = analysis.histogram_estimate(x, "linear", bins=300)
    fitb = analysis.fit_exponential(est)
    assert fitb.healthy
    assert fitb.estimate == pytest.approx(0.5, abs=0.02)
    # Gamma-shaped data must fail the raw-sample KS health check
    y = np.random.default_rng(24).gamma(4.0, 0.25, 200_000)
    assert not analysis.fit_exponential(y).healthy


def test_fit_result_json():
    x = np.random.default_rng(25).exponential(1.0, 10_000)
    out = analysis.fit_exponential(x).to_json()
    assert set(out) >= {"method", "estimate", "stderr", "window", "goodness", "healthy"}


# --- moments and conditional statistics ----------------------------------------------

def test_moments_exact_small_sample():
    out = analysis.moments([1.0, 2.0, 3.0], orders=(1, 2))
    assert out[1][0] == pytest.approx(2.0)
    assert out[2][0] == pytest.approx(14.0 / 3.0)


def test_moments_of_exponential_match_factorials():
    # <m**k> = k! T**k; at T = 0.5: 0.5, 0.5, 0.75, 1.5
    x = np.random.default_rng(26).exponential(0.5, 2_000_000)
    out = analysis.moments(x)
    for k, want in [(1, 0.5), (2, 0.5), (3, 0.75), (4, 1.5)]:
        got, se = out[k]
        assert abs(got - want) < max(4 * se, 0.02 * want)
    with pytest.raises(ContractError):
        analysis.moments(x, orders=(5,))


def test_conditional_money_by_lambda_recovers_the_mean_field_product():
    rng = np.random.default_rng(27)
    lam = rng.random(200_000)
    m = 0.5 / (1.0 - lam) * rng.gamma(20.0, 1.0 / 20.0, lam.size)
    # stop below lambda = 0.9: the in-bin mean of 1/(1 - lambda) diverges
    # as the bin touches 1, so the product is only flat away from the edge
    out = analysis.conditional_money_by_lambda(lam, m, np.linspace(0, 0.9, 10))
    assert out["lambda_mean"].size == 9
    np.testing.assert_allclose(out["product"], 0.5, rtol=0.05)
    with pytest.raises(ContractError):
        analysis.conditional_money_by_lambda(lam[:10], m, np.linspace(0, 1, 5))


def test_pairwise_difference_two_level_population():
    # half the agents hold 0, half hold 2: |difference| is 0 or 2 with equal mass
    row = np.array([0.0, 2.0] * 500)
    snaps = np.tile(row, (200, 1))
    d, est = analysis.pairwise_difference_distribution(snaps, rng=np.random.default_rng(28))
    assert set(np.unique(d)) <= {0.0, 2.0}
    assert np.mean(d == 2.0) == pytest.approx(0.5, abs=0.02)
    assert est is not None and est.integrate() == pytest.approx(1.0, abs=1e-6)
