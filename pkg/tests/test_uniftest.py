"""Neyman-Pearson tests of uniformity, power functions and Monte Carlo."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import special as sc
from scipy import stats
from scipy.integrate import quad

from _cases import TABLE1
from pdqkit.catalog import make_family, parse_family_spec
from pdqkit.divergence import uniformity_profile
from pdqkit.errors import DomainError, ParameterError, TestUndefinedError
from pdqkit.pdq import pdq_from_callable, star_transform, uniform_pdq
from pdqkit.uniftest import (
    alt_moments,
    alt_moments_beta,
    asymptotic_power,
    exact_normal_power,
    log_likelihood_stat,
    mc_estimate,
    normal_alternative_power,
    np_test,
    null_statistics,
    power_beta_closed_form,
    sample_pdq,
    z_alpha,
)

Z05 = float(sc.ndtri(0.05))


@pytest.fixture(scope="module")
def table_moments():
    return {spec: alt_moments(parse_family_spec(spec)) for spec in TABLE1}


# ---------------------------------------------------------------- moments

def test_z_alpha_convention():
    assert z_alpha(0.05) == pytest.approx(-1.6448536269514722, abs=1e-15)
    for bad in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(DomainError):
            z_alpha(bad)


@pytest.mark.parametrize("spec", list(TABLE1))
def test_table1_sigma_columns(spec, table_moments):
    am = table_moments[spec]
    _, _, s0, s1, j, jr, sr = TABLE1[spec]
    got = (am.sigma0, am.sigma1, am.j, am.standardized_j, am.sigma_ratio)
    assert np.all(np.abs(np.array(got) - (s0, s1, j, jr, sr)) <= 5e-4)


@pytest.mark.parametrize("spec", list(TABLE1))
def test_moments_match_divergences(spec, table_moments):
    am = table_moments[spec]
    prof = uniformity_profile(parse_family_spec(spec))
    assert -am.mu0 == pytest.approx(prof.i_u_f, abs=1e-8)
    assert am.mu1 == pytest.approx(prof.i_f_u, abs=1e-8)
    assert am.j == pytest.approx(prof.j, abs=1e-8)


def test_uniform_alternative_is_null():
    am = alt_moments(make_family("power", b=1.0))
    assert am.is_null and am.j == 0.0
    am = alt_moments(uniform_pdq())
    assert am.j == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("b", [0.6, 0.8, 2.0, 5.0])
def test_beta_closed_form_moments_match_quadrature(b):
    closed = alt_moments_beta(b)
    # a callable pdQ bypasses the closed-form shortcut
    g = star_transform(make_family("power", b=b))
    quad = alt_moments(pdq_from_callable(g.density, log_density=g.log_density,
                                         endpoint_exponents=g.endpoint_exponents))
    for a, c in zip((closed.mu0, closed.sigma0, closed.mu1, closed.sigma1),
                    (quad.mu0, quad.sigma0, quad.mu1, quad.sigma1)):
        assert a == pytest.approx(c, abs=1e-9)


def test_beta_closed_form_domain():
    with pytest.raises(ParameterError):
        alt_moments_beta(0.5)
    with pytest.raises(ParameterError):
        power_beta_closed_form(0.4, 10)


def test_divergent_moment_is_undefined():
    g = pdq_from_callable(lambda u: np.exp(1.0 - 1.0 / u), log_density=lambda u: 1.0 - 1.0 / u)
    with pytest.raises(TestUndefinedError, match="undefined"):
        alt_moments(g)


# ---------------------------------------------------------------- statistic and tests

def test_log_likelihood_examples():
    assert log_likelihood_stat([0.5], make_family("normal")) == pytest.approx(math.log(math.sqrt(2)))
    assert log_likelihood_stat([0.1, 0.42, 0.9], uniform_pdq()) == 0.0
    got = log_likelihood_stat([0.25, 0.75], make_family("exponential"))
    assert got == pytest.approx(math.log(1.5) + math.log(0.5), abs=1e-12)


def test_log_likelihood_normal_form():
    x = np.array([0.03, 0.2, 0.5, 0.77, 0.999])
    ref = x.size * math.log(math.sqrt(2.0)) - 0.5 * np.sum(sc.ndtri(x) ** 2)
    assert log_likelihood_stat(x, make_family("normal")) == pytest.approx(ref, abs=1e-10)


def test_log_likelihood_underflow_is_minus_inf():
    # ln f1 = 1 - 1/u is below the smallest double near 0
    g = pdq_from_callable(lambda u: np.exp(1.0 - 1.0 / u), log_density=lambda u: 1.0 - 1.0 / u)
    mass = quad(lambda u: math.exp(1.0 - 1.0 / u), 0.0, 1.0, epsabs=1e-14)[0]
    want = (1.0 - 1e3) + (1.0 - 2.0) - 2.0 * math.log(mass)
    assert log_likelihood_stat([1e-3, 0.5], g) == pytest.approx(want, abs=1e-8)
    zero = pdq_from_callable(lambda u: np.where(u < 0.5, 0.0, 2.0),
                             log_density=lambda u: np.where(u < 0.5, -np.inf, math.log(2.0)),
                             kinks=(0.5,))
    assert log_likelihood_stat([0.25, 0.75], zero) == -math.inf


@pytest.mark.parametrize("bad", [[0.0], [1.0], [0.5, 1.2], []])
def test_sample_outside_unit_interval(bad):
    with pytest.raises(DomainError):
        log_likelihood_stat(bad, make_family("normal"))


def test_exact_normal_single_point():
    rep = np_test([0.5], make_family("normal"), 0.05, mode="exact_normal")
    assert rep.statistic == 0.0
    assert rep.critical_value == pytest.approx(0.003932140000019522, rel=1e-9)
    assert rep.decision == "reject" and rep.direction == "<="


def test_exact_normal_needs_normal():
    with pytest.raises(TestUndefinedError):
        np_test([0.5], make_family("cauchy"), mode="exact_normal")


def test_asymptotic_uniform_is_undefined():
    with pytest.raises(TestUndefinedError, match="undefined"):
        np_test([0.2, 0.7], uniform_pdq(), mode="asymptotic")


def test_asymptotic_test_critical_value():
    x = np.linspace(0.05, 0.95, 20)
    alt = make_family("cauchy")
    am = alt_moments(alt)
    rep = np_test(x, alt, 0.05, mode="asymptotic")
    assert rep.critical_value == pytest.approx(20 * am.mu0 - math.sqrt(20) * am.sigma0 * Z05)
    assert rep.decision == ("reject" if rep.statistic >= rep.critical_value else "retain")
    assert rep.mode == "asymptotic"


def test_monte_carlo_test():
    x = np.full(10, 0.5)
    with pytest.raises(ParameterError):
        np_test(x, make_family("normal"), mode="monte_carlo")
    rep = np_test(x, make_family("normal"), mode="monte_carlo", reps=2000, seed=3)
    assert rep.mode == "monte_carlo_calibrated"
    # all points at the mode maximise l_x
    assert rep.decision == "reject"
    assert rep == np_test(x, make_family("normal"), mode="monte_carlo", reps=2000, seed=3)


def test_bad_mode_and_alpha():
    with pytest.raises(ParameterError):
        np_test([0.5], make_family("normal"), mode="bootstrap")
    with pytest.raises(DomainError):
        np_test([0.5], make_family("normal"), alpha=1.0)


def test_report_fields():
    d = np_test([0.5], make_family("normal"), mode="exact_normal").to_dict()
    assert {"statistic", "critical_value", "decision", "alpha", "m", "mode"} <= set(d)


# ---------------------------------------------------------------- power

def test_normal_power_m25():
    am = alt_moments(make_family("normal"))
    p = asymptotic_power(am, 25, 0.05).power
    assert p == pytest.approx(float(sc.ndtr(math.sqrt(12.5) + 2.0 * Z05)), abs=1e-9)
    assert p == pytest.approx(0.597, abs=5e-4)
    assert normal_alternative_power(25).power == pytest.approx(p, abs=1e-9)


def test_null_power_is_alpha():
    for alpha in (0.01, 0.05, 0.1):
        assert asymptotic_power(alt_moments(make_family("power", b=1.0)), 25, alpha).power == alpha
        assert power_beta_closed_form(1.0, 25, alpha).power == alpha


def test_pareto_power_m9(table_moments):
    p = asymptotic_power(table_moments["pareto:a=1"], 9, 0.05).power
    assert p == pytest.approx(float(sc.ndtr(6.0 + 3.0 * Z05)), abs=1e-6)
    assert p == pytest.approx(0.857, abs=5e-4)


def test_beta_closed_form_value():
    assert power_beta_closed_form(2.0, 25).power == pytest.approx(float(sc.ndtr(2.5 + 1.5 * Z05)))
    assert power_beta_closed_form(2.0, 25).power == pytest.approx(0.513, abs=5e-4)


@pytest.mark.parametrize("b", [0.6, 0.8, 2.0, 5.0])
@pytest.mark.parametrize("m", [25, 100])
def test_beta_closed_form_matches_quadrature_power(b, m):
    g = star_transform(make_family("power", b=b))
    quad = alt_moments(pdq_from_callable(g.density, log_density=g.log_density,
                                         endpoint_exponents=g.endpoint_exponents))
    assert abs(power_beta_closed_form(b, m).power - asymptotic_power(quad, m).power) < 1e-9


def test_power_monotone_in_m(table_moments):
    for am in table_moments.values():
        p = [asymptotic_power(am, m).power for m in range(1, 201)]
        assert all(b >= a for a, b in zip(p, p[1:]))


def test_power_follows_standardized_j(table_moments):
    ams = sorted(table_moments.values(), key=lambda a: a.standardized_j)
    first = [math.sqrt(25) * a.standardized_j for a in ams]
    assert first == sorted(first)


def test_exact_normal_power_closed_form():
    assert exact_normal_power(100).power == pytest.approx(0.99970, abs=1e-5)
    assert abs(exact_normal_power(100).power - normal_alternative_power(100).power) < 0.02


# ---------------------------------------------------------------- sampling

def test_sample_uniform_is_raw_stream():
    v = np.random.default_rng(11).random(50)
    assert np.array_equal(sample_pdq(uniform_pdq(), 50, 11), v)


def test_sample_exponential_inverse_cdf():
    v = np.random.default_rng(5).random(1000)
    x = sample_pdq(make_family("exponential"), 1000, 5)
    assert np.allclose(x, 1.0 - np.sqrt(1.0 - v), atol=1e-10)
    assert np.all((x > 0) & (x < 1))


def test_sample_determinism():
    a = sample_pdq(make_family("cauchy"), 100, 9)
    assert np.array_equal(a, sample_pdq(make_family("cauchy"), 100, 9))
    assert not np.array_equal(a, sample_pdq(make_family("cauchy"), 100, 10))
    with pytest.raises(ValueError):
        sample_pdq(make_family("cauchy"), 0, 1)


def test_cauchy_sample_ks():
    x = sample_pdq(make_family("cauchy"), 100_000, 2024)
    res = stats.kstest(x, lambda t: t - np.sin(2 * np.pi * t) / (2 * np.pi))
    assert res.statistic < stats.kstwo.ppf(0.99, x.size)


# ---------------------------------------------------------------- Monte Carlo

def test_mc_critical_value_is_calibrated():
    reps = 100_000
    alt = make_family("exponential")
    crit = mc_estimate(alt, 10, reps=reps, seed=1, target="critical_value", calibration_reps=reps)
    fresh = null_statistics(alt, 10, reps, seed=1, stream=1)
    rate = np.mean(fresh >= crit)
    assert abs(rate - 0.05) <= 3 * math.sqrt(0.05 * 0.95 / reps)


@pytest.mark.parametrize("name", ["normal", "exponential", "cauchy"])
def test_mc_size(name):
    r = mc_estimate(make_family(name), 50, reps=10_000, seed=0, target="size")
    assert abs(r.power - 0.05) <= 3 * math.sqrt(0.05 * 0.95 / 10_000)
    assert r.std_error == pytest.approx(math.sqrt(r.power * (1 - r.power) / 10_000))


def test_mc_power_normal_m100():
    ref = normal_alternative_power(100).power
    r = mc_estimate(make_family("normal"), 100, reps=10_000, seed=0, target="power")
    se = max(r.std_error, math.sqrt(ref * (1 - ref) / 10_000))
    assert abs(r.power - ref) <= 3 * se


def test_mc_exact_test_power_normal_m100():
    r = mc_estimate(make_family("normal"), 100, reps=10_000, seed=0, target="power",
                    test="exact_normal")
    assert abs(r.power - normal_alternative_power(100).power) < 0.02
    assert abs(r.power - exact_normal_power(100).power) <= 3 * max(r.std_error, 1e-4)


def test_mc_beta21_power_finite_sample():
    # the pdQ of Beta(2,1) is Beta(3/2,1): -sum ln X is Gamma(m, 2/3) there and Gamma(m, 1) under H0
    exact = float(stats.gamma.cdf(stats.gamma.ppf(0.05, 25), 25, scale=2.0 / 3.0))
    assert exact == pytest.approx(0.6095, abs=5e-4)
    r = mc_estimate(make_family("beta", a=2.0, b=1.0), 25, reps=10_000, seed=7, target="power")
    assert abs(r.power - exact) <= 3 * r.std_error


def test_mc_determinism_and_validation():
    a = mc_estimate(make_family("logistic"), 20, reps=1000, seed=4, target="power")
    assert a == mc_estimate(make_family("logistic"), 20, reps=1000, seed=4, target="power")
    with pytest.raises(ValueError):
        mc_estimate(make_family("logistic"), 20, reps=999)
    with pytest.raises(ParameterError):
        mc_estimate(make_family("logistic"), 20, reps=1000, target="bias")
