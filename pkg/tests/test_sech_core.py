import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sechlab.sech_core import (
    ControlDistribution,
    InvalidParameterError,
    SechDistribution,
    control_cdf,
    control_cf,
    control_sample,
    sech_cdf,
    sech_cf,
    sech_charfn,
    sech_pdf,
    sech_quantile,
    sech_sample,
)
from sechlab.stats_tests import ecf, ks_one_sample
from sechlab.streams import trial_rng

# Frozen with mpmath at 40 digits: 1/(pi cosh 1), a quadrature of the
# density over (-inf, 1], a bisection root of cdf(x) = 3/4, sech(pi/2),
# sech(pi) and exp(-2).
PDF_AT_1 = 0.20628208209087049
CDF_AT_1 = 0.77558298567141500
Q_AT_075 = 0.88137358701954303
CF_AT_1 = 0.39853681533838668
CF_AT_2 = 0.086266738334054415
NORMAL_CF_AT_2 = 0.13533528323661269

finite = st.floats(-50, 50, allow_nan=False)
scales = st.floats(0.05, 20)


def test_pdf_values():
    assert sech_pdf(0.0) == pytest.approx(1 / math.pi, rel=1e-15)
    assert sech_pdf(1.0) == pytest.approx(PDF_AT_1, rel=1e-14)


def test_pdf_integrates_to_one():
    from scipy.integrate import quad

    total, err = quad(lambda x: sech_pdf(x, 1.7), -np.inf, np.inf)
    assert total == pytest.approx(1.0, abs=1e-10)


def test_cdf_values():
    assert sech_cdf(0.0) == 0.5
    assert sech_cdf(1.0) == pytest.approx(CDF_AT_1, abs=1e-14)
    assert sech_cdf(-1.0) == pytest.approx(1 - CDF_AT_1, abs=1e-14)


def test_quantile_values():
    assert sech_quantile(0.5) == 0.0
    assert sech_quantile(0.75) == pytest.approx(Q_AT_075, rel=1e-13)
    u = np.array([0.01, 0.3, 0.9])
    np.testing.assert_allclose(sech_quantile(u, 2.0), 2.0 * sech_quantile(u, 1.0), rtol=1e-15)


def test_cf_values():
    assert sech_cf(0.0) == 1.0
    assert sech_cf(1.0) == pytest.approx(CF_AT_1, rel=1e-14)
    assert sech_cf(2.0) == pytest.approx(CF_AT_2, rel=1e-14)


def test_cf_and_pdf_underflow_to_zero():
    assert sech_cf(1e4) == 0.0
    assert sech_pdf(-1e4) == 0.0
    assert np.all(np.isfinite(sech_cdf(np.array([-1e4, 1e4]))))


@pytest.mark.parametrize("bad", [0.0, -1.0, np.nan])
def test_bad_scale(bad):
    with pytest.raises(InvalidParameterError):
        sech_pdf(0.0, bad)
    with pytest.raises(InvalidParameterError):
        sech_cf(0.0, bad)
    with pytest.raises(InvalidParameterError):
        SechDistribution(bad)


@pytest.mark.parametrize("u", [0.0, 1.0, -0.1, 1.5])
def test_quantile_domain(u):
    with pytest.raises(InvalidParameterError):
        sech_quantile(u)


def test_quantile_round_trip_grid():
    u = np.arange(1, 100) / 100
    assert np.max(np.abs(sech_cdf(sech_quantile(u)) - u)) <= 1e-12


@given(finite, scales)
def test_pdf_even(x, a):
    assert sech_pdf(x, a) == sech_pdf(-x, a)


@given(finite, scales)
def test_cdf_reflection(x, a):
    assert sech_cdf(x, a) + sech_cdf(-x, a) == pytest.approx(1.0, abs=4e-16)


@given(st.floats(1e-6, 1 - 1e-6))
def test_quantile_odd_about_half(u):
    assert sech_quantile(u) == pytest.approx(-sech_quantile(1 - u), abs=1e-9)


@given(finite, scales)
def test_cf_bounded_positive_even(t, a):
    v = sech_cf(t, a)
    assert 0 <= v <= 1
    assert v == sech_cf(-t, a)
    if abs(math.pi * a * t / 2) < 700:
        assert v > 0


@given(st.floats(-20, 20))
def test_pdf_cf_same_shape(x):
    # (1/pi) sech(x) and sech(pi t / 2) coincide at t = 2x/pi up to 1/pi
    assert sech_cf(2 * x / math.pi) == pytest.approx(math.pi * sech_pdf(x), rel=1e-13, abs=1e-300)


def test_sample_reproducible():
    a = sech_sample(trial_rng(5, 0), 5).values
    b = sech_sample(trial_rng(5, 0), 5).values
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sech_sample(trial_rng(5, 1), 5).values)


def test_sample_variance():
    x = sech_sample(trial_rng(1, 0), 10**6).values
    assert np.var(x) == pytest.approx(math.pi**2 / 4, rel=0.03)


def test_sample_ks_calibration():
    passes = sum(
        ks_one_sample(sech_sample(trial_rng(2, i), 10**6), sech_cdf).p_value > 0.01 for i in range(20)
    )
    assert passes >= 19


def test_sample_ecf_matches_cf():
    n = 10**5
    x = sech_sample(trial_rng(3, 0), n)
    t = np.arange(1, 17) * 0.25
    assert np.max(np.abs(ecf(x, t) - sech_cf(t))) <= 3 / math.sqrt(n)


def test_distribution_object():
    d = SechDistribution(2.0)
    assert d.variance == pytest.approx(math.pi**2)
    assert d.cf(1.0) == sech_cf(2.0)
    assert d.quantile(0.75) == pytest.approx(2 * Q_AT_075)


# --- controls -------------------------------------------------------------


def test_control_cf_values():
    assert control_cf("normal", 0.0) == 1.0
    assert control_cf("normal", 2.0) == pytest.approx(NORMAL_CF_AT_2, rel=1e-14)
    assert abs(control_cf("uniform", math.pi)) < 1e-15
    assert control_cf("uniform", 0.0) == 1.0
    assert control_cf("laplace", 2.0) == pytest.approx(0.2)


def test_unknown_control():
    with pytest.raises(InvalidParameterError):
        control_cf("cauchy", 1.0)
    with pytest.raises(InvalidParameterError):
        ControlDistribution("cauchy")


@pytest.mark.parametrize("kind,var", [("normal", 1.0), ("laplace", 2.0), ("uniform", 1 / 3)])
def test_control_variance(kind, var):
    x = control_sample(trial_rng(4, 0), kind, 10**6).values
    assert np.var(x) == pytest.approx(var, rel=0.03)
    assert ControlDistribution(kind).variance == pytest.approx(var)


@pytest.mark.parametrize("kind", ["normal", "laplace", "uniform"])
def test_control_reproducible_and_symmetric_cdf(kind):
    a = control_sample(trial_rng(9, 0), kind, 7).values
    assert np.array_equal(a, control_sample(trial_rng(9, 0), kind, 7).values)
    x = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(control_cdf(kind, x) + control_cdf(kind, -x), 1.0, atol=1e-15)


@pytest.mark.parametrize("kind", ["normal", "laplace", "uniform"])
def test_control_cf_matches_samples(kind):
    n = 10**5
    x = control_sample(trial_rng(10, 0), kind, n, scale=1.3)
    t = np.array([0.5, 1.0, 2.0])
    assert np.max(np.abs(ecf(x, t) - control_cf(kind, t, 1.3))) <= 3 / math.sqrt(n)


def test_charfn_contract():
    f = sech_charfn(1.5)
    assert f(0.0) == 1.0
    assert f(0.7) == f(-0.7)
    assert f.symmetric
