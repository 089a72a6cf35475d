import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sechlab import cf_lab
from sechlab.cf_lab import (
    DivergenceError,
    DyadicGridFn,
    apply_A,
    diag_residual,
    factorization_residual,
    iterate_A,
    joint_cf,
    marginal_cf,
    residual_polya,
    solve_doubling,
    zero_free_check,
)
from sechlab.sech_core import CharFn, InvalidParameterError, control_charfn, sech_cf, sech_charfn

# mpmath, 40 digits, from exp(-t^2/2) and 1/(1+t^2):
#   e^-2 - e^-1 (e^-2 + 1)/2,  e^-1 (e^-2 + 1)/2,  e^-4 - marginal^2
NORMAL_RESIDUAL_2 = -0.073497971533040440
NORMAL_MARGINAL_2 = 0.20883325476965313
NORMAL_FACTOR_22 = -0.025295689408952672
NORMAL_F2_SQ = 0.018315638888734180
NORMAL_MARGINAL_2_SQ = 0.043611328297686853
LAPLACE_RESIDUAL_2 = 0.05  # 1/5 - (1/4)(6/5)/2, exact
SECH_JOINT_11 = 0.15883159318006332  # sech(pi/2)^2

sech = sech_charfn()
normal = control_charfn("normal")
laplace = control_charfn("laplace")
one = CharFn("degenerate", lambda t: np.ones_like(t))

cfs = st.sampled_from([sech, normal, laplace, control_charfn("uniform"), sech_charfn(0.3)])
ts = st.floats(-10, 10, allow_nan=False)


@given(cfs)
def test_residual_zero_at_origin(f):
    assert residual_polya(f, 0.0) == 0.0


def test_residual_sech_vanishes():
    t = np.linspace(0, 20, 4001)
    assert np.max(np.abs(residual_polya(sech, t))) <= 1e-12


def test_residual_controls():
    assert residual_polya(normal, 2.0) == pytest.approx(NORMAL_RESIDUAL_2, abs=1e-14)
    assert residual_polya(laplace, 2.0) == pytest.approx(LAPLACE_RESIDUAL_2, abs=1e-15)


@given(st.floats(0.01, 10))
def test_scaled_sech_is_solution(a):
    t = np.linspace(0, 8, 257)
    assert np.max(np.abs(residual_polya(sech_charfn(a), t))) <= 1e-12


def test_grid_shape_checked():
    with pytest.raises(InvalidParameterError):
        DyadicGridFn(1.0, 3, np.ones(8))
    with pytest.raises(InvalidParameterError):
        DyadicGridFn(-1.0, 3, np.ones(9))


def test_at_half_exact_on_polynomials():
    # even cubic interpolation reproduces even quadratics exactly
    g = DyadicGridFn.from_function(lambda t: 1 - 0.3 * t**2, 2.0, 6)
    np.testing.assert_allclose(g.at_half(), 1 - 0.3 * (g.t / 2) ** 2, atol=1e-15)


def test_apply_A_degenerate_fixed_point():
    g = DyadicGridFn(4.0, 8, np.ones(257))
    assert np.array_equal(apply_A(g).values, g.values)


@pytest.mark.parametrize("depth", [8, 10, 12])
def test_apply_A_sech_fixed_point(depth):
    g = DyadicGridFn.from_function(sech, 8.0, depth)
    h = g.step
    # cubic midpoint error is (3/128) h^4 max|f''''|, and |f''''| <= 5 (pi/2)^4 for sech(pi t/2)
    interp = 3 / 128 * h**4 * 5 * (math.pi / 2) ** 4
    assert np.max(np.abs(apply_A(g).values - g.values)) <= 1e-12 + 2 * interp


def test_iterate_A_records_history():
    g = DyadicGridFn.from_function(normal, 8.0, 9)
    final, history = iterate_A(g, 50, lambda t: sech_cf(t, 2 / math.pi))
    assert len(history) == 50
    assert all(np.isfinite(history))
    assert final.values[0] == pytest.approx(1.0)


def test_solve_doubling_single_point():
    g = solve_doubling(math.pi / 2, 1.0, 30, grid_depth=2)
    assert g.values[-1] == pytest.approx(0.398536815338386680, abs=1e-12)


def test_closed_form_half_angle_identity():
    g = 1 / math.cosh(math.pi / 4) ** 2
    assert g == pytest.approx(0.569933963793377, abs=1e-12)
    assert g / (2 - g) == pytest.approx(sech_cf(1.0), abs=1e-15)


def test_solve_doubling_matches_sech():
    g = solve_doubling(math.pi / 2, 4.0, 30)
    assert np.max(np.abs(g.values - sech_cf(g.t))) <= 1e-6
    assert g.values[0] == 1.0


def test_solve_doubling_scaled_family():
    g = solve_doubling(math.pi, 4.0, 30)
    assert np.max(np.abs(g.values - sech_cf(g.t, 2.0))) <= 1e-6
    g = solve_doubling(3.0, 4.0, 30)
    assert np.max(np.abs(g.values - sech_cf(g.t, 6 / math.pi))) <= 1e-6


def test_solve_doubling_error_decreases_with_depth():
    errors = []
    for depth in (15, 20, 25, 30):
        g = solve_doubling(math.pi / 2, 4.0, depth)
        errors.append(np.max(np.abs(g.values - sech_cf(g.t))))
    assert all(a > b for a, b in zip(errors, errors[1:]))


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 5), st.floats(0.3, 3))
def test_solve_doubling_scale_covariance(a, sigma):
    lhs = solve_doubling(a * sigma, 4.0, 30).values
    rhs = solve_doubling(sigma, 4.0 * a, 30).values
    np.testing.assert_allclose(lhs, rhs, atol=1e-13)


def test_solve_doubling_preconditions():
    with pytest.raises(InvalidParameterError):
        solve_doubling(1.0, 4.0, 9)
    with pytest.raises(InvalidParameterError):
        solve_doubling(-1.0, 4.0, 20)


def test_divergence_reports_t(monkeypatch):
    monkeypatch.setattr(cf_lab, "DIVERGENCE_MARGIN", 1.5)
    with pytest.raises(DivergenceError) as info:
        solve_doubling(1.0, 4.0, 12, grid_depth=3)
    assert info.value.t == 0.0


# --- linear forms ---------------------------------------------------------


@given(cfs, ts)
def test_joint_at_zero_is_marginal(f, s):
    assert joint_cf(f, s, 0.0) == pytest.approx(marginal_cf(f, s), abs=1e-15)


def test_joint_sech_value():
    assert joint_cf(sech, 1.0, 1.0) == pytest.approx(SECH_JOINT_11, abs=1e-15)


@given(cfs, ts, ts)
def test_joint_symmetric(f, s, t):
    assert joint_cf(f, s, t) == pytest.approx(joint_cf(f, t, s), abs=1e-15)


@given(cfs)
def test_marginal_at_zero(f):
    assert marginal_cf(f, 0.0) == pytest.approx(1.0, abs=1e-15)


@given(ts)
def test_marginal_sech_is_sech(s):
    assert marginal_cf(sech, s) == pytest.approx(sech(s), abs=1e-15)


def test_marginal_normal():
    assert marginal_cf(normal, 2.0) == pytest.approx(NORMAL_MARGINAL_2, abs=1e-14)


def test_factorization_sech_grid():
    s = np.linspace(0, 4, 101)
    assert np.max(np.abs(factorization_residual(sech, s[:, None], s[None, :]))) <= 1e-12


def test_factorization_normal():
    assert factorization_residual(normal, 2.0, 2.0) == pytest.approx(NORMAL_FACTOR_22, abs=1e-14)


@given(cfs, ts)
def test_factorization_vanishes_at_t0(f, s):
    assert factorization_residual(f, s, 0.0) == pytest.approx(0.0, abs=1e-15)


@given(cfs, ts)
def test_diag_equals_factorization_on_diagonal(f, s):
    assert diag_residual(f, s) == pytest.approx(factorization_residual(f, s, s), abs=1e-15)


def test_diag_values():
    assert diag_residual(normal, 2.0) == pytest.approx(NORMAL_F2_SQ - NORMAL_MARGINAL_2_SQ, abs=1e-14)
    assert diag_residual(normal, 2.0) == pytest.approx(NORMAL_FACTOR_22, abs=1e-14)
    s = np.linspace(0, 10, 201)
    assert np.max(np.abs(diag_residual(sech, s))) <= 1e-12
    assert diag_residual(laplace, 0.0) == 0.0


# --- zero-freeness ----------------------------------------------------------


def test_zero_free_sech():
    assert zero_free_check(DyadicGridFn.from_function(sech, 20.0, 12)).zero_free


def test_zero_free_uniform_detects_pi():
    report = zero_free_check(DyadicGridFn.from_function(control_charfn("uniform"), 4.0, 10), eps=1e-9)
    assert not report.zero_free
    assert report.first_violation == pytest.approx(math.pi, abs=4.0 / 2**10)


def test_zero_free_constant():
    assert zero_free_check(DyadicGridFn(1.0, 4, np.ones(17))).zero_free


def test_zero_free_flags_small_value():
    v = np.ones(17)
    v[5] = 1e-20
    report = zero_free_check(DyadicGridFn(1.0, 4, v), eps=1e-12)
    assert report.first_violation == pytest.approx(5 / 16)
    assert report.reason == "small"


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 3))
def test_zero_freeness_propagation(a):
    # a solution of the mixture identity that is nonzero at T has no zeros below T
    g = DyadicGridFn.from_function(sech_charfn(a), 8.0, 10)
    res = residual_polya(sech_charfn(a), g.t)
    assert np.max(np.abs(res)) <= 1e-12
    if g.values[-1] != 0:
        assert zero_free_check(g, eps=1e-300).zero_free
