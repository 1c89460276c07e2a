import math
import time
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from bmo_sharp.bellman import eval_b2
from bmo_sharp.domain import Params, Point3
from bmo_sharp.errors import ParameterError
from bmo_sharp.sharp_constant import (Branch, constant, cube_factor, multidim_ball_constant,
                                      multidim_cube_constant, profile_ratio_at, ratio_profile,
                                      xi_equation_residual, zero_mean_window)
from bmo_sharp.special_fn import cap_a


def gamma_ratio(p, r):
    return math.exp((special.gammaln(r + 1) - special.gammaln(p + 1)) / r)


def grid_search(p, r, n=10_000):
    """max_x3 B2(0, 1, x3)/x3 over the zero-mean window, by brute force."""
    params = Params(p, r)
    lo, hi = sorted(zero_mean_window(p))
    xs = np.linspace(lo, hi, n)
    vals = [eval_b2(Point3(0.0, 1.0, float(x)), params) / float(x) for x in xs]
    i = int(np.argmax(vals))
    return vals[i] ** (1 / r), float(xs[i])


# ---------------------------------------------------------------- closed forms

def test_closed_form_examples():
    res = constant(1.0, 1.5)
    assert res.branch is Branch.P1_SMALL_R
    assert res.c == pytest.approx(2 ** (1 / 3), rel=1e-14)
    assert res.xi_star is None
    res = constant(2.0, 4.0)
    assert res.branch is Branch.GAMMA_FORMULA
    assert res.c == pytest.approx(12 ** 0.25, rel=1e-14)


@settings(max_examples=50, deadline=None)
@given(r=st.floats(1.01, 6.0))
def test_p1_two_branch_formula(r):
    want = 2 ** (1 - 1 / r) if r <= 2 else special.gamma(r + 1) ** (1 / r)
    assert constant(1.0, r).c == pytest.approx(want, rel=1e-12)


def test_p1_continuous_at_two():
    assert constant(1.0, 2.0 - 1e-9).c == pytest.approx(constant(1.0, 2.0).c, abs=1e-8)


def test_parameter_errors():
    for p, r in ((1.5, 1.5), (2.0, 1.9), (0.5, 1.5)):
        with pytest.raises(ParameterError):
            constant(p, r)
    with pytest.raises(ParameterError):
        xi_equation_residual(2.0, 1.5, 2.5)
    with pytest.raises(ParameterError):
        xi_equation_residual(0.5, 1.2, 1.6)


# ---------------------------------------------------------------- xi-equation

@pytest.mark.parametrize("p,r", [(1.2, 1.6), (1.3, 1.7), (1.5, 1.8), (1.1, 1.9)])
def test_xi_branch_root_and_oracle(p, r):
    res = constant(p, r)
    assert res.branch is Branch.XI_EQUATION
    assert abs(xi_equation_residual(res.xi_star, p, r)) < 1e-10
    c_grid, x3_grid = grid_search(p, r)
    assert res.c == pytest.approx(c_grid, rel=1e-6)
    lo, hi = sorted(zero_mean_window(p))
    assert abs(res.x3_star - x3_grid) <= 2 * (hi - lo) / 1e4
    # the grid maximum can only sit below the true supremum
    assert res.c >= c_grid * (1 - 1e-12)


@pytest.mark.parametrize("p,r", [(1.2, 1.6), (1.5, 1.8)])
def test_residual_ends(p, r):
    lhs = cap_a(1.0, 1.0, r) / cap_a(1.0, 1.0, p)
    assert lhs == pytest.approx(2 ** (r - p) * (2 - r) / (2 - p), rel=1e-13)
    # xi = 1 is the chord end of the window, xi -> inf the apex
    assert profile_ratio_at(1.0, p, r) == pytest.approx(2 ** (r - p), rel=1e-12)
    assert profile_ratio_at(200.0, p, r) == pytest.approx(
        special.gamma(r + 1) / special.gamma(p + 1), rel=1e-12)
    assert xi_equation_residual(1.0, p, r) == pytest.approx(lhs - 2 ** (r - p), rel=1e-12)


@pytest.mark.parametrize("p,r", [(1.2, 1.6), (1.5, 1.8), (1.1, 1.9)])
def test_residual_single_sign_change(p, r):
    xs = np.geomspace(1.0 + 1e-6, 1e3, 1000)
    vals = np.array([xi_equation_residual(float(x), p, r) for x in xs])
    changes = int(np.sum(np.sign(vals[1:]) != np.sign(vals[:-1])))
    assert changes <= 1
    assert np.sign(vals[0]) != np.sign(vals[-1])


@pytest.mark.parametrize("p,r", [(1.2, 1.6), (1.5, 1.8), (1.1, 1.9)])
def test_window_endpoint_ratios(p, r):
    prof = ratio_profile(p, r, 5)
    (x_lo, q_lo), (x_hi, q_hi) = prof[0], prof[-1]
    assert (x_lo, x_hi) == pytest.approx(sorted(zero_mean_window(p)))
    ratios = {round(x_lo, 14): q_lo, round(x_hi, 14): q_hi}
    assert ratios[round(2 ** (p - 2), 14)] == pytest.approx(2 ** (r - p), rel=1e-8)
    assert ratios[round(special.gamma(p + 1) / 2, 14)] == pytest.approx(
        special.gamma(r + 1) / special.gamma(p + 1), rel=1e-8)


@pytest.mark.parametrize("p,r", [(1.2, 1.6), (1.5, 1.8), (1.1, 1.9), (1.3, 1.7)])
def test_interior_maximum_dominates_endpoints(p, r):
    c = constant(p, r).c
    assert c**r >= max(2 ** (r - p), special.gamma(r + 1) / special.gamma(p + 1)) * (1 - 1e-12)
    assert c >= 1.0


def test_ratio_profile_validation():
    with pytest.raises(ParameterError):
        ratio_profile(1.5, 2.5, 10)
    with pytest.raises(ParameterError):
        ratio_profile(1.2, 1.6, 2)


@pytest.mark.parametrize("p", [1.2, 1.5, 1.8])
def test_continuity_at_r_two(p):
    res = constant(p, 2 - 1e-4)
    assert res.branch is Branch.XI_EQUATION
    assert abs(res.c - math.sqrt(2 / special.gamma(p + 1))) < 1e-3


def test_margin_fallback_warns():
    with pytest.warns(RuntimeWarning):
        res = constant(1.5, 2 - 1e-7)
    assert res.branch is Branch.GAMMA_FORMULA
    assert res.warning
    assert res.c == pytest.approx(gamma_ratio(1.5, 2 - 1e-7))


def test_closed_forms_are_fast():
    for p, r in ((1, 1.1), (1, 1.5), (1, 1.9), (1, 3), (2, 4), (1.5, 2)):
        t0 = time.perf_counter()
        constant(p, r)
        assert time.perf_counter() - t0 < 1.0


def test_to_dict_keys():
    assert set(constant(1.3, 1.7).to_dict()) == {"C", "branch", "xi_star", "x3_star", "warning"}


# ---------------------------------------------------------------- multidimensional

def test_cube_factor_examples():
    assert [cube_factor(n) for n in (1, 2, 5)] == [4.0, 12.0, 20.0]
    with pytest.raises(ParameterError):
        cube_factor(0)


def test_cube_constant_example():
    assert multidim_cube_constant(1.0, 1.5, 2) == pytest.approx(
        2 ** (1 / 3) * 12 ** (1 / 3), rel=1e-14)


def test_ball_constant():
    c = constant(1.3, 1.7).c
    assert multidim_ball_constant(1.3, 1.7, 1, 1.0) == pytest.approx(c)
    assert multidim_ball_constant(1.3, 1.7, 4, 2.0) == pytest.approx(
        c * 2.0 * 4 ** (0.4 / 3.4))
    with pytest.raises(ParameterError):
        multidim_ball_constant(1.3, 1.7, 2, 0.0)
    with pytest.raises(ParameterError):
        multidim_ball_constant(1.3, 1.7, 0, 1.0)


def test_no_warning_on_regular_call():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        constant(1.3, 1.7)
