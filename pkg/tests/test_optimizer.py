import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bmo_sharp.bellman import eval_b2
from bmo_sharp.domain import Params, Point2, Point3, SubdomainLabel, classify_b2, x3_bounds
from bmo_sharp.errors import DomainError
from bmo_sharp.optimizer import (ConstSeg, LogSeg, TestFunction, bmo_norm, delivery_curve,
                                 moment, optimizer, optimizer_chord, optimizer_f0, optimizer_r,
                                 optimizer_xi_l, optimizer_xi_r)
from bmo_sharp.verify import sample_subdomain

L = SubdomainLabel
P13 = Params(1.3, 1.7)
P25 = Params(2.5, 3.5)


def const(*pairs, length=None):
    """Step function from (width, value) pairs."""
    segs, t = [], 0.0
    for w, v in pairs:
        segs.append(ConstSeg(t, t + w, v))
        t += w
    return TestFunction(t if length is None else length, tuple(segs))


# ---------------------------------------------------------------- TestFunction

def test_partition_validation():
    with pytest.raises(ValueError):
        TestFunction(1.0, (ConstSeg(0.0, 0.5, 1.0),))
    with pytest.raises(ValueError):
        TestFunction(1.0, (ConstSeg(0.0, 0.5, 1.0), ConstSeg(0.6, 1.0, 1.0)))
    with pytest.raises(ValueError):
        TestFunction(0.0, ())


def test_call_and_serialization_round_trip():
    phi = TestFunction(2.0, (ConstSeg(0.0, 0.5, 3.0), LogSeg(0.5, 1.5, -1, 0.7, 0.25, 2.0),
                             ConstSeg(1.5, 2.0, -1.0)))
    doc = json.loads(json.dumps(phi.to_dict()))
    assert TestFunction.from_dict(doc) == phi
    vals = phi(np.array([0.1, 1.0, 1.9]))
    assert vals[0] == 3.0 and vals[2] == -1.0
    assert vals[1] == pytest.approx(-0.7 * math.log(2.0 * 0.75))


def test_log_seg_mapping():
    seg = LogSeg(0.5, 1.0, 1, 1.0)
    mapped = seg.mapped(2.0, -1.0)        # t -> 2 - t
    assert (mapped.start, mapped.end) == (1.0, 1.5)
    t = 1.2
    assert 1.0 * math.log(mapped.sigma(t)) == pytest.approx(math.log(2.0 - t))


# ---------------------------------------------------------------- moments

def test_moment_constant():
    phi = const((1.0, -1.7))
    assert moment(phi, 3) == pytest.approx(1.7**3)
    assert moment(phi, 1, signed=True) == pytest.approx(-1.7)


def test_moment_log_closed_form():
    e2 = math.exp(-2)
    phi = TestFunction(1.0, (ConstSeg(0.0, e2, 0.0), LogSeg(e2, 1.0, -1, 1.0)))
    assert moment(phi, 1) == pytest.approx(1 - 3 * e2, rel=1e-14)
    assert moment(phi, 1, signed=True) == pytest.approx(1 - 3 * e2, rel=1e-14)
    # int_0^1 (ln t)^2 = 2, int_0^1 |ln t|^s = Gamma(s + 1)
    full = TestFunction(1.0, (LogSeg(0.0, 1.0, 1, 1.0),))
    assert moment(full, 2) == pytest.approx(2.0, rel=1e-14)
    assert moment(full, 1.5) == pytest.approx(math.gamma(2.5), rel=1e-12)


@st.composite
def smooth_functions(draw):
    """Random functions whose log pieces stay away from their singularity."""
    n = draw(st.integers(1, 5))
    segs, t = [], 0.0
    for _ in range(n):
        w = draw(st.floats(0.1, 1.0))
        if draw(st.booleans()):
            segs.append(ConstSeg(t, t + w, draw(st.floats(-3.0, 3.0))))
        else:
            gap = draw(st.floats(0.05, 2.0))
            scale = draw(st.floats(0.3, 3.0))
            segs.append(LogSeg(t, t + w, draw(st.sampled_from([-1, 1])),
                               draw(st.floats(0.3, 2.0)), t - gap, scale))
        t += w
    return TestFunction(t, tuple(segs))


@settings(max_examples=25, deadline=None)
@given(phi=smooth_functions(), s=st.sampled_from([1.0, 1.3, 2.0, 2.7, 3.5]))
def test_moment_matches_riemann_sum(phi, s):
    # midpoint sums per segment, 10^6 points in total
    n = 1_000_000 // len(phi.segments)
    tot_s = tot_1 = 0.0
    for seg in phi.segments:
        h = (seg.end - seg.start) / n
        vals = phi(seg.start + (np.arange(n) + 0.5) * h)
        tot_s += h * float(np.sum(np.abs(vals) ** s))
        tot_1 += h * float(np.sum(vals))
    assert moment(phi, s) == pytest.approx(tot_s / phi.length, rel=1e-7, abs=1e-9)
    assert moment(phi, 1, signed=True) == pytest.approx(tot_1 / phi.length, rel=1e-7, abs=1e-9)


def test_moment_singular_log_piece():
    from scipy import integrate

    seg = LogSeg(0.0, 0.8, 1, 1.3, 0.0, 2.0)
    phi = TestFunction(0.8, (seg,))
    for s in (1.0, 1.7, 3.2):
        f = lambda t: abs(1.3 * math.log(2.0 * t)) ** s
        want = integrate.quad(f, 0.0, 0.8, points=[0.5], limit=200, epsabs=1e-13)[0] / 0.8
        assert moment(phi, s) == pytest.approx(want, rel=1e-9)


def test_moment_rejects_small_exponent():
    with pytest.raises(DomainError):
        moment(const((1.0, 1.0)), 0.5)


# ---------------------------------------------------------------- BMO norm

def test_bmo_constant_is_zero():
    assert bmo_norm(const((1.0, 4.2)), 200) == pytest.approx(0.0, abs=1e-7)


def test_bmo_jump():
    a, b = -0.5, 2.0
    phi = const((0.5, a), (0.5, b))
    assert bmo_norm(phi, 400) == pytest.approx((b - a) / 2, rel=1e-12)


def brute_bmo(phi, n):
    """Direct double loop over an equispaced grid (piecewise constants only)."""
    grid = np.linspace(0.0, phi.length, n + 1)
    cells = phi((grid[:-1] + grid[1:]) / 2)
    best = 0.0
    for i in range(n):
        for j in range(i + 1, n + 1):
            v = cells[i:j]
            best = max(best, float(np.mean(v * v) - np.mean(v) ** 2))
    return math.sqrt(best)


@settings(max_examples=15, deadline=None)
@given(vals=st.lists(st.floats(-4.0, 4.0), min_size=2, max_size=6),
       widths=st.lists(st.integers(1, 8), min_size=6, max_size=6))
def test_bmo_matches_brute_force(vals, widths):
    widths = widths[:len(vals)]
    n = sum(widths)
    phi = const(*[(w / n, v) for w, v in zip(widths, vals)], length=1.0)
    assert bmo_norm(phi, n) == pytest.approx(brute_bmo(phi, n), rel=1e-9, abs=1e-9)


def test_bmo_monotone_in_grid():
    phi = TestFunction(1.0, (LogSeg(0.0, 0.6, -1, 1.0), ConstSeg(0.6, 1.0, 0.2)))
    vals = [bmo_norm(phi, n) for n in (50, 100, 200, 400)]
    assert vals == sorted(vals)


def test_bmo_rejects_tiny_grid():
    with pytest.raises(DomainError):
        bmo_norm(const((1.0, 1.0)), 1)


# ---------------------------------------------------------------- delivery curve

def test_delivery_curve_constant():
    pts = delivery_curve(const((2.0, -1.5)), 5)
    assert all((p.x1, p.x2) == pytest.approx((-1.5, 2.25), rel=1e-14) for p in pts)


# ---------------------------------------------------------------- constructions

def check_optimizer(x, params, phi, tol=1e-6):
    want = (x.x1, x.x2, x.x3, eval_b2(x, params))
    got = (moment(phi, 1, signed=True), moment(phi, 2), moment(phi, params.p),
           moment(phi, params.r))
    for g, w in zip(got, want):
        assert abs(g - w) <= tol * max(1.0, abs(w))
    last = delivery_curve(phi, 50)[-1]
    assert (last.x1, last.x2) == pytest.approx((x.x1, x.x2), abs=1e-9)


def test_chord_example():
    x = Point3(1.5, 2.5, (2**1.3 + 1) / 2)
    phi = optimizer_chord(x, P13)
    assert sorted({s.value for s in phi.segments}) == pytest.approx([1.0, 2.0])
    for s in (1.3, 1.7, 3.0):
        assert moment(phi, s) == pytest.approx((2**s + 1) / 2, rel=1e-10)
    check_optimizer(x, P13, phi)


def test_r_example():
    params = Params(1.5, 1.8)
    x = Point3(0.1, 0.6, 0.6 * 1.2**-0.5)
    phi = optimizer_r(x, params)
    levels = sorted({round(abs(s.value), 12) for s in phi.segments})
    assert levels in ([0.0, 1.2], [1.2])
    check_optimizer(x, params, phi)


def test_origin_gives_zero_function():
    _, phi = optimizer(Point3(0.0, 0.0, 0.0), P13)
    assert all(s.value == 0.0 for s in phi.segments)


def test_skeleton_gives_constant():
    _, phi = optimizer(Point3(-1.5, 2.25, 1.5**1.3), P13)
    assert [s.value for s in phi.segments] == [-1.5]


def test_wrong_subdomain_raises():
    x = Point3(1.5, 2.5, (2**1.3 + 1) / 2)
    for build in (optimizer_xi_l, optimizer_xi_r, optimizer_r, optimizer_f0):
        with pytest.raises(DomainError):
            build(x, P13)


@pytest.mark.parametrize("label", [L.XI_L_PLUS, L.XI_R_PLUS, L.XI_CH_PLUS, L.R, L.F0],
                         ids=lambda v: v.value)
@pytest.mark.parametrize("params", [P13, P25], ids=["p1.3", "p2.5"])
def test_optimizer_moments(label, params):
    for x in sample_subdomain(params, label, 6, seed=3):
        lab, phi = optimizer(x, params)
        assert lab is label
        check_optimizer(x, params, phi)
        xm = x.mirrored()
        lab_m, phi_m = optimizer(xm, params)
        assert lab_m is label.mirrored()
        check_optimizer(xm, params, phi_m)


@pytest.mark.parametrize("small_xi", [True, False])
def test_right_fan_both_branches(small_xi):
    pts = sample_subdomain(P13, L.XI_R_PLUS, 4, seed=5,
                           accept=lambda x, leaf: (leaf.xi < 1.0) == small_xi)
    for x in pts:
        phi = optimizer_xi_r(x, P13)
        n_pieces = len(phi.segments)
        assert n_pieces <= (5 if small_xi else 4)
        if small_xi:
            assert any(s.value == 0.0 for s in phi.segments if isinstance(s, ConstSeg))
        check_optimizer(x, P13, phi)


@pytest.mark.parametrize("label", [L.XI_L_PLUS, L.F0, L.XI_R_PLUS], ids=lambda v: v.value)
def test_optimizer_bmo_and_curve(label):
    for x in sample_subdomain(P13, label, 3, seed=11):
        _, phi = optimizer(x, P13)
        assert bmo_norm(phi, 1500) <= 1.0 + 1e-4
        for q in delivery_curve(phi, 300):
            t = q.x2 - q.x1 ** 2
            assert -1e-8 <= t <= 1.0 + 1e-8


def test_near_skeleton_left_fan_is_nearly_constant():
    params = P13
    pt = Point2(2.0, 4.0 + 1e-6)
    lo, hi = x3_bounds(pt, params)
    x = Point3(pt.x1, pt.x2, lo)
    assert classify_b2(x, params) is L.XI_L_PLUS
    phi = optimizer(x, params)[1]
    assert moment(phi, 2) - moment(phi, 1, signed=True) ** 2 == pytest.approx(0.0, abs=1e-5)
