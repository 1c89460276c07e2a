"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``PASS/FAIL criterion N: ...`` line (visible with
``pytest -v``) and then asserts the criterion.
"""
import math
import time

import numpy as np
import pytest
from scipy import special

from bmo_sharp.bellman import eval_b2
from bmo_sharp.domain import Params, Point3
from bmo_sharp.sharp_constant import (constant, profile_ratio_at, ratio_profile,
                                      xi_equation_residual, zero_mean_window)
from bmo_sharp.verify import (concavity_probe, envelope_check, inequality_monte_carlo,
                              near_extremal_ratio, optimizer_suite, skeleton_probe,
                              smoothness_probe, w_sign_probe, x3_curvature_probe)


@pytest.fixture
def report(capsys):
    def emit(n: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
        assert ok, detail
    return emit


def test_criterion_1_closed_forms(report):
    worst_err, worst_time = 0.0, 0.0
    cases = [(1.0, r, 2 ** (1 - 1 / r)) for r in (1.1, 1.5, 1.9)]
    cases += [(p, r, (special.gamma(r + 1) / special.gamma(p + 1)) ** (1 / r))
              for p, r in ((1, 3), (2, 4), (1.5, 2))]
    for p, r, want in cases:
        t0 = time.perf_counter()
        c = constant(p, r).c
        worst_time = max(worst_time, time.perf_counter() - t0)
        worst_err = max(worst_err, abs(c - want))
    report(1, worst_err < 1e-9 and worst_time < 1.0,
           f"closed forms max |err| = {worst_err:.2e}, slowest call {worst_time:.3f} s")


def test_criterion_2_xi_branch(report):
    parts, ok = [], True
    for p, r in ((1.2, 1.6), (1.5, 1.8), (1.1, 1.9)):
        res = constant(p, r)
        resid = abs(xi_equation_residual(res.xi_star, p, r))
        lo, hi = sorted(zero_mean_window(p))
        xs = np.linspace(lo, hi, 10_000)
        params = Params(p, r)
        best = max(eval_b2(Point3(0.0, 1.0, float(x)), params) / float(x) for x in xs)
        rel = abs(res.c - best ** (1 / r)) / res.c
        e_lo = abs(profile_ratio_at(1.0, p, r) / 2 ** (r - p) - 1)
        g = special.gamma(r + 1) / special.gamma(p + 1)
        prof = ratio_profile(p, r, 3)
        ends = {round(prof[0][0], 12): prof[0][1], round(prof[-1][0], 12): prof[-1][1]}
        e_hi = abs(ends[round(special.gamma(p + 1) / 2, 12)] / g - 1)
        e_lo = max(e_lo, abs(ends[round(2 ** (p - 2), 12)] / 2 ** (r - p) - 1))
        ok &= resid < 1e-10 and rel < 1e-6 and max(e_lo, e_hi) < 1e-8
        parts.append(f"({p},{r}) resid {resid:.1e} oracle {rel:.1e} ends {max(e_lo, e_hi):.1e}")
    report(2, ok, "; ".join(parts))


def test_criterion_3_continuity(report):
    errs = [abs(constant(p, 2 - 1e-4).c - math.sqrt(2 / special.gamma(p + 1)))
            for p in (1.2, 1.5, 1.8)]
    report(3, max(errs) < 1e-3, f"max gap at r = 2 - 1e-4 is {max(errs):.2e}")


def test_criterion_4_skeleton(report):
    reps = [skeleton_probe(pr, 1000, seed=0) for pr in (Params(1.3, 1.7), Params(1.5, 3.0))]
    worst = max(r.worst_violation for r in reps)
    report(4, worst < 1e-8, f"max |B - |t|^r| over 1000 skeleton points = {worst:.2e}")


def test_criterion_5_optimizers(report):
    t0 = time.perf_counter()
    stats = optimizer_suite(Params(1.3, 1.7, 1.0), 100, seed=0, n_grid=4000)
    elapsed = time.perf_counter() - t0
    mom = max(s.moment_error for s in stats.values())
    bmo = max(s.bmo_max for s in stats.values())
    dist = min(s.curve_min_distance for s in stats.values())
    n = sum(s.n for s in stats.values())
    ok = (mom < 1e-6 and bmo <= 1 + 1e-4 and dist >= -1e-8 and elapsed < 120
          and all(s.n == 100 for s in stats.values()))
    report(5, ok, f"{n} optimizers: moment err {mom:.1e}, max BMO {bmo:.6f}, "
                  f"curve margin {dist:.1e}, {elapsed:.0f} s")


def test_criterion_6_concavity(report):
    concave = concavity_probe(Params(1.3, 1.7), 10_000, seed=0)
    convex = concavity_probe(Params(1.5, 3.0), 10_000, seed=0)
    ok = concave.passed and convex.passed
    report(6, ok, f"midpoint defect violation (1.3,1.7) {concave.worst_violation:.1e}, "
                  f"(1.5,3) {convex.worst_violation:.1e}")


def test_criterion_7_c1_gluing(report):
    lines, ok = [], True
    for params in (Params(1.3, 1.7), Params(2.5, 3.5)):
        reps = smoothness_probe(params, 50, seed=0)
        lit = max(r.worst_violation for r in reps.values())
        ext = max(r.extra["extrapolated_jump"] for r in reps.values())
        worst = max(reps.values(), key=lambda r: r.worst_violation)
        ok &= lit < 1e-4
        lines.append(f"p={params.p}: literal jump {lit:.1e} (at {worst.name}), "
                     f"extrapolated {ext:.1e}")
    report(7, ok, "; ".join(lines))


def test_criterion_8_envelope(report):
    t0 = time.perf_counter()
    reps = [envelope_check(p, "max", n=200) for p in (1.5, 3.0)]
    elapsed = time.perf_counter() - t0
    ok = all(r.passed for r in reps) and elapsed < 300
    report(8, ok, ", ".join(f"p={r.name[11:14]} vs {r.extra['reference']}: "
                            f"{r.worst_violation:.1e}" for r in reps) + f", {elapsed:.0f} s")


def test_criterion_9_inequality(report):
    mc = inequality_monte_carlo(1.3, 1.7, 1000, seed=0)
    near = near_extremal_ratio(1.3, 1.7)
    ok = mc.passed and near >= 0.99
    report(9, ok, f"worst random ratio {mc.extra['worst_ratio']:.4f}, "
                  f"near-extremal ratio {near:.4f}")


def test_criterion_10_signs(report):
    w = w_sign_probe(50)
    curv = [x3_curvature_probe(pr, 1000, seed=0) for pr in (Params(1.3, 1.7), Params(1.5, 3.0))]
    ok = w.passed and w.worst_violation == 0 and all(c.passed for c in curv)
    report(10, ok, f"w' sign mismatches {int(w.worst_violation)}/{w.n_samples}, "
                   f"B_x3x3 worst wrong-sign {max(c.worst_violation for c in curv):.1e}")
