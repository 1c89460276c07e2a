"""Evaluate the Bellman function at a point and build a function that attains it.

Run:  python demos/02_bellman_and_optimizer.py
"""
from bmo_sharp import (Params, Point3, bmo_norm, classify_b2, delivery_curve, eval_b2, moment,
                       optimizer)
from bmo_sharp.domain import x3_bounds

params = Params(p=1.3, r=1.7, eps=1.0)

# A point is (<phi>, <phi^2>, <|phi|^p>). The first two coordinates must lie in
# the parabolic strip x1^2 <= x2 <= x1^2 + eps^2, the third in an interval
# that depends on them.
lo, hi = x3_bounds(Point3(0.4, 0.9, 0.0).xy, params)
print(f"admissible x3 at (0.4, 0.9): [{lo:.6f}, {hi:.6f}]")

for frac in (0.05, 0.5, 0.95):
    x = Point3(0.4, 0.9, lo + frac * (hi - lo))
    label = classify_b2(x, params)
    value = eval_b2(x, params)

    # The optimizer is a concrete function on an interval whose averages are x
    # and whose r-th moment equals the Bellman value.
    _, phi = optimizer(x, params)
    print(f"\nx3 = {x.x3:.6f}  subdomain {label.value}  B = {value:.10f}")
    print(f"  optimizer has {len(phi.segments)} pieces on [0, {phi.length:.4f}]")
    print(f"  <phi> = {moment(phi, 1, signed=True):.10f}   <phi^2> = {moment(phi, 2):.10f}")
    print(f"  <|phi|^p> = {moment(phi, params.p):.10f}   <|phi|^r> = {moment(phi, params.r):.10f}")
    print(f"  BMO norm on a 2000-cell grid: {bmo_norm(phi, 2000):.6f}")

    # Running averages over [0, t] trace a curve that must stay in the strip.
    curve = delivery_curve(phi, 200)
    worst = min(min(q.x2 - q.x1**2, 1 - (q.x2 - q.x1**2)) for q in curve)
    print(f"  closest approach of the running-average curve to the strip edge: {worst:.2e}")
