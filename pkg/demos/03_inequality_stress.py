"""Test the interpolation inequality on random functions and on the extremal one.

The normalised ratio ||phi||_r / (C ||phi||_p^{p/r} ||phi||_BMO^{1-p/r})
never exceeds 1. Random step functions sit well below it, while the
optimizer at the maximising point reaches it.

Run:  python demos/03_inequality_stress.py
"""
import numpy as np

from bmo_sharp import constant
from bmo_sharp.verify import inequality_ratio, near_extremal_ratio, random_step_function

p, r = 1.3, 1.7
c = constant(p, r).c
rng = np.random.default_rng(2024)
ratios = [inequality_ratio(random_step_function(rng), p, r, c) for _ in range(200)]
ratios = np.array([q for q in ratios if q is not None])

print(f"C({p}, {r}) = {c:.10f}")
print(f"200 random zero-mean step functions: max ratio {ratios.max():.4f}, "
      f"median {np.median(ratios):.4f}")
print(f"optimizer at the maximiser: ratio {near_extremal_ratio(p, r, n_grid=2000):.6f}")
