"""How the sharp constant C(p, r) behaves as the exponents move.

Run:  python demos/01_sharp_constant.py
"""
from bmo_sharp import constant, multidim_cube_constant

# For p = 1 there is a closed form on both sides of r = 2.
print("p = 1")
for r in (1.1, 1.5, 1.9, 2.0, 3.0):
    res = constant(1.0, r)
    print(f"  r = {r:<4}  C = {res.c:.12f}  ({res.branch.value})")

# For 1 < p < r < 2 the constant comes out of a one-dimensional root problem.
# xi_star is the root and x3_star the extremal third coordinate.
print("\n1 < p < r < 2")
for p, r in ((1.2, 1.6), (1.3, 1.7), (1.5, 1.8), (1.1, 1.9)):
    res = constant(p, r)
    print(f"  (p, r) = ({p}, {r})  C = {res.c:.12f}  xi* = {res.xi_star:.6f}  "
          f"x3* = {res.x3_star:.6f}")

# Approaching r = 2 from below, the root branch merges with the Gamma formula.
print("\nnear r = 2 for p = 1.5")
for r in (1.9, 1.99, 1.999, 2.0):
    res = constant(1.5, r)
    print(f"  r = {r:<6} C = {res.c:.10f}  ({res.branch.value})")

# Cubes in R^n pick up a dimensional factor (4 in dimension one).
print("\ncube constants for (p, r) = (1, 1.5)")
for n in (1, 2, 3, 5):
    print(f"  n = {n}: {multidim_cube_constant(1.0, 1.5, n):.10f}")
