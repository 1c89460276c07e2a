"""Bellman candidates B1 and B2 with their leaf solvers and gradients.

Each candidate is affine along the leaves of a foliation. Evaluating it means
finding the leaf through x (a one-dimensional monotone root solve) and
then reading off the r-th moment on that leaf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Union

from scipy import optimize

from .domain import (Params, Point2, Point3, SubdomainLabel, check_point3,
                     classify_b1, classify_b2, geometry)
from .errors import NumericalError, ParameterError
from .special_fn import (INF, cap_a, k, k_deriv, m, m_deriv, w_left, w_left_deriv,
                         w_right, w_right_deriv)

L = SubdomainLabel


# ------------------------------------------------------------------ leaves

@dataclass(frozen=True)
class FanLeft:
    u: float
    v: float
    xi: float
    h: float


@dataclass(frozen=True)
class FanRight:
    u: float
    v: float
    xi: float
    h: float


@dataclass(frozen=True)
class Chord:
    a: float
    b: float


@dataclass(frozen=True)
class RLeaf:
    v: float


@dataclass(frozen=True)
class F0Leaf:
    xi: float


@dataclass(frozen=True)
class B1Triangle:
    v: float


@dataclass(frozen=True)
class B1Trapezoid:
    v: float


LeafCoords = Union[FanLeft, FanRight, Chord, RLeaf, F0Leaf, B1Triangle, B1Trapezoid]


def _clamped_root(f, lo: float, hi: float, what: str, xtol: float = 1e-15) -> float:
    """Root of a monotone f on [lo, hi]; clamps to the nearer end if f keeps its sign."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        return lo if abs(flo) <= abs(fhi) else hi
    root, info = optimize.brentq(f, lo, hi, xtol=xtol, rtol=1e-15, maxiter=500,
                                 full_output=True, disp=False)
    if not info.converged:
        raise NumericalError(f"{what}: root solve did not converge", residual=abs(f(root)))
    return root


# --- fans

def _left_target(x1: float, x2: float, x3: float, params: Params):
    p, eps, ctx = params.p, params.eps, params.ctx
    g = geometry(Point2(x1, x2), eps)
    dm = g.delta_minus
    v = max(x1 - dm, 0.0)
    u = v + eps
    y = eps * ((x3 - v**p) / dm - m(p, v, eps, ctx))
    return u, v, dm, y


def _solve_left_xi(u: float, y: float, p: float, eps: float, ctx, shift: float) -> float:
    """xi in [u, inf] with w_left(xi; p, shift) = y, clamped to the range."""
    top = w_left(u, p, eps, ctx, shift)
    if (y - top) * top >= 0:
        return u
    if y * top <= 0:
        return INF
    g = lambda xi: w_left(xi, p, eps, ctx, shift) - y
    step = eps
    while g(u + step) * top > 0:
        step *= 2.0
        if step > 2000.0 * eps:
            return INF
    return _clamped_root(g, u + step / 2 if step > eps else u, u + step, "left fan")


def _fan_left(x: Point3, params: Params) -> FanLeft:
    x1 = abs(x.x1)
    u, v, dm, y = _left_target(x1, x.x2, x.x3, params)
    xi = _solve_left_xi(u, y, params.p, params.eps, params.ctx, u)
    return FanLeft(u=u, v=v, xi=xi, h=w_left(xi, params.p, params.eps, params.ctx, u))


def _fan_right(x: Point3, params: Params) -> FanRight:
    p, eps, ctx = params.p, params.eps, params.ctx
    x1 = abs(x.x1)
    g = geometry(Point2(x1, x.x2), eps)
    dm = g.delta_minus
    v = x1 + dm
    u = max(v - eps, 0.0)
    y = eps * (k(p, v, eps, ctx) - (v**p - x.x3) / dm)
    f = lambda xi: w_right(xi, p, eps, ctx, -u) - y
    xi = _clamped_root(f, 0.0, u, "right fan") if u > 0 else 0.0
    return FanRight(u=u, v=v, xi=xi, h=w_right(xi, p, eps, ctx, -u))


def _f0_leaf(x: Point3, params: Params) -> F0Leaf:
    p, eps, ctx = params.p, params.eps, params.ctx
    y = eps * (2 * eps * x.x3 / x.x2 - m(p, 0.0, eps, ctx))
    return F0Leaf(xi=_solve_left_xi(eps, y, p, eps, ctx, eps))


# --- chords

def chord_b(a: float, x1: float, x2: float) -> float:
    return (x2 - a * x1) / (x1 - a)


def chord_value(a: float, b: float, x1: float, s: float) -> float:
    if b - a <= 0:
        return abs(a) ** s
    return ((x1 - a) * b**s + (b - x1) * a**s) / (b - a)


def chord_a_range(x1: float, x2: float, eps: float) -> tuple[float, float]:
    g = geometry(Point2(x1, x2), eps)
    lo = max(x1 - g.delta_plus, 0.0)
    return lo, x1 - g.delta_minus


def _chord(x: Point3, params: Params) -> Chord:
    x1, x2, p = abs(x.x1), x.x2, params.p
    if x2 - x1 * x1 <= 1e-14 * (1 + x2):
        return Chord(a=x1, b=x1)
    lo, hi = chord_a_range(x1, x2, params.eps)
    f = lambda a: chord_value(a, chord_b(a, x1, x2), x1, p) - x.x3
    a = _clamped_root(f, lo, hi, "chord", xtol=1e-15 * (1 + x1))
    return Chord(a=a, b=chord_b(a, x1, x2))


def leaf_coords_b2(x: Point3, params: Params,
                   label: SubdomainLabel | None = None) -> tuple[SubdomainLabel, LeafCoords]:
    """Label and leaf coordinates of x for B2 (mirror side uses |x1|)."""
    lab = classify_b2(x, params) if label is None else label
    base = lab.positive
    if base is L.XI_L_PLUS:
        return lab, _fan_left(x, params)
    if base is L.XI_R_PLUS:
        return lab, _fan_right(x, params)
    if base is L.XI_CH_PLUS:
        return lab, _chord(x, params)
    if base is L.F0:
        if x.x2 <= 0:
            return lab, F0Leaf(xi=INF)
        return lab, _f0_leaf(x, params)
    if base is L.R:
        if x.x2 <= 0:
            return lab, RLeaf(v=0.0)
        return lab, RLeaf(v=(x.x3 / x.x2) ** (1.0 / (params.p - 2.0)))
    raise NumericalError(f"label {lab} is not a B2 subdomain")


def _value_on_leaf(x: Point3, leaf: LeafCoords, s: float, params: Params) -> float:
    eps, ctx = params.eps, params.ctx
    x1, x2 = abs(x.x1), x.x2
    if isinstance(leaf, FanLeft):
        dm = geometry(Point2(x1, x2), eps).delta_minus
        return leaf.v**s + (m(s, leaf.v, eps, ctx)
                            + w_left(leaf.xi, s, eps, ctx, leaf.u) / eps) * dm
    if isinstance(leaf, FanRight):
        dm = geometry(Point2(x1, x2), eps).delta_minus
        return leaf.v**s - (k(s, leaf.v, eps, ctx)
                            - w_right(leaf.xi, s, eps, ctx, -leaf.u) / eps) * dm
    if isinstance(leaf, Chord):
        return chord_value(leaf.a, leaf.b, x1, s)
    if isinstance(leaf, RLeaf):
        return leaf.v ** (s - 2.0) * x2 if x2 > 0 else 0.0
    if isinstance(leaf, F0Leaf):
        if x2 <= 0:
            return 0.0
        return (m(s, 0.0, eps, ctx) + w_left(leaf.xi, s, eps, ctx, eps) / eps) * x2 / (2 * eps)
    raise TypeError(f"not a B2 leaf: {leaf!r}")


def eval_b2(x: Point3, params: Params) -> float:
    """B2 at x; requires p != 2 and r != 2."""
    params.require_b2()
    lab, leaf = leaf_coords_b2(x, params)
    if isinstance(leaf, RLeaf) and x.x2 > 0:
        return x.x3 ** ((params.r - 2) / (params.p - 2)) * x.x2 ** (
            (params.p - params.r) / (params.p - 2))
    return _value_on_leaf(x, leaf, params.r, params)


def moment_on_leaf(x: Point3, leaf: LeafCoords, s: float, params: Params) -> float:
    """The leaf's affine s-moment at x; s = p recovers x3, s = r gives B2."""
    return _value_on_leaf(x, leaf, s, params)


# ------------------------------------------------------------------ gradient

def _fd_grad(x: Point3, params: Params, h: float | None = None) -> tuple[float, float]:
    h3 = h if h is not None else 1e-6 * (1 + abs(x.x3))
    h2 = h if h is not None else 1e-6 * (1 + abs(x.x2))
    f = lambda a, b: eval_b2(Point3(x.x1, a, b), params)
    d2 = (f(x.x2 + h2, x.x3) - f(x.x2 - h2, x.x3)) / (2 * h2)
    d3 = (f(x.x2, x.x3 + h3) - f(x.x2, x.x3 - h3)) / (2 * h3)
    return d2, d3


def _analytic_grad(x: Point3, lab: SubdomainLabel, leaf: LeafCoords,
                   params: Params) -> tuple[float, float]:
    p, r, eps, ctx = params.p, params.r, params.eps, params.ctx
    x2, x3 = x.x2, x.x3
    if isinstance(leaf, RLeaf):
        q = x3 / x2
        return ((p - r) / (p - 2) * q ** ((r - 2) / (p - 2)),
                (r - 2) / (p - 2) * q ** ((r - p) / (p - 2)))
    if isinstance(leaf, Chord):
        a, b = leaf.a, leaf.b
        al, be = 0.5 * (a + b), 0.5 * (b - a)
        d3 = cap_a(al, be, r) / cap_a(al, be, p)
        ba2 = (b - a) ** 2
        d2 = ((b**r - a**r - r * a ** (r - 1) * (b - a)) / ba2
              - (b**p - a**p - p * a ** (p - 1) * (b - a)) / ba2 * d3)
        return d2, d3
    if isinstance(leaf, F0Leaf):
        d3 = cap_a(leaf.xi, eps, r) / cap_a(leaf.xi, eps, p)
        bval = _value_on_leaf(x, leaf, r, params)
        return bval / x2 - d3 * x3 / x2, d3
    if isinstance(leaf, FanLeft):
        d3 = cap_a(leaf.xi, eps, r) / cap_a(leaf.xi, eps, p)
        wr = w_left(leaf.xi, r, eps, ctx, leaf.u) / eps**2
        wp = w_left(leaf.xi, p, eps, ctx, leaf.u) / eps**2
        d2 = 0.5 * ((m_deriv(r, leaf.v, eps, 1, ctx) + wr)
                    - (m_deriv(p, leaf.v, eps, 1, ctx) + wp) * d3)
        return d2, d3
    if isinstance(leaf, FanRight):
        d3 = w_right_deriv(leaf.xi, r, eps) / w_right_deriv(leaf.xi, p, eps)
        wr = w_right(leaf.xi, r, eps, ctx, -leaf.u) / eps**2
        wp = w_right(leaf.xi, p, eps, ctx, -leaf.u) / eps**2
        d2 = 0.5 * ((k_deriv(r, leaf.v, eps, 1, ctx) + wr)
                    - (k_deriv(p, leaf.v, eps, 1, ctx) + wp) * d3)
        return d2, d3
    raise TypeError(f"not a B2 leaf: {leaf!r}")


def _degenerate(x: Point3, leaf: LeafCoords, params: Params) -> bool:
    eps = params.eps
    if x.x2 - x.x1 * x.x1 < 1e-9 * (1 + x.x2):
        return True
    if isinstance(leaf, (FanLeft, F0Leaf)):
        lo = leaf.u if isinstance(leaf, FanLeft) else eps
        return not math.isfinite(leaf.xi) or leaf.xi - lo < 1e-9 * eps
    if isinstance(leaf, FanRight):
        return leaf.xi < 1e-9 * eps or leaf.u - leaf.xi < 1e-9 * eps
    if isinstance(leaf, Chord):
        return leaf.b - leaf.a < 1e-9 * eps or leaf.a <= 0.0
    return False


def grad_b2(x: Point3, params: Params) -> tuple[float, float]:
    """(dB2/dx2, dB2/dx3); centred differences when the leaf is degenerate."""
    params.require_b2()
    lab, leaf = leaf_coords_b2(x, params)
    if not _degenerate(x, leaf, params):
        g = _analytic_grad(x, lab, leaf, params)
        if all(math.isfinite(t) for t in g):
            return g
    return _fd_grad(x, params)


# ------------------------------------------------------------------ B1

def w1(v: float, s: float, eps: float, x1: float, x2: float, ctx=None) -> float:
    """Affine s-moment on the B1 leaf with parameter v, at (|x1|, x2)."""
    kw = {} if ctx is None else {"ctx": ctx}
    mv = m(s, v, eps, **kw)
    if v <= eps:
        return v**s + mv * (x2 - v * v) / (2 * (v + eps))
    kv = k(s, v, eps, **kw)
    return v**s + (mv - kv) / (4 * eps) * (x2 - 2 * v * x1 + v * v) + (mv + kv) / 2 * (x1 - v)


def b1_leaf_range(x1: float, x2: float, eps: float) -> tuple[float, float]:
    """Leaf parameters v whose leaf projects onto (|x1|, x2)."""
    g = geometry(Point2(x1, x2), eps)
    lo = max(abs(x1) - g.delta_minus, 0.0)
    hi = abs(x1) + g.delta_minus if x2 >= eps * eps else math.sqrt(max(x2, 0.0))
    return lo, max(hi, lo)


def leaf_coords_b1(x: Point3, params: Params) -> tuple[SubdomainLabel, LeafCoords]:
    lab = classify_b1(x, params)
    if params.p == 2.0:
        raise ParameterError("B1 leaves are not determined by x3 when p = 2")
    x1, x2, eps, ctx = abs(x.x1), x.x2, params.eps, params.ctx
    lo, hi = b1_leaf_range(x1, x2, eps)
    f = lambda v: w1(v, params.p, eps, x1, x2, ctx) - x.x3
    if hi - lo <= 1e-15 * (1 + hi):
        v = lo
    else:
        v = _guarded_root(f, lo, hi)
    return lab, (B1Trapezoid(v) if v <= eps else B1Triangle(v))


def _guarded_root(f, lo: float, hi: float, n_scan: int = 16) -> float:
    """Root on [lo, hi]; scans for a sign change if the ends do not bracket."""
    flo, fhi = f(lo), f(hi)
    if flo * fhi <= 0:
        return _clamped_root(f, lo, hi, "B1 leaf")
    grid = [lo + (hi - lo) * i / n_scan for i in range(n_scan + 1)]
    vals = [f(t) for t in grid]
    for a, b, fa, fb in zip(grid, grid[1:], vals, vals[1:]):
        if fa * fb <= 0:
            return _clamped_root(f, a, b, "B1 leaf")
    i = min(range(len(vals)), key=lambda j: abs(vals[j]))
    if abs(vals[i]) > 1e-9 * (1 + abs(vals[i])):
        raise NumericalError("B1 leaf equation has no root in the leaf range",
                             residual=abs(vals[i]))
    return grid[i]


def eval_b1(x: Point3, params: Params) -> float:
    _, leaf = leaf_coords_b1(x, params)
    return w1(leaf.v, params.r, params.eps, abs(x.x1), x.x2, params.ctx)


# ------------------------------------------------------------------ dispatch

def candidate_for(params: Params, which: Literal["max", "min"]) -> str:
    """Which candidate ("b1" or "b2") realises the requested extremum."""
    sgn = (params.r - 2.0) * (params.r - params.p)
    if sgn == 0:
        raise ParameterError("(r-2)(r-p) = 0: no candidate dispatch for r = 2")
    if which not in ("max", "min"):
        raise ParameterError(f"which must be 'max' or 'min', got {which!r}")
    if sgn > 0:
        return "b1" if which == "max" else "b2"
    return "b2" if which == "max" else "b1"


def eval_bellman(x: Point3, params: Params, which: Literal["max", "min"] = "max") -> float:
    """Upper (max) or lower (min) Bellman function at x."""
    cand = candidate_for(params, which)
    return eval_b1(x, params) if cand == "b1" else eval_b2(x, params)
