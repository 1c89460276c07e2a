"""Extremal test functions and the tools to measure them.

A ``TestFunction`` is piecewise on [0, l]: each piece is either a constant or
a logarithmic ramp  sign * eps * ln(scale * (t - origin)).  All moments are
computed exactly (closed antiderivatives for powers 1 and 2, incomplete gamma
integrals otherwise), so checking an optimizer against the Bellman value does
not depend on a grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Union

import numpy as np
from scipy import integrate, special

from .bellman import Chord, F0Leaf, FanLeft, FanRight, RLeaf, leaf_coords_b2
from .domain import Params, Point2, Point3, SubdomainLabel, geometry
from .errors import DomainError
from .special_fn import DEFAULT_CTX, INF, QuadCtx, m, w_left

L = SubdomainLabel


@dataclass(frozen=True)
class ConstSeg:
    start: float
    end: float
    value: float

    def mapped(self, shift: float, factor: float) -> "ConstSeg":
        a, b = sorted((shift + factor * self.start, shift + factor * self.end))
        return ConstSeg(a, b, self.value)

    def negated(self) -> "ConstSeg":
        return replace(self, value=-self.value)


@dataclass(frozen=True)
class LogSeg:
    """phi(t) = sign * eps * ln(scale * (t - origin)) on [start, end]."""

    start: float
    end: float
    sign: int
    eps: float
    origin: float = 0.0
    scale: float = 1.0

    def sigma(self, t):
        return self.scale * (np.asarray(t, dtype=float) - self.origin)

    def mapped(self, shift: float, factor: float) -> "LogSeg":
        # new(t) = old((t - shift) / factor)
        a, b = sorted((shift + factor * self.start, shift + factor * self.end))
        return LogSeg(a, b, self.sign, self.eps, shift + factor * self.origin,
                      self.scale / factor)

    def negated(self) -> "LogSeg":
        return replace(self, sign=-self.sign)


Segment = Union[ConstSeg, LogSeg]


@dataclass(frozen=True)
class TestFunction:
    __test__ = False  # not a pytest class

    length: float
    segments: tuple[Segment, ...]

    def __post_init__(self) -> None:
        if not self.length > 0:
            raise ValueError("length must be positive")
        prev = 0.0
        for s in self.segments:
            if not s.end > s.start or abs(s.start - prev) > 1e-12 * max(1.0, self.length):
                raise ValueError("segments must partition [0, length] in order")
            prev = s.end
        if abs(prev - self.length) > 1e-12 * max(1.0, self.length):
            raise ValueError("segments do not reach the end of the interval")

    def breakpoints(self) -> np.ndarray:
        return np.array([0.0] + [s.end for s in self.segments])

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for seg in self.segments:
            mask = (t >= seg.start) & (t <= seg.end)
            if isinstance(seg, ConstSeg):
                out[mask] = seg.value
            else:
                out[mask] = seg.sign * seg.eps * np.log(seg.sigma(t[mask]))
        return out

    def to_dict(self) -> dict:
        segs = []
        for s in self.segments:
            if isinstance(s, ConstSeg):
                segs.append({"start": s.start, "end": s.end, "kind": "const", "value": s.value})
            else:
                segs.append({"start": s.start, "end": s.end, "kind": "log", "sign": s.sign,
                             "eps": s.eps, "origin": s.origin, "scale": s.scale})
        return {"length": self.length, "segments": segs}

    @classmethod
    def from_dict(cls, doc: dict) -> "TestFunction":
        segs: list[Segment] = []
        for s in doc["segments"]:
            if s["kind"] == "const":
                segs.append(ConstSeg(s["start"], s["end"], s["value"]))
            else:
                segs.append(LogSeg(s["start"], s["end"], int(s["sign"]), s["eps"],
                                   s.get("origin", 0.0), s.get("scale", 1.0)))
        return cls(doc["length"], tuple(segs))


def _build(pieces: list[tuple[float, float, Segment | None]], length: float,
           kind_eps: float) -> TestFunction:
    """Drop empty pieces; ``pieces`` holds (start, end, template)."""
    segs = []
    for a, b, tmpl in pieces:
        if b - a <= 1e-15 * max(1.0, length):
            continue
        segs.append(replace(tmpl, start=a, end=b))
    # close tiny gaps left by dropped pieces
    fixed = []
    prev = 0.0
    for s in segs:
        fixed.append(replace(s, start=prev))
        prev = s.end
    if fixed:
        fixed[-1] = replace(fixed[-1], end=length)
    return TestFunction(length, tuple(fixed))


# ------------------------------------------------------------------ log integrals

def _g1(sig):
    sig = np.asarray(sig, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(sig > 0, sig * np.log(np.where(sig > 0, sig, 1.0)) - sig, 0.0)


def _g2(sig):
    sig = np.asarray(sig, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = np.log(np.where(sig > 0, sig, 1.0))
        return np.where(sig > 0, sig * (lg * lg - 2 * lg + 2), 0.0)


def _abs_log_power(lo: float, hi: float, s: float, ctx: QuadCtx) -> float:
    """int_lo^hi |ln x|^s dx for 0 <= lo <= hi."""
    total = 0.0
    if lo < 1.0:
        b = min(hi, 1.0)
        t_hi = INF if lo <= 0 else -math.log(lo)
        t_lo = -math.log(b)
        a1 = s + 1.0
        if t_lo > a1:
            part = special.gammaincc(a1, t_lo) - (0.0 if t_hi == INF else special.gammaincc(a1, t_hi))
        else:
            part = (1.0 if t_hi == INF else special.gammainc(a1, t_hi)) - special.gammainc(a1, t_lo)
        total += special.gamma(a1) * part
    if hi > 1.0:
        a = max(lo, 1.0)
        val, _ = integrate.quad(lambda t: t**s * math.exp(t), math.log(a), math.log(hi),
                                epsabs=0.0, epsrel=ctx.rel_tol * 1e-3, limit=ctx.max_subdiv)
        total += val
    return total


def _seg_integral(seg: Segment, s: float, signed: bool, ctx: QuadCtx) -> float:
    if isinstance(seg, ConstSeg):
        v = seg.value if signed and s == 1 else abs(seg.value) ** s
        return (seg.end - seg.start) * v
    s0, s1 = seg.sigma(seg.start), seg.sigma(seg.end)
    inv = 1.0 / abs(seg.scale)
    if signed and s == 1:
        lo, hi = sorted((float(s0), float(s1)))
        return seg.sign * seg.eps * inv * float(_g1(hi) - _g1(lo))
    lo, hi = sorted((float(s0), float(s1)))
    if s == 2:
        return seg.eps**2 * inv * float(_g2(hi) - _g2(lo))
    return seg.eps**s * inv * _abs_log_power(max(lo, 0.0), hi, s, ctx)


def moment(phi: TestFunction, s: float, signed: bool = False,
           ctx: QuadCtx = DEFAULT_CTX) -> float:
    """(1/l) int_0^l |phi|^s, or the plain mean when signed and s == 1."""
    if s < 1 and not signed:
        raise DomainError(f"moment exponent {s} must be >= 1")
    return sum(_seg_integral(g, s, signed, ctx) for g in phi.segments) / phi.length


def _cumulative(phi: TestFunction, t: np.ndarray, shift: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """int_0^t (phi - shift) and int_0^t (phi - shift)^2 at each t."""
    t = np.asarray(t, dtype=float)
    c1 = np.zeros_like(t)
    c2 = np.zeros_like(t)
    for seg in phi.segments:
        te = np.clip(t, seg.start, seg.end)
        span = te - seg.start
        if isinstance(seg, ConstSeg):
            c = seg.value - shift
            c1 += span * c
            c2 += span * c * c
            continue
        f = seg.sign * seg.eps / seg.scale
        f2 = seg.eps**2 / seg.scale
        sa = float(seg.sigma(seg.start))
        se = seg.sigma(te)
        i1 = f * (_g1(se) - _g1(sa))
        i2 = f2 * (_g2(se) - _g2(sa))
        c1 += i1 - shift * span
        c2 += i2 - 2 * shift * i1 + shift * shift * span
    return c1, c2


def delivery_curve(phi: TestFunction, n: int) -> list[Point2]:
    """Running averages (<phi>_[0,t], <phi^2>_[0,t]) at n equispaced t."""
    if n < 2:
        raise DomainError("delivery_curve needs n >= 2")
    t = phi.length * np.arange(1, n + 1) / n
    c1, c2 = _cumulative(phi, t)
    return [Point2(float(a), float(b)) for a, b in zip(c1 / t, c2 / t)]


def _grid(phi: TestFunction, n_grid: int, n_log: int = 32) -> np.ndarray:
    pts = [np.linspace(0.0, phi.length, n_grid + 1), phi.breakpoints()]
    for seg in phi.segments:
        if isinstance(seg, LogSeg):
            # geometric refinement towards the logarithmic singularity
            a, b = seg.start, seg.end
            near = seg.origin
            d0, d1 = abs(a - near), abs(b - near)
            lo, hi = max(min(d0, d1), 1e-300), max(d0, d1)
            if lo < hi:
                dist = np.geomspace(max(lo, hi * 1e-12), hi, n_log)
                sgn = 1.0 if seg.scale > 0 else -1.0
                pts.append(np.clip(near + sgn * dist, a, b))
    return np.unique(np.concatenate(pts))


def bmo_norm(phi: TestFunction, n_grid: int = 4000, ctx: QuadCtx = DEFAULT_CTX,
             chunk: int = 64) -> float:
    """Largest mean oscillation over subintervals with endpoints on a grid.

    The grid is an equispaced mesh, every breakpoint and a geometric cluster
    inside each logarithmic piece. The result is a lower bound for the true
    norm that increases as the mesh is refined.
    """
    if n_grid < 2:
        raise DomainError("bmo_norm needs n_grid >= 2")
    t = _grid(phi, n_grid)
    c1, c2 = _cumulative(phi, t, shift=moment(phi, 1, signed=True, ctx=ctx))
    best = 0.0
    n = len(t)
    for i0 in range(0, n - 1, chunk):
        i1 = min(i0 + chunk, n - 1)
        cols = slice(i0 + 1, n)
        ln = t[cols][None, :] - t[i0:i1, None]
        ln[ln <= 0] = np.inf                  # empty or reversed intervals
        mean = c1[cols][None, :] - c1[i0:i1, None]
        mean /= ln
        var = c2[cols][None, :] - c2[i0:i1, None]
        var /= ln
        mean *= mean
        var -= mean
        best = max(best, float(var.max()))
    return math.sqrt(max(best, 0.0))


# ------------------------------------------------------------------ constructions

def _require(label: SubdomainLabel, allowed: tuple[SubdomainLabel, ...], what: str) -> None:
    if label.positive not in allowed:
        raise DomainError(f"{what} optimizer needs a point of {allowed[0].value}, got {label.value}")


def _signed(phi: TestFunction, negative: bool) -> TestFunction:
    if not negative:
        return phi
    return TestFunction(phi.length, tuple(s.negated() for s in phi.segments))


def _left_fan_function(v: float, xi: float, dm: float, eps: float) -> TestFunction:
    t2 = 0.0 if xi == INF else math.exp(-(xi - eps) / eps)
    t1 = 0.5 * t2
    t3 = math.exp(-v / eps)
    length = eps / dm * t3
    c = lambda val: ConstSeg(0, 0, val)
    return _build([(0.0, t1, c(xi + eps)), (t1, t2, c(xi - eps)),
                   (t2, t3, LogSeg(0, 0, -1, eps)), (t3, length, c(v))], length, eps)


def optimizer_xi_l(x: Point3, params: Params, label: SubdomainLabel | None = None) -> TestFunction:
    """Four-piece optimizer on the left fans (values xi+eps, xi-eps, -eps ln t, v)."""
    lab, leaf = leaf_coords_b2(x, params, label)
    _require(lab, (L.XI_L_PLUS,), "left-fan")
    assert isinstance(leaf, FanLeft)
    dm = geometry(x.xy, params.eps).delta_minus
    phi = _left_fan_function(leaf.v, leaf.xi, dm, params.eps)
    return _signed(phi, x.x1 < 0)


def optimizer_xi_r(x: Point3, params: Params, label: SubdomainLabel | None = None) -> TestFunction:
    """Optimizer on the right fans; five pieces when xi < eps, four otherwise."""
    lab, leaf = leaf_coords_b2(x, params, label)
    _require(lab, (L.XI_R_PLUS,), "right-fan")
    assert isinstance(leaf, FanRight)
    eps = params.eps
    dm = geometry(x.xy, eps).delta_minus
    xi, v = leaf.xi, leaf.v
    big = math.exp((xi + eps) / eps)
    t_end = math.exp(v / eps)
    length = eps / dm * t_end
    c = lambda val: ConstSeg(0, 0, val)
    ramp = LogSeg(0, 0, 1, eps)
    if xi >= eps:
        pieces = [(0.0, big / 2, c(xi - eps)), (big / 2, big, c(xi + eps))]
    else:
        q = (xi + eps) ** 2
        a_minus = (eps * eps - eps * xi) / (2 * q)
        a_plus = (eps * eps + eps * xi + 2 * xi * xi) / (2 * q)
        pieces = [(0.0, a_minus * big, c(-(xi + eps))),
                  (a_minus * big, (1 - a_plus) * big, c(0.0)),
                  ((1 - a_plus) * big, big, c(xi + eps))]
    pieces += [(big, t_end, ramp), (t_end, length, c(v))]
    return _signed(_build(pieces, length, eps), x.x1 < 0)


def optimizer_chord(x: Point3, params: Params, label: SubdomainLabel | None = None) -> TestFunction:
    """Two-valued optimizer: b on a fraction (x1-a)/(b-a) of the interval, then a."""
    lab, leaf = leaf_coords_b2(x, params, label)
    _require(lab, (L.XI_CH_PLUS,), "chord")
    assert isinstance(leaf, Chord)
    a, b, x1 = leaf.a, leaf.b, abs(x.x1)
    if b - a <= 1e-14 * (1 + b):
        return _signed(TestFunction(1.0, (ConstSeg(0.0, 1.0, a),)), x.x1 < 0)
    phi = _build([(0.0, x1 - a, ConstSeg(0, 0, b)), (x1 - a, b - a, ConstSeg(0, 0, a))],
                 b - a, params.eps)
    return _signed(phi, x.x1 < 0)


def optimizer_r(x: Point3, params: Params, label: SubdomainLabel | None = None) -> TestFunction:
    """Three-valued optimizer -v, 0, v on [0, 1]."""
    lab, leaf = leaf_coords_b2(x, params, label)
    _require(lab, (L.R,), "R")
    assert isinstance(leaf, RLeaf)
    v = leaf.v
    if x.x2 <= 0 or v <= 0:
        return TestFunction(1.0, (ConstSeg(0.0, 1.0, 0.0),))
    am_ = (x.x2 - v * x.x1) / (2 * v * v)
    ap_ = (x.x2 + v * x.x1) / (2 * v * v)
    c = lambda val: ConstSeg(0, 0, val)
    return _build([(0.0, am_, c(-v)), (am_, 1 - ap_, c(0.0)), (1 - ap_, 1.0, c(v))], 1.0, params.eps)


def optimizer_f0(x: Point3, params: Params, label: SubdomainLabel | None = None) -> TestFunction:
    """Glue a non-positive block, a zero block and a non-negative block.

    The outer blocks are the left-fan optimizers at (-eps, 2eps^2, .) and
    (eps, 2eps^2, .) on the same leaf, rearranged to be non-decreasing.
    """
    lab, leaf = leaf_coords_b2(x, params, label)
    _require(lab, (L.F0,), "F0")
    assert isinstance(leaf, F0Leaf)
    eps = params.eps
    if x.x2 <= 0:
        return TestFunction(1.0, (ConstSeg(0.0, 1.0, 0.0),))
    dec = _left_fan_function(0.0, leaf.xi, eps, eps)          # non-increasing, >= 0, on [0, 1]
    inc = tuple(s.mapped(1.0, -1.0) for s in reversed(dec.segments))
    neg = tuple(s.negated() for s in dec.segments)            # non-decreasing, <= 0
    total = x.x2 / (2 * eps * eps)
    a_minus = 0.5 * (total - x.x1 / eps)
    a_plus = 0.5 * (total + x.x1 / eps)
    a_zero = 1.0 - total
    segs: list[Segment] = []
    if a_minus > 1e-15:
        segs += [s.mapped(0.0, a_minus) for s in neg]
    if a_zero > 1e-15:
        segs.append(ConstSeg(a_minus, a_minus + a_zero, 0.0))
    if a_plus > 1e-15:
        segs += [s.mapped(a_minus + a_zero, a_plus) for s in inc]
    pieces = [(s.start, s.end, s) for s in segs]
    return _build(pieces, 1.0, eps)


def optimizer(x: Point3, params: Params) -> tuple[SubdomainLabel, TestFunction]:
    """Dispatch to the construction matching the B2 subdomain of x."""
    lab, _ = leaf_coords_b2(x, params)
    base = lab.positive
    build = {L.XI_L_PLUS: optimizer_xi_l, L.XI_R_PLUS: optimizer_xi_r,
             L.XI_CH_PLUS: optimizer_chord, L.R: optimizer_r, L.F0: optimizer_f0}[base]
    return lab, build(x, params, lab)
