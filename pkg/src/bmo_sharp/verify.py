"""Independent numerical checks of the Bellman candidates and the constant.

Every probe returns a ``ProbeReport``. Probes are deterministic given their
seed and never consult the foliation they are checking, except to decide
which side of a surface a sample sits on.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Literal

import numpy as np

from .bellman import eval_b1, eval_b2, leaf_coords_b2
from .domain import (Params, Point2, Point3, SubdomainLabel, chord_left, chord_right,
                     classify_b2, classify_omega2, geometry, x3_bounds)
from .errors import BmoSharpError, DomainError
from .optimizer import (TestFunction, ConstSeg, bmo_norm, delivery_curve, moment,
                        optimizer, optimizer_f0)
from .sharp_constant import constant
from .special_fn import w_left_deriv, w_right_deriv

L = SubdomainLabel


@dataclass
class ProbeReport:
    name: str
    n_samples: int
    worst_violation: float
    worst_point: tuple | None
    threshold: float
    passed: bool = field(init=False)
    extra: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.worst_violation = max(0.0, float(self.worst_violation))
        self.passed = self.worst_violation < self.threshold

    def to_dict(self) -> dict:
        d = asdict(self)
        if self.worst_point is not None:
            d["worst_point"] = [float(v) for v in self.worst_point]
        return d


class _Worst:
    """Running maximum with the point where it occurred."""

    def __init__(self) -> None:
        self.value = 0.0
        self.point: tuple | None = None
        self.count = 0

    def add(self, v: float, point: tuple) -> None:
        self.count += 1
        if self.point is None or v > self.value:
            self.value, self.point = v, point


def _rng(seed: int | None) -> np.random.Generator:
    return np.random.default_rng(seed)


# ------------------------------------------------------------------ sampling

def _to_point(x1: float, t: float, s: float, params: Params) -> Point3:
    x2 = x1 * x1 + t
    lo, hi = x3_bounds(Point2(x1, x2), params)
    return Point3(x1, x2, lo + s * (hi - lo))


def random_point(params: Params, rng: np.random.Generator, x1_max: float | None = None,
                 symmetric: bool = True) -> Point3:
    """Random point of the domain: uniform in x1, in x2 - x1^2 and in the x3 fraction."""
    eps = params.eps
    x1_max = 3.0 * eps if x1_max is None else x1_max
    x1 = rng.uniform(-x1_max if symmetric else 0.0, x1_max)
    return _to_point(x1, rng.uniform(0.0, eps * eps), rng.uniform(0.0, 1.0), params)


def sample_subdomain(params: Params, label: SubdomainLabel, n: int, seed: int | None = 0,
                     accept: Callable[[Point3, object], bool] | None = None,
                     max_tries: int = 200_000) -> list[Point3]:
    """n points of the B2 subdomain ``label`` (x1 >= 0), by rejection."""
    rng = _rng(seed)
    out: list[Point3] = []
    for _ in range(max_tries):
        if len(out) >= n:
            break
        x = random_point(params, rng, symmetric=False)
        # stay off the skeleton and the upper boundary
        if not (1e-6 < x.x2 - x.x1**2 < params.eps**2 * (1 - 1e-6)):
            continue
        try:
            lab, leaf = leaf_coords_b2(x, params)
        except BmoSharpError:
            continue
        if lab is label and (accept is None or accept(x, leaf)):
            out.append(x)
    if len(out) < n:
        raise DomainError(f"could only sample {len(out)} of {n} points in {label.value}")
    return out


# ------------------------------------------------------------------ concavity

def _segment_inside(a: Point3, b: Point3, params: Params, n_check: int = 9) -> bool:
    for lam in np.linspace(0.0, 1.0, n_check):
        x1 = a.x1 + lam * (b.x1 - a.x1)
        x2 = a.x2 + lam * (b.x2 - a.x2)
        x3 = a.x3 + lam * (b.x3 - a.x3)
        t = x2 - x1 * x1
        if t < 0 or t > params.eps**2:
            return False
        lo, hi = x3_bounds(Point2(x1, x2), params)
        if x3 < lo or x3 > hi:
            return False
    return True


def concavity_probe(params: Params, n_segments: int, seed: int | None = 0,
                    candidate: Literal["b1", "b2"] = "b2", spread: float = 0.2,
                    threshold: float = 1e-9) -> ProbeReport:
    """Midpoint defect B(mid) - (B(a) + B(b))/2 on random segments inside the domain.

    Reported violation is the largest defect with the wrong sign for the
    expected shape: concave when (r-2)(r-p) < 0, convex otherwise.
    """
    rng = _rng(seed)
    f = eval_b2 if candidate == "b2" else eval_b1
    concave = (params.r - 2) * (params.r - params.p) < 0
    worst = _Worst()
    eps = params.eps
    while worst.count < n_segments:
        x1 = rng.uniform(-3 * eps, 3 * eps)
        t, s = rng.uniform(0, eps * eps), rng.uniform(0, 1)
        d = rng.normal(size=3) * spread
        x1b = x1 + d[0] * eps
        tb = min(max(t + d[1] * eps * eps, 0.0), eps * eps)
        sb = min(max(s + d[2], 0.0), 1.0)
        try:
            a = _to_point(x1, t, s, params)
            b = _to_point(x1b, tb, sb, params)
            if not _segment_inside(a, b, params):
                continue
            mid = Point3((a.x1 + b.x1) / 2, (a.x2 + b.x2) / 2, (a.x3 + b.x3) / 2)
            defect = f(mid, params) - 0.5 * (f(a, params) + f(b, params))
        except DomainError:
            continue
        worst.add(-defect if concave else defect, (a.x1, a.x2, a.x3, b.x1, b.x2, b.x3))
    return ProbeReport(f"concavity[{candidate}]", worst.count, worst.value, worst.point,
                       threshold, extra={"expected": "concave" if concave else "convex"})


# ------------------------------------------------------------------ C1 gluing

@dataclass(frozen=True)
class Surface:
    name: str
    omegas: tuple[int, ...]
    lower: SubdomainLabel      # label on the am side
    upper: SubdomainLabel      # label on the ak side
    level: Callable[[float, float, Params], float]


def _s_f0_r(x1, x2, pr):
    return (2 * pr.eps) ** (pr.p - 2) * x2


def _s_r_xir(x1, x2, pr):
    g = geometry(Point2(x1, x2), pr.eps)
    return (x1 + g.delta_minus) ** (pr.p - 2) * x2


def _s_xil_ch(x1, x2, pr):
    return chord_left(geometry(Point2(x1, x2), pr.eps), x1, pr.p, pr.eps)


def _s_ch_r(x1, x2, pr):
    return x2 ** (pr.p - 1) * x1 ** (2 - pr.p)


def _s_ch_xir(x1, x2, pr):
    return chord_right(geometry(Point2(x1, x2), pr.eps), x1, pr.p, pr.eps)


SURFACES: tuple[Surface, ...] = (
    Surface("F0|R", (0,), L.F0, L.R, _s_f0_r),
    Surface("R|XiR+", (1, 3), L.R, L.XI_R_PLUS, _s_r_xir),
    Surface("XiL+|XiCh+", (2, 3, 4), L.XI_L_PLUS, L.XI_CH_PLUS, _s_xil_ch),
    Surface("XiCh+|R", (2, 3), L.XI_CH_PLUS, L.R, _s_ch_r),
    Surface("XiCh+|XiR+", (4,), L.XI_CH_PLUS, L.XI_R_PLUS, _s_ch_xir),
)


def _aitken(d: list[float]) -> float:
    d1, d2, d3 = d
    den = (d3 - d2) - (d2 - d1)
    if den == 0 or not math.isfinite(den):
        return d3
    return d3 - (d3 - d2) ** 2 / den


def one_sided_dx3(x: Point3, params: Params, h: float, side: int) -> float:
    """Second-order forward (side=+1) or backward (side=-1) x3-difference of B2.

    Uses only points on one side of x, so a kink at x shows up as a jump
    between the two sides while smooth curvature cancels to O(h^2).
    """
    f = lambda j: eval_b2(Point3(x.x1, x.x2, x.x3 + side * j * h), params)
    return side * (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h)


def smoothness_probe(params: Params, n_per_boundary: int, seed: int | None = 0,
                     h: float = 1e-5, threshold: float = 1e-4) -> dict[str, ProbeReport]:
    """Relative jump of one-sided x3-differences across each separating surface.

    Besides the literal step-h jump, each report carries the jump between
    one-sided limits extrapolated (Aitken) from steps h, h/4, h/16.
    """
    rng = _rng(seed)
    eps = params.eps
    sgn = 1.0 if params.p < 2 else -1.0     # which way is "up the ladder" in x3
    out = {}
    for surf in SURFACES:
        worst, worst_x = _Worst(), _Worst()
        tries = 0
        while worst.count < n_per_boundary and tries < 50_000:
            tries += 1
            x1 = rng.uniform(0.02 * eps, 3 * eps)
            x2 = x1 * x1 + rng.uniform(0.02, 0.98) * eps * eps
            if abs(int(classify_omega2(Point2(x1, x2), eps))) not in surf.omegas:
                continue
            x3s = surf.level(x1, x2, params)
            lo, hi = x3_bounds(Point2(x1, x2), params)
            if not (lo + 1e3 * h < x3s < hi - 1e3 * h):   # room for 2h steps on both sides
                continue
            x = Point3(x1, x2, x3s)
            try:
                lab_dn = classify_b2(Point3(x1, x2, x3s - sgn * 2 * h), params)
                lab_up = classify_b2(Point3(x1, x2, x3s + sgn * 2 * h), params)
                if (lab_dn, lab_up) != (surf.lower, surf.upper):
                    continue
                sides = {}
                for side in (-1, 1):
                    ds = [one_sided_dx3(x, params, h / 4**j, side) for j in range(3)]
                    sides[side] = (ds[0], _aitken(ds))
            except BmoSharpError:
                continue
            (gm, gm_lim), (gp, gp_lim) = sides[-1], sides[1]
            scale = max(abs(gm), abs(gp), 1e-300)
            worst.add(abs(gp - gm) / scale, (x1, x2, x3s))
            worst_x.add(abs(gp_lim - gm_lim) / max(abs(gm_lim), abs(gp_lim), 1e-300),
                        (x1, x2, x3s))
        out[surf.name] = ProbeReport(
            f"smoothness[{surf.name}]", worst.count, worst.value, worst.point, threshold,
            extra={"extrapolated_jump": worst_x.value, "extrapolated_point": worst_x.point,
                   "step": h})
    return out


def skeleton_probe(params: Params, n: int, seed: int | None = 0,
                   t_max: float = 5.0) -> ProbeReport:
    """|B - |t|^r| on the skeleton for both candidates."""
    rng = _rng(seed)
    worst = _Worst()
    for t in rng.uniform(-t_max, t_max, n):
        x = Point3(float(t), float(t * t), abs(float(t)) ** params.p)
        target = abs(float(t)) ** params.r
        errs = [abs(eval_b1(x, params) - target)]
        if params.p != 2 and params.r != 2:
            errs.append(abs(eval_b2(x, params) - target))
        worst.add(max(errs), (x.x1, x.x2, x.x3))
    return ProbeReport("skeleton", worst.count, worst.value, worst.point, 1e-8)


# ------------------------------------------------------------------ 2-D envelope

@dataclass
class Grid2:
    """Values on a rectangle in (x1, t) with t = x2 - x1^2 in [0, eps^2].

    Every node lies in the strip; the row t = 0 is the skeleton.
    """

    x1: np.ndarray
    t: np.ndarray
    values: np.ndarray
    iterations: int = 0
    last_change: float = math.inf
    converged: bool = False

    @classmethod
    def window(cls, x1_min: float, x1_max: float, eps: float, nx1: int, nx2: int) -> "Grid2":
        x1 = np.linspace(x1_min, x1_max, nx1)
        t = np.linspace(0.0, eps * eps, nx2)
        return cls(x1, t, np.full((nx1, nx2), np.nan))

    @property
    def x2(self) -> np.ndarray:
        return self.t[None, :] + self.x1[:, None] ** 2


def _chord_bound(X1, T, p, eps, best, n_split: int = 65):
    """Extremes of two-point skeleton averages through each node (chords up to 2 eps)."""
    d = np.sqrt(np.maximum(eps * eps - T, 0.0))
    out = None
    for q in np.linspace(0.0, 1.0, n_split):
        left = np.maximum(eps - d + q * 2 * d, 1e-300)
        a, b = X1 - left, X1 + T / left
        with np.errstate(invalid="ignore", divide="ignore"):
            lam = np.where(b > a, (b - X1) / (b - a), 1.0)
        v = lam * np.abs(a) ** p + (1 - lam) * np.abs(b) ** p
        out = v if out is None else best(out, v)
    return out


def envelope_oracle_2d(p: float, eps: float, grid: Grid2, which: Literal["max", "min"] = "max",
                       n_iter: int = 2000, tol: float = 1e-8, pad: int | None = None,
                       n_slopes: int = 41, steps: Iterable[int] = (1, 2, 4, 8, 16, 32, 64)) -> Grid2:
    """Smallest locally concave (max) or largest locally convex (min) function
    with boundary values |t|^p on the skeleton, by iterated midpoint envelopes.

    Segments through a node run along (1, 2(x1 + c)) for c in [-eps, eps]
    (every non-vertical direction, written relative to the node) with
    half-lengths of ``steps`` grid cells in x1. Along such a segment the
    coordinate t changes by +-2ch - h^2 independently of x1, so endpoints
    fall on grid columns and only need linear interpolation in t.

    The grid is padded on both sides by ``pad`` extra columns at the same
    spacing; values far along the skeleton feed into the envelope and a
    bare window underestimates it near its edges.
    """
    best = np.fmax if which == "max" else np.fmin
    dx1 = grid.x1[1] - grid.x1[0]
    if pad is None:
        pad = int(math.ceil(9.0 * eps / dx1))
    x1 = grid.x1[0] + dx1 * np.arange(-pad, len(grid.x1) + pad)
    t = grid.t
    dt = t[1] - t[0]
    n1, n2 = len(x1), len(t)
    X1, T = np.meshgrid(x1, t, indexing="ij")
    B = _chord_bound(X1, T, p, eps, best)
    B[:, 0] = np.abs(x1) ** p

    slack = 1e-12 * eps * eps
    plans = []
    for c in np.linspace(-eps, eps, n_slopes):
        for k in steps:
            if 2 * k >= n1:
                continue
            h = k * dx1
            tm, tp = t - 2 * c * h - h * h, t + 2 * c * h - h * h
            ok = (tm >= -slack) & (tp >= -slack) & (tm <= eps * eps + slack) & (tp <= eps * eps + slack)
            if abs(c) < h:               # t peaks inside the segment
                ok &= t + c * c <= eps * eps + slack
            ok[0] = False                # skeleton is pinned
            J = np.nonzero(ok)[0]
            if len(J) == 0:
                continue
            idx = []
            for te in (tm, tp):
                f = np.clip(te[J] / dt, 0.0, n2 - 1 - 1e-12)
                j0 = np.floor(f).astype(int)
                idx.append((j0, f - j0))
            plans.append((k, J, idx))

    win = slice(pad, pad + len(grid.x1))
    change, it = math.inf, 0
    for it in range(1, n_iter + 1):
        old = B[win].copy()
        for k, J, ((jm, wm), (jp, wp)) in plans:
            lo_cols, hi_cols = B[: n1 - 2 * k], B[2 * k:]
            vm = lo_cols[:, jm] * (1 - wm) + lo_cols[:, jm + 1] * wm
            vp = hi_cols[:, jp] * (1 - wp) + hi_cols[:, jp + 1] * wp
            B[k: n1 - k, J] = best(B[k: n1 - k, J], 0.5 * (vm + vp))
        change = float(np.max(np.abs(B[win] - old)))
        if change < tol * (1.0 + float(np.max(np.abs(B[win])))):
            break
    return Grid2(grid.x1.copy(), t.copy(), B[win].copy(), iterations=it,
                 last_change=change, converged=change < tol * (1.0 + float(np.max(np.abs(B[win])))))


def envelope_check(p: float, which: Literal["max", "min"] = "max", eps: float = 1.0,
                   n: int = 200, half_width: float = 3.0, margin: int = 10,
                   threshold: float = 0.01, **kw) -> ProbeReport:
    """Compare the envelope oracle with am / ak on the window interior.

    The violation is sup|oracle - reference| / sup|reference| over nodes at
    least ``margin`` cells from the window edge in x1.
    """
    from .domain import ak, am
    use_am = (which == "max") == (p >= 2)
    ref_fn = am if use_am else ak
    grid = envelope_oracle_2d(p, eps, Grid2.window(-half_width, half_width, eps, n, n),
                              which, **kw)
    inner = slice(margin, n - margin)
    xs = grid.x1[inner]
    ref = np.array([[ref_fn(Point2(float(a), float(b) + float(a) ** 2), p, eps) for b in grid.t]
                    for a in xs])
    err = np.abs(grid.values[inner] - ref)
    i, j = np.unravel_index(int(np.argmax(err)), err.shape)
    return ProbeReport(f"envelope[p={p},{which}]", int(err.size),
                       float(err.max() / np.abs(ref).max()),
                       (float(xs[i]), float(grid.t[j] + xs[i] ** 2)), threshold,
                       extra={"reference": "am" if use_am else "ak",
                              "iterations": grid.iterations, "converged": grid.converged,
                              "max_abs_error": float(err.max())})


# ------------------------------------------------------------------ inequality

def random_step_function(rng: np.random.Generator, min_pieces: int = 3,
                         max_pieces: int = 12, df: float = 3.0, clip: float = 10.0) -> TestFunction:
    """Zero-mean step function on [0, 1] with Student-t values."""
    n = int(rng.integers(min_pieces, max_pieces + 1))
    widths = rng.dirichlet(np.ones(n))
    vals = np.clip(rng.standard_t(df, size=n), -clip, clip)
    vals = vals - float(np.dot(widths, vals))
    edges = np.concatenate([[0.0], np.cumsum(widths)])
    edges[-1] = 1.0
    segs = tuple(ConstSeg(float(a), float(b), float(v))
                 for a, b, v in zip(edges[:-1], edges[1:], vals) if b > a)
    return TestFunction(1.0, segs)


def inequality_ratio(phi: TestFunction, p: float, r: float, c: float, n_grid: int = 400) -> float | None:
    """||phi||_r / (C ||phi||_p^{p/r} ||phi||_BMO^{1-p/r}); None for the zero function."""
    mp, mr = moment(phi, p), moment(phi, r)
    bmo = bmo_norm(phi, n_grid)
    if mp <= 0 or bmo <= 0:
        return None
    return mr ** (1 / r) / (c * mp ** (1 / r) * bmo ** (1 - p / r))


def inequality_monte_carlo(p: float, r: float, n_funcs: int, seed: int | None = 0,
                           n_grid: int = 400, threshold: float = 1e-3) -> ProbeReport:
    """Worst normalised ratio over random zero-mean step functions.

    The k-th function depends only on the seed and k, so the worst ratio
    can only grow with n_funcs.
    """
    c = constant(p, r).c
    rng = _rng(seed)
    worst = -math.inf
    skipped = 0
    for _ in range(n_funcs):
        ratio = inequality_ratio(random_step_function(rng), p, r, c, n_grid)
        if ratio is None:
            skipped += 1
            continue
        worst = max(worst, ratio)
    return ProbeReport("inequality", n_funcs - skipped, worst - 1.0, None, threshold,
                       extra={"worst_ratio": worst, "C": c, "skipped": skipped})


def near_extremal_ratio(p: float, r: float, n_grid: int = 4000) -> float:
    """Ratio attained by the optimizer at the maximiser (0, 1, x3*) of B/x3."""
    res = constant(p, r)
    if res.x3_star is None:
        raise DomainError("near-extremal check needs the xi-equation branch (1 < p < r < 2)")
    phi = optimizer_f0(Point3(0.0, 1.0, res.x3_star), Params(p, r, 1.0))
    return inequality_ratio(phi, p, r, res.c, n_grid)


def b1_b2_cross_check(params: Params, n: int, seed: int | None = 0,
                      threshold: float = 1e-9) -> ProbeReport:
    """B2 >= B1 when (r-2)(r-p) < 0 and B1 >= B2 otherwise, at random points."""
    rng = _rng(seed)
    b2_top = (params.r - 2) * (params.r - params.p) < 0
    worst = _Worst()
    while worst.count < n:
        x = random_point(params, rng)
        try:
            d = eval_b2(x, params) - eval_b1(x, params)
        except BmoSharpError:
            continue
        worst.add(-d if b2_top else d, (x.x1, x.x2, x.x3))
    return ProbeReport("b1_b2_order", worst.count, worst.value, worst.point, threshold,
                       extra={"expected_top": "b2" if b2_top else "b1"})


# ------------------------------------------------------------------ signs

def w_sign_probe(n: int = 50, eps: float = 1.0, s_range=(1.05, 3.95),
                 xi_max: float = 10.0) -> ProbeReport:
    """sign(w_L') = sign(w_R') = sign(s - 2) on an n x n grid of (xi, s)."""
    bad = 0
    worst = None
    total = 0
    for s in np.linspace(*s_range, n):
        want = np.sign(s - 2.0)
        for xi in np.linspace(eps, xi_max * eps, n):
            total += 1
            if np.sign(w_left_deriv(float(xi), float(s), eps)) != want:
                bad += 1
                worst = (float(xi), float(s))
        for xi in np.linspace(0.0, xi_max * eps, n):
            total += 1
            if np.sign(w_right_deriv(float(xi), float(s), eps)) != want:
                bad += 1
                worst = (float(xi), float(s))
    return ProbeReport("w_sign", total, float(bad), worst, 0.5)


def x3_curvature_probe(params: Params, n: int, seed: int | None = 0,
                       rel_step: float = 1e-3, noise: float = 1e-11) -> ProbeReport:
    """Second difference of B2 in x3 has the sign of (r-2)(r-p).

    Wrong-signed differences within ``noise`` of zero are tolerated; the
    count of strictly correct signs is reported.
    """
    params.require_b2()
    rng = _rng(seed)
    want = np.sign((params.r - 2) * (params.r - params.p))
    worst = _Worst()
    strict = 0
    while worst.count < n:
        x = random_point(params, rng)
        if not (1e-3 < x.x2 - x.x1**2 < params.eps**2 * (1 - 1e-3)):
            continue
        lo, hi = x3_bounds(x.xy, params)
        h = rel_step * (hi - lo)
        if not (lo + h < x.x3 < hi - h):
            continue
        f = lambda z: eval_b2(Point3(x.x1, x.x2, z), params)
        d2 = f(x.x3 + h) - 2 * f(x.x3) + f(x.x3 - h)
        if np.sign(d2) == want:
            strict += 1
        worst.add(-want * d2, (x.x1, x.x2, x.x3))
    return ProbeReport("x3_curvature", worst.count, worst.value, worst.point, noise,
                       extra={"strict_sign_matches": strict})


# ------------------------------------------------------------------ optimizers

def _strip_distance(pt: Point2, eps: float) -> float:
    t = pt.x2 - pt.x1 * pt.x1
    return min(t, eps * eps - t)


@dataclass
class OptimizerStats:
    n: int = 0
    moment_error: float = 0.0
    bmo_max: float = 0.0
    curve_min_distance: float = math.inf

    def to_dict(self) -> dict:
        return asdict(self)


# (label, keep right-fan leaves with xi < eps?) ; None keeps every leaf
OPTIMIZER_GROUPS: dict[str, tuple[SubdomainLabel, bool | None]] = {
    "XiL+": (L.XI_L_PLUS, None),
    "XiR+(xi<eps)": (L.XI_R_PLUS, True),
    "XiR+(xi>=eps)": (L.XI_R_PLUS, False),
    "XiCh+": (L.XI_CH_PLUS, None),
    "R": (L.R, None),
    "F0": (L.F0, None),
}


def optimizer_suite(params: Params, n_per_group: int, seed: int | None = 0,
                    n_grid: int = 4000, n_curve: int = 400,
                    groups: Iterable[str] | None = None) -> dict[str, OptimizerStats]:
    """Moments, BMO norm and delivery curve of optimizers at sampled points.

    Moment errors are relative: |moment - target| / max(1, |target|).
    """
    eps = params.eps
    out = {}
    for name in (groups or OPTIMIZER_GROUPS):
        label, small_xi = OPTIMIZER_GROUPS[name]
        acc = None if small_xi is None else (
            lambda x, leaf, want=small_xi: (leaf.xi < eps) == want)
        st = OptimizerStats()
        for x in sample_subdomain(params, label, n_per_group, seed, accept=acc):
            _, phi = optimizer(x, params)
            targets = (x.x1, x.x2, x.x3, eval_b2(x, params))
            got = (moment(phi, 1, signed=True, ctx=params.ctx), moment(phi, 2, ctx=params.ctx),
                   moment(phi, params.p, ctx=params.ctx), moment(phi, params.r, ctx=params.ctx))
            err = max(abs(g - w) / max(1.0, abs(w)) for g, w in zip(got, targets))
            st.moment_error = max(st.moment_error, err)
            st.bmo_max = max(st.bmo_max, bmo_norm(phi, n_grid, params.ctx) / eps)
            dist = min(_strip_distance(q, eps) for q in delivery_curve(phi, n_curve))
            st.curve_min_distance = min(st.curve_min_distance, dist)
            st.n += 1
        out[name] = st
    return out
