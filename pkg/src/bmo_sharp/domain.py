"""Geometry of the parabolic strip and the three-dimensional Bellman domain.

The strip is x1^2 <= x2 <= x1^2 + eps^2. Over each of its points the
admissible x3 lie between the two boundary envelopes ``am`` and ``ak``.
Points with x1 < 0 are handled through the mirror (x1, x2, x3) -> (-x1, x2, x3).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import DomainError, ParameterError
from .special_fn import DEFAULT_CTX, QuadCtx, k, m


@dataclass(frozen=True)
class Params:
    """Exponents p < r, BMO radius eps and numerical tolerances."""

    p: float
    r: float
    eps: float = 1.0
    ctx: QuadCtx = field(default=DEFAULT_CTX, compare=False)

    def __post_init__(self) -> None:
        if not self.p >= 1.0:
            raise ParameterError(f"p={self.p} must be >= 1")
        if not self.r > self.p:
            raise ParameterError(f"r={self.r} must exceed p={self.p}")
        if not self.eps > 0:
            raise ParameterError(f"eps={self.eps} must be positive")

    def require_b2(self) -> None:
        if self.p == 2.0 or self.r == 2.0:
            raise ParameterError("B2 is only defined for p != 2 and r != 2")


@dataclass(frozen=True)
class Point2:
    x1: float
    x2: float


@dataclass(frozen=True)
class Point3:
    x1: float
    x2: float
    x3: float

    @property
    def xy(self) -> Point2:
        return Point2(self.x1, self.x2)

    def mirrored(self) -> "Point3":
        return Point3(-self.x1, self.x2, self.x3)


@dataclass(frozen=True)
class Geometry:
    """d = sqrt(x1^2 + eps^2 - x2) and the tangent data derived from it."""

    d: float
    delta_minus: float
    delta_plus: float
    u_plus: float
    u_minus: float


class OmegaLabel(int, enum.Enum):
    """Index i of the planar region omega_i, i in -4..4."""

    W_M4 = -4
    W_M3 = -3
    W_M2 = -2
    W_M1 = -1
    W0 = 0
    W1 = 1
    W2 = 2
    W3 = 3
    W4 = 4


class SubdomainLabel(str, enum.Enum):
    XI_L_PLUS = "XiL+"
    XI_L_MINUS = "XiL-"
    XI_R_PLUS = "XiR+"
    XI_R_MINUS = "XiR-"
    XI_CH_PLUS = "XiCh+"
    XI_CH_MINUS = "XiCh-"
    F0 = "F0"
    R = "R"
    XI0 = "Xi0"
    XI_PLUS = "Xi+"
    XI_MINUS = "Xi-"

    def mirrored(self) -> "SubdomainLabel":
        v = self.value
        if v.endswith("+"):
            return SubdomainLabel(v[:-1] + "-")
        if v.endswith("-"):
            return SubdomainLabel(v[:-1] + "+")
        return self

    @property
    def positive(self) -> "SubdomainLabel":
        return self.mirrored() if self.value.endswith("-") else self


def _geom_tol(x2: float) -> float:
    return 1e-12 * (1.0 + abs(x2))


def strip_violation(pt: Point2, eps: float) -> float:
    """Signed distance-like violation: positive means outside the strip."""
    return max(pt.x1 * pt.x1 - pt.x2, pt.x2 - pt.x1 * pt.x1 - eps * eps)


def in_strip(pt: Point2, eps: float, slack: float | None = None) -> bool:
    tol = _geom_tol(pt.x2) if slack is None else slack
    return strip_violation(pt, eps) <= tol


def geometry(pt: Point2, eps: float) -> Geometry:
    """Tangent parameters of a strip point; raises DomainError outside."""
    viol = strip_violation(pt, eps)
    if viol > _geom_tol(pt.x2):
        raise DomainError(f"({pt.x1}, {pt.x2}) is outside the strip for eps={eps}",
                          violation=viol)
    d = math.sqrt(min(max(pt.x1 * pt.x1 + eps * eps - pt.x2, 0.0), eps * eps))
    dm = eps - d
    return Geometry(d=d, delta_minus=dm, delta_plus=eps + d,
                    u_plus=pt.x1 - dm, u_minus=pt.x1 + dm)


def am(pt: Point2, p: float, eps: float, ctx: QuadCtx = DEFAULT_CTX) -> float:
    """Envelope built from left tangents and the angle m_p(0) x2 / (2 eps)."""
    g = geometry(pt, eps)
    a = abs(pt.x1)
    if a <= eps and pt.x2 >= 2.0 * eps * a:
        return m(p, 0.0, eps, ctx) * pt.x2 / (2.0 * eps)
    u = max(a - g.delta_minus, 0.0)
    return u**p + m(p, u, eps, ctx) * g.delta_minus


def ak(pt: Point2, p: float, eps: float, ctx: QuadCtx = DEFAULT_CTX) -> float:
    """Envelope built from right tangents and the cup x2^{p/2}."""
    g = geometry(pt, eps)
    if pt.x2 <= eps * eps:
        return max(pt.x2, 0.0) ** (p / 2.0)
    u = max(abs(pt.x1) + g.delta_minus, eps)
    return u**p - k(p, u, eps, ctx) * g.delta_minus


def x3_bounds(pt: Point2, params: Params) -> tuple[float, float]:
    """Admissible x3 range over a strip point, as (lo, hi)."""
    a = am(pt, params.p, params.eps, params.ctx)
    b = ak(pt, params.p, params.eps, params.ctx)
    return (a, b) if a <= b else (b, a)


def x3_slack(lo: float, hi: float) -> float:
    return 1e-10 * (1.0 + abs(lo) + abs(hi))


def check_point3(x: Point3, params: Params) -> tuple[float, float]:
    lo, hi = x3_bounds(x.xy, params)
    tol = x3_slack(lo, hi)
    if x.x3 < lo - tol or x.x3 > hi + tol:
        viol = max(lo - x.x3, x.x3 - hi)
        raise DomainError(f"x3={x.x3} outside [{lo}, {hi}] over ({x.x1}, {x.x2})",
                          violation=viol)
    return lo, hi


def classify_omega2(pt: Point2, eps: float) -> OmegaLabel:
    """Planar region index; ties go to the smaller |index|."""
    geometry(pt, eps)
    a, x2 = abs(pt.x1), pt.x2
    e2 = eps * eps
    if 2 * eps * a <= x2 <= e2:
        i = 0
    elif x2 >= e2 and x2 >= 2 * eps * a and a <= eps:
        i = 1
    elif x2 <= e2 and x2 <= 2 * eps * a:
        i = 2
    elif e2 <= x2 <= 2 * eps * a:
        i = 3
    else:
        i = 4
    return OmegaLabel(-i if pt.x1 < 0 else i)


# ------------------------------------------------------------------ B2 ladder

def chord_left(g: Geometry, x1: float, p: float, eps: float) -> float:
    """Value on the chord [U(x1 - D-), U(x1 + D+)] at abscissa x1."""
    return (g.delta_minus * (x1 + g.delta_plus) ** p
            + g.delta_plus * max(x1 - g.delta_minus, 0.0) ** p) / (2 * eps)


def chord_right(g: Geometry, x1: float, p: float, eps: float) -> float:
    """Value on the chord [U(x1 - D+), U(x1 + D-)] at abscissa x1."""
    return (g.delta_minus * max(x1 - g.delta_plus, 0.0) ** p
            + g.delta_plus * (x1 + g.delta_minus) ** p) / (2 * eps)


def ladder(pt: Point2, params: Params) -> list[tuple[SubdomainLabel, float]]:
    """Subdomains over a point with x1 >= 0, from the am side to the ak side.

    Each entry is (label, upper separating value); the last separating value
    is the ak envelope. Consecutive labels share the listed surface.
    """
    p, eps = params.p, params.eps
    x1, x2 = abs(pt.x1), pt.x2
    g = geometry(Point2(x1, x2), eps)
    top = ak(Point2(x1, x2), p, eps, params.ctx)
    w = abs(int(classify_omega2(Point2(x1, x2), eps)))
    L = SubdomainLabel
    if w == 0:
        return [(L.F0, (2 * eps) ** (p - 2) * x2), (L.R, top)]
    if w == 1:
        return [(L.F0, (2 * eps) ** (p - 2) * x2),
                (L.R, (x1 + g.delta_minus) ** (p - 2) * x2),
                (L.XI_R_PLUS, top)]
    cl = chord_left(g, x1, p, eps)
    if w == 2:
        return [(L.XI_L_PLUS, cl), (L.XI_CH_PLUS, x2 ** (p - 1) * x1 ** (2 - p)),
                (L.R, top)]
    if w == 3:
        return [(L.XI_L_PLUS, cl), (L.XI_CH_PLUS, x2 ** (p - 1) * x1 ** (2 - p)),
                (L.R, (x1 + g.delta_minus) ** (p - 2) * x2), (L.XI_R_PLUS, top)]
    return [(L.XI_L_PLUS, cl), (L.XI_CH_PLUS, chord_right(g, x1, p, eps)),
            (L.XI_R_PLUS, top)]


def on_skeleton(pt: Point2, eps: float) -> bool:
    return pt.x2 - pt.x1 * pt.x1 <= _geom_tol(pt.x2)


def classify_b2(x: Point3, params: Params) -> SubdomainLabel:
    """Foliation subdomain of B2 containing x.

    Ties on a separating surface go to the subdomain nearer the ak envelope
    (first in the top-down listing). Skeleton points other than the origin
    are assigned to the degenerate chord.
    """
    params.require_b2()
    check_point3(x, params)
    pos = Point2(abs(x.x1), x.x2)
    if on_skeleton(pos, params.eps):
        lab = SubdomainLabel.R if pos.x1 == 0.0 else SubdomainLabel.XI_CH_PLUS
    else:
        sgn = 1.0 if params.p < 2 else -1.0
        z = sgn * x.x3
        steps = ladder(pos, params)
        lab = steps[-1][0]
        for label, upper in steps[:-1]:
            if z < sgn * upper:
                lab = label
                break
    return lab.mirrored() if x.x1 < 0 else lab


def classify_b1(x: Point3, params: Params) -> SubdomainLabel:
    """Xi0 (trapezoid leaves) or Xi+/Xi- (triangle leaves) for B1."""
    check_point3(x, params)
    p, eps = params.p, params.eps
    a = abs(x.x1)
    if (a <= 2 * eps and x.x2 >= 4 * eps * a - 3 * eps * eps
            and (p - 2) * (x.x3 - eps**p - (x.x2 - eps * eps) / (4 * eps)
                           * m(p, eps, eps, params.ctx)) >= 0):
        return SubdomainLabel.XI0
    return SubdomainLabel.XI_MINUS if x.x1 < 0 else SubdomainLabel.XI_PLUS
