"""Special functions m_s, k_s, A, w_L and w_R.

Everything here is scalar and pure. The exponential weights are folded
into Laplace-type integrals

    tail(u, a) = int_0^inf  e^{-t} (u + eps t)^a dt
    head(u, a) = int_0^T    e^{-t} (u - eps t)^a dt,   T = (u - eps)/eps

so that

    m_s(u) = s tail(u, s-1)        k_s(u) = s head(u, s-1).

``tail`` goes through the regularized upper incomplete gamma function and
``head`` through panelled Gauss-Legendre quadrature (the integrand is
analytic on the whole range because u - eps t >= eps).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize, special

from .errors import DomainError, NumericalError, RangeError

INF = math.inf


@dataclass(frozen=True)
class QuadCtx:
    """Tolerances for quadrature and root finding."""

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdiv: int = 200

    def __post_init__(self) -> None:
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_subdiv < 1:
            raise ValueError("max_subdiv must be at least 1")


DEFAULT_CTX = QuadCtx()

_GL_ORDER = 20
_GAMMA_SWITCH = 600.0


@lru_cache(maxsize=4)
def _gl_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def _check_s(s: float) -> None:
    if not s >= 1.0:
        raise DomainError(f"exponent s={s} must be >= 1", violation=1.0 - s)


def _check_eps(eps: float) -> None:
    if not eps > 0:
        raise DomainError(f"eps={eps} must be positive", violation=-eps)


def _panel_gl(f, lo: float, hi: float, panel: float = 1.0) -> float:
    """Composite Gauss-Legendre on [lo, hi] with panels of length <= panel."""
    if hi <= lo:
        return 0.0
    n = max(1, int(math.ceil((hi - lo) / panel)))
    x, w = _gl_rule(_GL_ORDER)
    edges = np.linspace(lo, hi, n + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    t = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    vals = f(t).reshape(n, _GL_ORDER)
    return float(np.sum(half * (vals @ w)))


def _quad(f, lo: float, hi: float, ctx: QuadCtx, what: str) -> float:
    val, err = integrate.quad(f, lo, hi, epsabs=ctx.abs_tol * 1e-2,
                              epsrel=ctx.rel_tol * 1e-2, limit=ctx.max_subdiv)
    if not np.isfinite(val) or err > max(ctx.abs_tol, ctx.rel_tol * abs(val)) * 1e3:
        raise NumericalError(f"quadrature for {what} did not converge", residual=err)
    return val


def _tail(u: float, eps: float, a: float, ctx: QuadCtx) -> float:
    x = u / eps
    if a == 0.0:
        return 1.0
    if a + 1.0 > 0.0 and x < _GAMMA_SWITCH:
        return eps**a * math.exp(x) * special.gamma(a + 1.0) * special.gammaincc(a + 1.0, x)
    if u <= 0.0:
        return INF
    if x >= _GAMMA_SWITCH:
        cap = 40.0 + max(0.0, a) * math.log1p(40.0 / x)
        return _panel_gl(lambda t: np.exp(-t) * (u + eps * t) ** a, 0.0, cap)
    return _quad(lambda t: math.exp(-t) * (u + eps * t) ** a, 0.0, INF, ctx, "tail")


def _head(u: float, eps: float, a: float) -> float:
    T = (u - eps) / eps
    if T <= 0.0:
        return 0.0
    cap = 40.0 + max(0.0, -a) * math.log(max(u / eps, 1.0))
    return _panel_gl(lambda t: np.exp(-t) * (u - eps * t) ** a, 0.0, min(T, cap))


# ---------------------------------------------------------------- m and k

def m(s: float, u: float, eps: float, ctx: QuadCtx = DEFAULT_CTX) -> float:
    """m_s(u) = (s/eps) int_u^inf exp((u-t)/eps) t^{s-1} dt for u >= 0."""
    _check_s(s)
    _check_eps(eps)
    if u < 0:
        raise DomainError(f"m_s needs u >= 0, got {u}", violation=-u)
    return s * _tail(u, eps, s - 1.0, ctx)


def k(s: float, u: float, eps: float, ctx: QuadCtx = DEFAULT_CTX) -> float:
    """k_s(u) = (s/eps) int_eps^u exp((t-u)/eps) t^{s-1} dt for u >= eps."""
    _check_s(s)
    _check_eps(eps)
    if u < eps * (1 - 1e-14):
        raise DomainError(f"k_s needs u >= eps, got u={u}, eps={eps}", violation=eps - u)
    return s * _head(max(u, eps), eps, s - 1.0)


def m_deriv(s: float, u: float, eps: float, order: int = 1,
            ctx: QuadCtx = DEFAULT_CTX) -> float:
    """Derivative of m_s of order 1 or 2.

    Both orders are evaluated by differentiating under the Laplace integral,
    which avoids the cancellation of (m - s u^{s-1})/eps at large u.
    """
    _check_s(s)
    _check_eps(eps)
    if u < 0:
        raise DomainError(f"m_s needs u >= 0, got {u}", violation=-u)
    if order == 1:
        if s == 1.0:
            return 0.0
        return s * (s - 1.0) * _tail(u, eps, s - 2.0, ctx)
    if order == 2:
        c = s * (s - 1.0) * (s - 2.0)
        if c == 0.0:
            return 0.0
        return c * _tail(u, eps, s - 3.0, ctx)
    raise DomainError(f"order must be 1 or 2, got {order}")


def k_deriv(s: float, u: float, eps: float, order: int = 1,
            ctx: QuadCtx = DEFAULT_CTX) -> float:
    """Derivative of k_s of order 1 or 2 (u >= eps)."""
    _check_s(s)
    _check_eps(eps)
    if u < eps * (1 - 1e-14):
        raise DomainError(f"k_s needs u >= eps, got u={u}", violation=eps - u)
    u = max(u, eps)
    edge = math.exp(1.0 - u / eps)
    if order == 1:
        return s * eps ** (s - 2.0) * edge + s * (s - 1.0) * _head(u, eps, s - 2.0)
    if order == 2:
        return (s * (s - 2.0) * eps ** (s - 3.0) * edge
                + s * (s - 1.0) * (s - 2.0) * _head(u, eps, s - 3.0))
    raise DomainError(f"order must be 1 or 2, got {order}")


# ---------------------------------------------------------------- A

def cap_a(alpha: float, beta: float, s: float) -> float:
    """A(alpha, beta, s) = 2((a-b)^s - (a+b)^s + s b (a+b)^{s-1} + s b (a-b)^{s-1}).

    For alpha > 4 beta the four terms nearly cancel, so the equivalent
    integral s(s-1)(s-2) int_{-b}^{b} (b^2 - l^2)(l + a)^{s-3} dl is used
    instead (Gauss-Legendre is exact to rounding there).
    """
    if not beta > 0:
        raise DomainError(f"beta={beta} must be positive", violation=-beta)
    lo = alpha - beta
    if lo < 0 or (lo == 0 and s < 1):
        raise DomainError(f"A needs alpha >= beta, got alpha={alpha}, beta={beta}",
                          violation=-lo)
    if s == 2.0:
        return 0.0
    if alpha > 4.0 * beta:
        x, w = _gl_rule(_GL_ORDER)
        lam = beta * x
        vals = (beta * beta - lam * lam) * (lam + alpha) ** (s - 3.0)
        return float(s * (s - 1.0) * (s - 2.0) * beta * np.dot(w, vals))
    hi = alpha + beta
    lo_pow = lo ** (s - 1.0) if lo > 0 else (1.0 if s == 1.0 else 0.0)
    return 2.0 * (lo**s - hi**s + s * beta * hi ** (s - 1.0) + s * beta * lo_pow)


def cap_a_quad(alpha: float, beta: float, s: float, ctx: QuadCtx = DEFAULT_CTX) -> float:
    """Integral representation of A, evaluated by adaptive quadrature."""
    c = s * (s - 1.0) * (s - 2.0)
    f = lambda lam: (beta * beta - lam * lam) * (lam + alpha) ** (s - 3.0)
    return c * _quad(f, -beta, beta, ctx, "A")


# ---------------------------------------------------------------- w_L

def _w_left_bracket(xi: float, s: float, eps: float, ctx: QuadCtx) -> float:
    return 0.5 * ((xi + eps) ** s - (xi - eps) ** s) - eps * m(s, xi - eps, eps, ctx)


def w_left(xi: float, s: float, eps: float, ctx: QuadCtx = DEFAULT_CTX,
           log_shift: float = 0.0) -> float:
    """exp(log_shift/eps) * w_L(xi; s, eps) for xi in [eps, +inf].

    ``xi = inf`` is a sentinel with value 0. The shift keeps
    exp(u/eps) w_L(xi) finite when both u and xi are large.
    """
    _check_eps(eps)
    if xi == INF:
        return 0.0
    if xi < eps * (1 - 1e-14):
        raise DomainError(f"w_L needs xi >= eps, got {xi}", violation=eps - xi)
    xi = max(xi, eps)
    if s in (1.0, 2.0):
        return 0.0
    return math.exp((log_shift - xi) / eps) * _w_left_bracket(xi, s, eps, ctx)


def w_left_deriv(xi: float, s: float, eps: float, log_shift: float = 0.0) -> float:
    """w_L'(xi) = exp(-xi/eps) A(xi, eps, s) / (4 eps), optionally shifted."""
    if xi == INF:
        return 0.0
    if xi < eps * (1 - 1e-14):
        raise DomainError(f"w_L needs xi >= eps, got {xi}", violation=eps - xi)
    xi = max(xi, eps)
    return math.exp((log_shift - xi) / eps) * cap_a(xi, eps, s) / (4.0 * eps)


def _brent(f, lo: float, hi: float, ctx: QuadCtx, what: str) -> float:
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise NumericalError(f"{what}: root not bracketed", residual=min(abs(flo), abs(fhi)))
    root, info = optimize.brentq(f, lo, hi, xtol=ctx.abs_tol, rtol=1e-15,
                                 maxiter=500, full_output=True, disp=False)
    if not info.converged:
        raise NumericalError(f"{what}: no convergence", residual=abs(f(root)))
    return root


def w_left_inv(y: float, s: float, eps: float, ctx: QuadCtx = DEFAULT_CTX,
               log_shift: float = 0.0, xi_min: float | None = None) -> float:
    """Unique xi in [xi_min, inf] with w_left(xi, log_shift) = y.

    ``xi_min`` defaults to eps. Returns ``inf`` when y == 0.
    """
    if s == 2.0:
        raise DomainError("w_L is identically zero for s = 2")
    lo = eps if xi_min is None else max(xi_min, eps)
    if y == 0.0:
        return INF
    g = lambda xi: w_left(xi, s, eps, ctx, log_shift) - y
    top = w_left(lo, s, eps, ctx, log_shift)
    # w_L is monotone with limit 0, so y must lie between top and 0
    if not (min(top, 0.0) <= y <= max(top, 0.0)):
        slack = 1e-13 * max(abs(top), abs(y), 1e-300)
        if abs(y - top) <= slack:
            return lo
        raise RangeError(f"y={y} outside range of w_L on [{lo}, inf]",
                         attained=(min(top, 0.0), max(top, 0.0)))
    if y == top:
        return lo
    step = eps
    hi = lo + step
    while g(hi) * (top - y) > 0:
        step *= 2.0
        hi = lo + step
        if step > 1e4 * eps + 1e4 * abs(log_shift):
            return INF
    return _brent(g, lo, hi, ctx, "w_left_inv")


# ---------------------------------------------------------------- w_R

def w_right(xi: float, s: float, eps: float, ctx: QuadCtx = DEFAULT_CTX,
            log_shift: float = 0.0) -> float:
    """exp(log_shift/eps) * w_R(xi; s, eps) for xi >= 0."""
    _check_eps(eps)
    if xi < 0:
        raise DomainError(f"w_R needs xi >= 0, got {xi}", violation=-xi)
    if xi <= eps:
        # w_R(0) = 0, so integrate w_R' (analytic on [0, eps]); the closed
        # form eps (k(xi+eps) - 2 xi (xi+eps)^{s-2}) cancels for small xi
        if xi == 0.0 or s == 2.0:
            return 0.0
        x, w = _gl_rule(_GL_ORDER)
        t = 0.5 * xi * (x + 1.0)
        vals = np.exp((t + log_shift) / eps) * (t * t + eps * eps) * (t + eps) ** (s - 3.0)
        return float((s - 2.0) * 0.5 * xi * np.dot(w, vals))
    scale = math.exp((xi + log_shift) / eps)
    kk = k(s, xi + eps, eps, ctx)
    return scale * (0.5 * ((xi - eps) ** s - (xi + eps) ** s) + eps * kk)


def w_right_deriv(xi: float, s: float, eps: float, log_shift: float = 0.0) -> float:
    """Derivative of w_R; equals exp(2 xi/eps) w_L'(xi) for xi >= eps."""
    if xi < 0:
        raise DomainError(f"w_R needs xi >= 0, got {xi}", violation=-xi)
    if xi <= eps:
        return (math.exp((xi + log_shift) / eps) * (s - 2.0)
                * (xi * xi + eps * eps) * (xi + eps) ** (s - 3.0))
    return math.exp((xi + log_shift) / eps) * cap_a(xi, eps, s) / (4.0 * eps)


def w_right_inv(y: float, s: float, eps: float, ctx: QuadCtx = DEFAULT_CTX,
                log_shift: float = 0.0, xi_max: float | None = None) -> float:
    """Unique xi in [0, xi_max] with w_right(xi, log_shift) = y.

    Without ``xi_max`` the bracket is grown by doubling.
    """
    if s == 2.0:
        raise DomainError("w_R is identically zero for s = 2")
    g = lambda xi: w_right(xi, s, eps, ctx, log_shift) - y
    lo_val = w_right(0.0, s, eps, ctx, log_shift)
    if y == lo_val:
        return 0.0
    sgn = 1.0 if s > 2 else -1.0
    if sgn * (y - lo_val) < 0:
        if abs(y - lo_val) <= 1e-13 * max(abs(y), abs(lo_val), 1e-300):
            return 0.0
        raise RangeError(f"y={y} below the range of w_R", attained=(lo_val, lo_val))
    if xi_max is not None:
        hi_val = w_right(xi_max, s, eps, ctx, log_shift)
        if sgn * (y - hi_val) > 0:
            if abs(y - hi_val) <= 1e-13 * max(abs(y), abs(hi_val), 1e-300):
                return xi_max
            lo_r, hi_r = sorted((lo_val, hi_val))
            raise RangeError(f"y={y} outside range of w_R on [0, {xi_max}]",
                             attained=(lo_r, hi_r))
        return _brent(g, 0.0, xi_max, ctx, "w_right_inv")
    hi = eps
    while sgn * g(hi) < 0:
        hi *= 2.0
        if hi > 1e6 * eps:
            raise RangeError(f"y={y} not attained by w_R")
    return _brent(g, 0.0, hi, ctx, "w_right_inv")
