"""The sharp constant C(p, r) of the BMO interpolation inequality

    ||phi||_r <= C ||phi||_p^{p/r} ||phi||_BMO^{1-p/r}

and its multidimensional variants. Everything here uses eps = 1; C is scale-free.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .bellman import eval_bellman
from .domain import Params, Point3
from .errors import NumericalError, ParameterError
from .special_fn import DEFAULT_CTX, QuadCtx, cap_a, w_left

_MARGIN = 1e-6
_XI_CAP = 1e100


class Branch(str, enum.Enum):
    GAMMA_FORMULA = "gamma_formula"
    P1_SMALL_R = "p1_small_r"
    XI_EQUATION = "xi_equation"


@dataclass(frozen=True)
class ConstantResult:
    c: float
    branch: Branch
    xi_star: float | None = None
    x3_star: float | None = None
    warning: str | None = None

    def to_dict(self) -> dict:
        return {"C": self.c, "branch": self.branch.value, "xi_star": self.xi_star,
                "x3_star": self.x3_star, "warning": self.warning}


def _check(p: float, r: float) -> None:
    if not p >= 1.0:
        raise ParameterError(f"p={p} must be >= 1")
    if not r > p:
        raise ParameterError(f"r={r} must exceed p={p}")


def _shifted_w(xi: float, s: float, ctx: QuadCtx) -> float:
    # e * w_L(xi; s, 1)
    return w_left(xi, s, 1.0, ctx, log_shift=1.0)


def profile_ratio_at(xi: float, p: float, r: float, ctx: QuadCtx = DEFAULT_CTX) -> float:
    """B(0, 1, x3)/x3 along the leaf parameter xi of the zero-mean slice."""
    num = special.gamma(r + 1) + _shifted_w(xi, r, ctx)
    den = special.gamma(p + 1) + _shifted_w(xi, p, ctx)
    return num / den


def xi_equation_residual(xi: float, p: float, r: float, ctx: QuadCtx = DEFAULT_CTX) -> float:
    """Slope ratio A(xi,1,r)/A(xi,1,p) minus the value ratio at xi.

    Its root is the stationary point of B(0, 1, x3)/x3 on the zero-mean slice.
    """
    if not (1.0 < p < r < 2.0):
        raise ParameterError("the xi-equation needs 1 < p < r < 2")
    if not xi >= 1.0:
        raise ParameterError(f"xi={xi} must be >= 1")
    return cap_a(xi, 1.0, r) / cap_a(xi, 1.0, p) - profile_ratio_at(xi, p, r, ctx)


def _gamma_constant(p: float, r: float) -> float:
    return math.exp((special.gammaln(r + 1) - special.gammaln(p + 1)) / r)


def _solve_xi(p: float, r: float, ctx: QuadCtx) -> float:
    f = lambda xi: xi_equation_residual(xi, p, r, ctx)
    lo, hi = 1.0 + 1e-6, 4.0
    f_lo = f(lo)
    f_hi = f(hi)
    while f_lo * f_hi > 0:
        if hi >= _XI_CAP:
            raise NumericalError(
                f"xi-equation not bracketed on [{lo}, {hi}]: residuals {f_lo:.3e}, {f_hi:.3e}",
                residual=min(abs(f_lo), abs(f_hi)))
        lo, f_lo = hi, f_hi
        hi *= 2.0
        f_hi = f(hi)
    return optimize.brentq(f, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=500)


def constant(p: float, r: float, ctx: QuadCtx = DEFAULT_CTX) -> ConstantResult:
    """Sharp constant C(p, r) with the branch used to compute it."""
    _check(p, r)
    if r >= 2.0:
        return ConstantResult(_gamma_constant(p, r), Branch.GAMMA_FORMULA)
    if p == 1.0:
        return ConstantResult(2.0 ** (1.0 - 1.0 / r), Branch.P1_SMALL_R)
    if 2.0 - r <= _MARGIN:
        msg = f"r={r} is within {_MARGIN} of 2; using the r = 2 limit formula"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        return ConstantResult(_gamma_constant(p, r), Branch.GAMMA_FORMULA, warning=msg)
    xi = _solve_xi(p, r, ctx)
    x3 = 0.5 * (special.gamma(p + 1) + _shifted_w(xi, p, ctx))
    cr = 0.5 * (special.gamma(r + 1) + _shifted_w(xi, r, ctx)) / x3
    return ConstantResult(cr ** (1.0 / r), Branch.XI_EQUATION, xi_star=xi, x3_star=x3)


def zero_mean_window(p: float) -> tuple[float, float]:
    """Ends of the x3 range over (0, 1): the value 2^{p-2} and Gamma(p+1)/2."""
    return 2.0 ** (p - 2.0), 0.5 * special.gamma(p + 1)


def ratio_profile(p: float, r: float, n: int, ctx: QuadCtx = DEFAULT_CTX) -> list[tuple[float, float]]:
    """Samples (x3, B(0,1,x3)/x3) over the zero-mean window, ordered by x3."""
    if not (1.0 < p < r < 2.0):
        raise ParameterError("ratio_profile needs 1 < p < r < 2")
    if n < 3:
        raise ParameterError("ratio_profile needs n >= 3")
    params = Params(p, r, 1.0, ctx)
    lo, hi = sorted(zero_mean_window(p))
    out = []
    for x3 in np.linspace(lo, hi, n):
        x3 = float(x3)
        out.append((x3, eval_bellman(Point3(0.0, 1.0, x3), params, "max") / x3))
    return out


def cube_factor(n: int) -> float:
    """4(1 + 2 sqrt(n-1)): the dimensional factor for cubes and the torus."""
    if n < 1:
        raise ParameterError("dimension must be >= 1")
    return 4.0 * (1.0 + 2.0 * math.sqrt(n - 1))


def multidim_cube_constant(p: float, r: float, n: int, ctx: QuadCtx = DEFAULT_CTX) -> float:
    return constant(p, r, ctx).c * cube_factor(n) ** (1.0 - p / r)


def multidim_ball_constant(p: float, r: float, n: int, c_tilde: float,
                           ctx: QuadCtx = DEFAULT_CTX) -> float:
    """Ball-based constant; ``c_tilde`` is the caller's absolute constant."""
    if n < 1:
        raise ParameterError("dimension must be >= 1")
    if not c_tilde > 0:
        raise ParameterError("c_tilde must be positive")
    return constant(p, r, ctx).c * c_tilde * n ** ((r - p) / (2.0 * r))
