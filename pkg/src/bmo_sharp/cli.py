"""Command-line front end.

Every command prints one document to stdout: JSON with the keys
``command``, ``params``, ``result`` and ``diagnostics``, a CSV table, or plain
text. Exit codes: 0 success, 2 usage, 3 domain error, 4 numerical failure.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
import warnings
from typing import Any, Callable

import click
import numpy as np

from . import __version__
from .bellman import (candidate_for, eval_b1, eval_b2, leaf_coords_b1, leaf_coords_b2,
                      grad_b2)
from .domain import Params, Point2, Point3, classify_b1, classify_b2, classify_omega2
from .errors import DomainError, NumericalError, ParameterError
from .optimizer import bmo_norm, moment, optimizer
from .sharp_constant import constant, ratio_profile
from .special_fn import QuadCtx
from . import verify as vf

EXIT_USAGE, EXIT_DOMAIN, EXIT_NUMERICAL = 2, 3, 4
SCAN_HEADER = ["p", "r", "C", "branch", "xi_star"]


# ------------------------------------------------------------------ output

def _plain(obj: Any) -> Any:
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if hasattr(obj, "value") and not isinstance(obj, (int, float, str)):
        return obj.value
    return obj


def _rows_csv(header: list[str], rows: list[list[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                    for v in row])
    return buf.getvalue()


def _flatten(prefix: str, obj: Any, out: list[tuple[str, Any]]) -> None:
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif isinstance(obj, list) and obj and isinstance(obj[0], (dict, list)):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}[{i}]", v, out)
    else:
        out.append((prefix, obj))


def emit(fmt: str, command: str, params: dict, result: Any, diagnostics: dict | None = None,
         table: tuple[list[str], list[list[Any]]] | None = None) -> None:
    doc = _plain({"command": command, "params": params, "result": result,
                  "diagnostics": diagnostics or {}})
    if fmt == "json":
        click.echo(json.dumps(doc, sort_keys=True, indent=2))
    elif fmt == "csv":
        if table is None:
            pairs: list[tuple[str, Any]] = []
            _flatten("", doc["result"], pairs)
            table = (["key", "value"], [[k, v] for k, v in pairs])
        click.echo(_rows_csv(*table), nl=False)
    else:
        pairs = []
        _flatten("", doc["result"], pairs)
        width = max((len(k) for k, _ in pairs), default=0)
        click.echo(f"# {command}")
        for k, v in pairs:
            click.echo(f"{k.ljust(width)}  {v}")


# ------------------------------------------------------------------ shared flags

def _shared(f: Callable) -> Callable:
    opts = [
        click.option("--p", "p", type=float, required=True, help="Lower exponent p >= 1."),
        click.option("--r", "r", type=float, required=True, help="Upper exponent r > p."),
        click.option("--eps", type=float, default=1.0, show_default=True, help="BMO radius."),
        click.option("--tol", type=click.FloatRange(min=1e-15, max=1e-3), default=1e-10,
                     show_default=True, help="Relative quadrature tolerance."),
        click.option("--format", "fmt", type=click.Choice(["json", "csv", "text"]),
                     default="json", show_default=True),
        click.option("--seed", type=int, default=0, show_default=True),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def _point_opts(f: Callable) -> Callable:
    for name in ("--x3", "--x2", "--x1"):
        f = click.option(name, type=float, required=True)(f)
    return f


def _params(p: float, r: float, eps: float, tol: float) -> Params:
    return Params(p, r, eps, QuadCtx(abs_tol=min(1e-12, tol), rel_tol=tol))


def _param_doc(p, r, eps, tol, seed, **extra) -> dict:
    d = {"p": p, "r": r, "eps": eps, "tol": tol, "seed": seed}
    d.update(extra)
    return d


def _leaf_doc(leaf) -> dict:
    d = {"kind": type(leaf).__name__}
    d.update({k: getattr(leaf, k) for k in leaf.__dataclass_fields__})
    return d


# ------------------------------------------------------------------ commands

@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="bmo-sharp")
def main() -> None:
    """Sharp BMO interpolation constants and the Bellman functions behind them."""


@main.command("constant")
@_shared
def cmd_constant(p, r, eps, tol, fmt, seed):
    """Sharp constant C(p, r)."""
    ctx = QuadCtx(abs_tol=min(1e-12, tol), rel_tol=tol)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = constant(p, r, ctx)
    d = res.to_dict()
    emit(fmt, "constant", _param_doc(p, r, eps, tol, seed), d,
         {"warnings": [str(w.message) for w in caught]},
         table=(SCAN_HEADER, [[p, r, res.c, res.branch.value, res.xi_star]]))


def _fd_grad_b1(x: Point3, params: Params) -> tuple[float, float]:
    h2, h3 = 1e-6 * (1 + abs(x.x2)), 1e-6 * (1 + abs(x.x3))
    f = lambda a, b: eval_b1(Point3(x.x1, a, b), params)
    return ((f(x.x2 + h2, x.x3) - f(x.x2 - h2, x.x3)) / (2 * h2),
            (f(x.x2, x.x3 + h3) - f(x.x2, x.x3 - h3)) / (2 * h3))


@main.command("eval")
@_shared
@_point_opts
@click.option("--which", type=click.Choice(["max", "min"]), default="max", show_default=True)
@click.option("--candidate", type=click.Choice(["b1", "b2"]), default=None,
              help="Force a candidate instead of the max/min dispatch.")
def cmd_eval(p, r, eps, tol, fmt, seed, x1, x2, x3, which, candidate):
    """Bellman value, subdomain, leaf and gradient at (x1, x2, x3)."""
    params = _params(p, r, eps, tol)
    x = Point3(x1, x2, x3)
    cand = candidate or candidate_for(params, which)
    if cand == "b2":
        label, leaf = leaf_coords_b2(x, params)
        value = eval_b2(x, params)
        g2, g3 = grad_b2(x, params)
    else:
        label, leaf = leaf_coords_b1(x, params)
        value = eval_b1(x, params)
        g2, g3 = _fd_grad_b1(x, params)
    result = {"value": value, "candidate": cand, "label": label.value, "leaf": _leaf_doc(leaf),
              "gradient": {"d_dx2": g2, "d_dx3": g3}}
    emit(fmt, "eval", _param_doc(p, r, eps, tol, seed, x1=x1, x2=x2, x3=x3, which=which), result)


@main.command("classify")
@_shared
@_point_opts
def cmd_classify(p, r, eps, tol, fmt, seed, x1, x2, x3):
    """Planar region and foliation subdomains of a point."""
    params = _params(p, r, eps, tol)
    x = Point3(x1, x2, x3)
    result = {"omega": int(classify_omega2(Point2(x1, x2), eps)),
              "b1": classify_b1(x, params).value,
              "b2": None if p == 2 or r == 2 else classify_b2(x, params).value}
    emit(fmt, "classify", _param_doc(p, r, eps, tol, seed, x1=x1, x2=x2, x3=x3), result)


@main.command("optimizer")
@_shared
@_point_opts
@click.option("--n-grid", type=click.IntRange(min=2), default=4000, show_default=True)
def cmd_optimizer(p, r, eps, tol, fmt, seed, x1, x2, x3, n_grid):
    """Extremal test function at x with its verified moments and BMO norm."""
    params = _params(p, r, eps, tol)
    x = Point3(x1, x2, x3)
    label, phi = optimizer(x, params)
    moments = {"mean": moment(phi, 1, signed=True, ctx=params.ctx),
               "second": moment(phi, 2, ctx=params.ctx),
               "p": moment(phi, p, ctx=params.ctx), "r": moment(phi, r, ctx=params.ctx)}
    result = {"label": label.value, "function": phi.to_dict(), "moments": moments,
              "target": {"x1": x1, "x2": x2, "x3": x3, "B2": eval_b2(x, params)},
              "bmo_norm": bmo_norm(phi, n_grid, params.ctx)}
    emit(fmt, "optimizer", _param_doc(p, r, eps, tol, seed, x1=x1, x2=x2, x3=x3, n_grid=n_grid),
         result)


@main.command("profile")
@_shared
@click.option("--n", type=click.IntRange(min=3), default=21, show_default=True)
def cmd_profile(p, r, eps, tol, fmt, seed, n):
    """B(0, 1, x3)/x3 across the zero-mean x3 window."""
    ctx = QuadCtx(abs_tol=min(1e-12, tol), rel_tol=tol)
    rows = ratio_profile(p, r, n, ctx)
    emit(fmt, "profile", _param_doc(p, r, eps, tol, seed, n=n),
         [{"x3": a, "ratio": b} for a, b in rows], table=(["x3", "ratio"], [list(t) for t in rows]))


SUITES = ("concavity", "smooth", "envelope", "mc", "optimizer", "signs")


@main.command("verify")
@_shared
@click.option("--suite", type=click.Choice(("all",) + SUITES), default="all", show_default=True)
@click.option("--n", type=click.IntRange(min=1), default=None,
              help="Sample count (suite-specific default).")
def cmd_verify(p, r, eps, tol, fmt, seed, suite, n):
    """Run numerical verification suites and report pass/fail."""
    params = _params(p, r, eps, tol)
    chosen = SUITES if suite == "all" else (suite,)
    reports: dict[str, Any] = {}
    for s in chosen:
        if s == "concavity":
            reports[s] = vf.concavity_probe(params, n or 500, seed).to_dict()
        elif s == "smooth":
            reports[s] = {k: v.to_dict() for k, v in vf.smoothness_probe(params, n or 10, seed).items()}
        elif s == "envelope":
            size = n or 60
            reports[s] = {w: vf.envelope_check(p, w, eps, n=size, margin=max(1, size // 20)).to_dict()
                          for w in ("max", "min")}
        elif s == "mc":
            if 1 <= p < r <= 2:
                reports[s] = vf.inequality_monte_carlo(p, r, n or 200, seed).to_dict()
            else:
                reports[s] = {"skipped": "inequality constant is checked only for 1 <= p < r <= 2"}
        elif s == "optimizer":
            reports[s] = {k: v.to_dict() for k, v in
                          vf.optimizer_suite(params, n or 3, seed, n_grid=1000).items()}
        elif s == "signs":
            reports[s] = {"w_sign": vf.w_sign_probe().to_dict(),
                          "x3_curvature": vf.x3_curvature_probe(params, n or 100, seed).to_dict()}
    emit(fmt, "verify", _param_doc(p, r, eps, tol, seed, suite=suite, n=n), reports)


@main.command("scan")
@click.option("--p-min", type=float, required=True)
@click.option("--p-max", type=float, required=True)
@click.option("--p-steps", type=click.IntRange(min=1), default=5, show_default=True)
@click.option("--r-min", type=float, required=True)
@click.option("--r-max", type=float, required=True)
@click.option("--r-steps", type=click.IntRange(min=1), default=5, show_default=True)
@click.option("--tol", type=click.FloatRange(min=1e-15, max=1e-3), default=1e-10, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv", "text"]), default="csv",
              show_default=True)
def cmd_scan(p_min, p_max, p_steps, r_min, r_max, r_steps, tol, fmt):
    """C(p, r) over a grid; pairs with r <= p are skipped."""
    ctx = QuadCtx(abs_tol=min(1e-12, tol), rel_tol=tol)
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for p in np.linspace(p_min, p_max, p_steps):
            for r in np.linspace(r_min, r_max, r_steps):
                p_, r_ = float(p), float(r)
                if r_ <= p_ or p_ < 1:
                    continue
                res = constant(p_, r_, ctx)
                rows.append([p_, r_, res.c, res.branch.value, res.xi_star])
    emit(fmt, "scan", {"p": [p_min, p_max, p_steps], "r": [r_min, r_max, r_steps], "tol": tol},
         [dict(zip(SCAN_HEADER, row)) for row in rows], table=(SCAN_HEADER, rows))


# ------------------------------------------------------------------ entry point

def run(argv: list[str] | None = None) -> int:
    """Run the CLI and return its exit code instead of exiting."""
    try:
        main.main(args=argv, prog_name="bmo-sharp", standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.UsageError as e:
        e.show()
        return EXIT_USAGE
    except click.Abort:
        return 1
    except ParameterError as e:
        click.echo(f"error: {e}", err=True)
        return EXIT_USAGE
    except DomainError as e:
        click.echo(f"domain error: {e}", err=True)
        return EXIT_DOMAIN
    except (NumericalError, ArithmeticError) as e:
        click.echo(f"numerical failure: {e}", err=True)
        return EXIT_NUMERICAL
    return 0


def entry() -> None:
    sys.exit(run())
