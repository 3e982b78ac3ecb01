"""Bracketing maximizers for key rates over the mean photon number and chi.

The scalar path is a coarse pre-scan followed by Brent's method (golden
section with parabolic steps). The bivariate path runs coordinate ascent
over the scalar path and falls back to a bounded Nelder-Mead simplex when the
coordinate sweeps fail to settle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import optimize as _sciopt

__all__ = [
    "DEFAULT_BOUNDS",
    "GOLDEN",
    "OptimizeDirective",
    "OptimizeResult",
    "maximize_scalar",
    "maximize_bivariate",
    "maximize",
    "golden_iteration_bound",
]

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0  # 0.618...
_CGOLD = 1.0 - GOLDEN
_SQRT_EPS = math.sqrt(np.finfo(float).eps)

DEFAULT_BOUNDS = {"mu": (1e-6, 2.0), "chi": (1e-6, 1.5)}


@dataclass(frozen=True)
class OptimizeDirective:
    variables: tuple[str, ...] = ("mu",)
    bounds: Mapping[str, tuple[float, float]] = field(default_factory=lambda: dict(DEFAULT_BOUNDS))
    tolerance: float = 1e-7
    max_evals: int = 500

    def __post_init__(self):
        if not self.variables:
            raise ValueError("directive needs at least one variable")
        for var in self.variables:
            if var not in self.bounds:
                raise ValueError(f"no bounds given for {var!r}")
            lo, hi = self.bounds[var]
            if not lo < hi:
                raise ValueError(f"bounds for {var!r} must satisfy lower < upper, got ({lo}, {hi})")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if self.max_evals < 4:
            raise ValueError("max_evals must be >= 4")

    def restricted(self, available: Sequence[str]) -> "OptimizeDirective | None":
        """Same directive limited to the variables a protocol actually has."""
        keep = tuple(v for v in self.variables if v in available)
        if not keep:
            return None
        return OptimizeDirective(keep, self.bounds, self.tolerance, self.max_evals)

    def describe(self) -> str:
        parts = [f"{v}[{self.bounds[v][0]!r},{self.bounds[v][1]!r}]" for v in self.variables]
        return f"{'+'.join(parts)} tol={self.tolerance!r} max_evals={self.max_evals}"


@dataclass(frozen=True)
class OptimizeResult:
    x: float | tuple[float, float]
    value: float
    evals: int
    iterations: int
    converged: bool


class _BudgetExhausted(Exception):
    pass


class _Tracked:
    """Counts evaluations and remembers the best point (smallest argument on ties)."""

    def __init__(self, f, budget):
        self.f = f
        self.budget = budget
        self.evals = 0
        self.best_x = None
        self.best_v = -math.inf

    def __call__(self, x):
        if self.evals >= self.budget:
            raise _BudgetExhausted
        self.evals += 1
        v = float(self.f(x))
        if math.isnan(v):
            v = -math.inf
        if (
            self.best_x is None
            or v > self.best_v
            or (v == self.best_v and _key(x) < _key(self.best_x))
        ):
            self.best_x, self.best_v = x, v
        return v


def _key(x):
    return x if isinstance(x, tuple) else (x,)


def golden_iteration_bound(width: float, tol: float) -> int:
    """Iterations golden section needs to shrink ``width`` below ``tol``."""
    return math.ceil(math.log(width / tol) / math.log(1.0 / GOLDEN))


def _golden(f, a, b, tol):
    """Plain golden-section search for a maximum on [a, b]; returns iterations."""
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while b - a > tol:
        it += 1
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return it


def _brent(f, a, b, x, fx, tol, max_iter=200):
    """Brent's method maximizing f on [a, b] from an interior start ``x``.

    Works on -f internally; returns the iteration count.
    """
    fx = -fx
    w = v = x
    fw = fv = fx
    d = e = 0.0
    for it in range(1, max_iter + 1):
        xm = 0.5 * (a + b)
        tol1 = _SQRT_EPS * abs(x) + tol / 3.0
        tol2 = 2.0 * tol1
        if abs(x - xm) <= tol2 - 0.5 * (b - a):
            return it - 1
        golden = True
        if abs(e) > tol1:
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0.0:
                p = -p
            q = abs(q)
            etemp = e
            e = d
            if not (abs(p) >= abs(0.5 * q * etemp) or p <= q * (a - x) or p >= q * (b - x)):
                d = p / q
                u = x + d
                if u - a < tol2 or b - u < tol2:
                    d = math.copysign(tol1, xm - x)
                golden = False
        if golden:
            e = (a - x) if x >= xm else (b - x)
            d = _CGOLD * e
        u = x + d if abs(d) >= tol1 else x + math.copysign(tol1, d)
        fu = -f(u)
        if fu <= fx:
            if u >= x:
                a = x
            else:
                b = x
            v, w, x = w, x, u
            fv, fw, fx = fw, fx, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, w = w, u
                fv, fw = fw, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
    return max_iter


def maximize_scalar(
    objective: Callable[[float], float],
    bounds: tuple[float, float],
    tol: float = 1e-7,
    max_evals: int = 500,
    candidates: Sequence[float] = (),
    prescan: int = 32,
    method: str = "brent",
) -> OptimizeResult:
    """Maximize a scalar function on a closed interval.

    A ``prescan``-point grid (endpoints included) picks the starting bracket so
    flat zero plateaus and mild multimodality do not trap the search; any
    ``candidates`` inside the bounds are evaluated as well. The returned point
    is the best evaluated one, the smallest argument winning ties, so the
    result is never worse than the bounds or the candidates.
    """
    lo, hi = float(bounds[0]), float(bounds[1])
    if not lo < hi:
        raise ValueError(f"need lower < upper, got {bounds}")
    if method not in ("brent", "golden"):
        raise ValueError(f"unknown method {method!r}")
    f = _Tracked(objective, max_evals)
    iterations = 0
    converged = True
    try:
        for c in candidates:
            if lo <= c <= hi:
                f(float(c))
        if prescan >= 2:
            grid = np.linspace(lo, hi, prescan)
            vals = [f(float(g)) for g in grid]
            i = int(np.argmax(vals))
            a = float(grid[max(i - 1, 0)])
            b = float(grid[min(i + 1, prescan - 1)])
            x0, f0 = float(grid[i]), vals[i]
        else:
            a, b = lo, hi
            x0 = a + _CGOLD * (b - a)
            f0 = f(x0)
        if method == "golden":
            iterations = _golden(f, a, b, tol)
        else:
            if x0 in (a, b):
                # Start strictly inside the bracket.
                x0 = a + _CGOLD * (b - a) if x0 == a else b - _CGOLD * (b - a)
                f0 = f(x0)
            iterations = _brent(f, a, b, x0, f0, tol)
    except _BudgetExhausted:
        converged = False
    return OptimizeResult(f.best_x, f.best_v, f.evals, iterations, converged)


def maximize_bivariate(
    objective: Callable[[float, float], float],
    bounds: tuple[tuple[float, float], tuple[float, float]],
    tol: float = 1e-7,
    max_evals: int = 2000,
    candidates: Sequence[tuple[float, float]] = (),
    max_sweeps: int = 30,
    line_prescan: int = 16,
) -> OptimizeResult:
    """Maximize f(x, y) over a box by coordinate ascent.

    Each coordinate move is a :func:`maximize_scalar` line search seeded with
    the current coordinate, so sweeps never lose ground. Sweeps stop once a
    full sweep improves the value by no more than ``tol`` and moves neither
    coordinate by more than ``tol``. If that does not happen within
    ``max_sweeps`` or the sweeps revisit an earlier point, a bounded
    Nelder-Mead simplex polishes the best point.
    """
    (xlo, xhi), (ylo, yhi) = bounds
    if not (xlo < xhi and ylo < yhi):
        raise ValueError(f"invalid box {bounds}")
    f = _Tracked(lambda p: objective(p[0], p[1]), max_evals)
    sweeps = 0
    converged = False
    try:
        starts = [(xlo, ylo), (xlo, yhi), (xhi, ylo), (xhi, yhi), (0.5 * (xlo + xhi), 0.5 * (ylo + yhi))]
        starts += [(float(cx), float(cy)) for cx, cy in candidates if xlo <= cx <= xhi and ylo <= cy <= yhi]
        for p in starts:
            f(p)
        x, y = f.best_x
        val = f.best_v
        visited = [(x, y)]
        cycling = False
        while sweeps < max_sweeps:
            sweeps += 1

            def along_x(t, y=y):
                return f((t, y))

            rx = maximize_scalar(
                along_x, (xlo, xhi), tol, f.budget - f.evals, candidates=(x,), prescan=line_prescan
            )
            if not rx.converged:
                raise _BudgetExhausted
            nx = rx.x

            def along_y(t, x=nx):
                return f((x, t))

            ry = maximize_scalar(
                along_y, (ylo, yhi), tol, f.budget - f.evals, candidates=(y,), prescan=line_prescan
            )
            if not ry.converged:
                raise _BudgetExhausted
            ny, nval = ry.x, ry.value
            gain = nval - val
            small_move = abs(nx - x) <= tol and abs(ny - y) <= tol
            revisit = any(abs(nx - vx) <= tol and abs(ny - vy) <= tol for vx, vy in visited[:-1])
            x, y, val = nx, ny, nval
            if gain <= tol and small_move:
                converged = True
                break
            if gain <= 0.0 and revisit:
                cycling = True
                break
            visited.append((x, y))
        if not converged or cycling:
            _nelder_mead(f, (x, y), bounds, tol)
            converged = True
    except _BudgetExhausted:
        converged = False
    return OptimizeResult(f.best_x, f.best_v, f.evals, sweeps, converged)


def _nelder_mead(f, start, bounds, tol):
    def neg(p):
        return -f((float(p[0]), float(p[1])))

    _sciopt.minimize(
        neg,
        np.asarray(start, dtype=float),
        method="Nelder-Mead",
        bounds=bounds,
        options={"xatol": tol, "fatol": 0.0, "maxfev": max(f.budget - f.evals, 1)},
    )


def maximize(
    objective: Callable[[Mapping[str, float]], float],
    directive: OptimizeDirective,
    candidates: Sequence[Mapping[str, float]] = (),
) -> tuple[dict[str, float], OptimizeResult]:
    """Maximize over the directive's variables (one or two) by name."""
    names = directive.variables
    if len(names) == 1:
        (name,) = names
        cands = [c[name] for c in candidates if name in c]
        res = maximize_scalar(
            lambda t: objective({name: t}),
            directive.bounds[name],
            directive.tolerance,
            directive.max_evals,
            candidates=cands,
        )
        return {name: res.x}, res
    if len(names) == 2:
        a, b = names
        cands = [(c[a], c[b]) for c in candidates if a in c and b in c]
        res = maximize_bivariate(
            lambda s, t: objective({a: s, b: t}),
            (directive.bounds[a], directive.bounds[b]),
            directive.tolerance,
            directive.max_evals,
            candidates=cands,
        )
        return {a: res.x[0], b: res.x[1]}, res
    raise ValueError(f"can optimize one or two variables, got {names}")
