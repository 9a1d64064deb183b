"""Quadrature, root finding and monotone interpolation primitives.

The rest of pdqkit builds on these primitives and on grid carriers for
densities. The integrals met here have integrable power or logarithmic
singularities at the endpoints of [0, 1], so the workhorse is double
exponential (tanh-sinh) quadrature; QUADPACK's adaptive Gauss-Kronrod rule is
used for smooth integrands.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import integrate as _spi
from scipy import optimize as _spo
from scipy.interpolate import PchipInterpolator

from .errors import (
    BracketError,
    DivergentIntegralError,
    MonotonicityError,
    QuadratureError,
)

__all__ = [
    "DEFAULTS",
    "Interval",
    "GridFunction",
    "MonotoneInterpolant",
    "integrate",
    "tanh_sinh",
    "find_root",
    "invert_monotone",
    "monotone_interpolant",
    "canonical_nodes",
    "logit_grid",
    "grid_derivative",
]


@dataclass
class Defaults:
    """Tunable tolerances. The CLI overrides these from flags/environment."""

    quad_tol: float = 1e-10
    root_tol: float = 1e-12
    grid_size: int = 4097
    # logit range of the canonical grid: u = expit(s), s in [-left, right]
    logit_left: float = 80.0
    logit_right: float = 34.0
    ts_max_level: int = 10


DEFAULTS = Defaults()


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def finite(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (x >= self.lo) & (x <= self.hi)

    def interior(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (x > self.lo) & (x < self.hi)


def _as_interval(domain) -> Interval:
    if isinstance(domain, Interval):
        return domain
    lo, hi = domain
    return Interval(float(lo), float(hi))


# ---------------------------------------------------------------------------
# tanh-sinh quadrature

_TS_TINY = 1e-300


@lru_cache(maxsize=None)
def _ts_level(level: int):
    """Nodes added at `level` for the reference interval [0, 1].

    Returns (s, c, w): s is the node, c = 1 - s computed without
    cancellation, w the weight for step h = 2**-level. Level 0 holds the
    integer t; every later level holds only the new odd multiples of h.
    """
    h = 2.0 ** -level
    if level == 0:
        t = np.arange(0.0, 8.0, 1.0)
    else:
        t = np.arange(h, 8.0, 2 * h)
    y = 0.5 * math.pi * np.sinh(t)
    e = np.exp(-2.0 * y)
    d = e / (1.0 + e)  # distance of the node from the nearer endpoint
    w = 0.5 * math.pi * np.cosh(t) * 4.0 * e / (1.0 + e) ** 2 * h * 0.5
    keep = d > _TS_TINY
    t, d, w = t[keep], d[keep], w[keep]
    if level == 0:
        # t = 0 sits at the centre and is counted once
        s = np.concatenate([[0.5], d[1:], 1.0 - d[1:]])
        c = np.concatenate([[0.5], 1.0 - d[1:], d[1:]])
        ww = np.concatenate([[w[0]], w[1:], w[1:]])
    else:
        s = np.concatenate([d, 1.0 - d])
        c = np.concatenate([1.0 - d, d])
        ww = np.concatenate([w, w])
    return s, c, ww


def _mapped(f: Callable, iv: Interval):
    """Integrand on the reference interval [0, 1] for a (possibly infinite) interval.

    The returned callable takes (s, c) with c = 1 - s and the Jacobian folded in.
    """
    lo, hi = iv.lo, iv.hi
    if iv.finite:
        width = hi - lo

        def g(s, c):
            x = np.where(s <= 0.5, lo + width * s, hi - width * c)
            return f(x) * width
    elif math.isfinite(lo):
        def g(s, c):
            with np.errstate(divide="ignore", over="ignore"):
                x = lo + s / c
                return f(x) / (c * c)
    elif math.isfinite(hi):
        def g(s, c):
            with np.errstate(divide="ignore", over="ignore"):
                x = hi - c / s
                return f(x) / (s * s)
    else:
        def g(s, c):
            # x = (s - c) / (s c) maps (0, 1) onto the real line
            with np.errstate(divide="ignore", over="ignore"):
                x = (s - c) / (s * c)
                return f(x) * (s * s + c * c) / (s * c) ** 2
    return g


def _eval_terms(g, s, c, w):
    with np.errstate(all="ignore"):
        vals = np.asarray(g(s, c), dtype=float)
    vals = np.broadcast_to(vals, s.shape)
    bad = ~np.isfinite(vals)
    if bad.any():
        # an unbounded or underflowed integrand is tolerated only at nodes
        # crowding the endpoints, where the weights are negligible
        dist = np.minimum(s, c)
        if np.any(bad & (dist > 1e-12)):
            raise QuadratureError("integrand not finite away from the endpoints")
        vals = np.where(bad, 0.0, vals)
    return w * vals, np.minimum(s, c)


def tanh_sinh(f: Callable, domain, tol: float | None = None,
              max_level: int | None = None, detect_divergence: bool = True):
    """Double exponential quadrature of a vectorised `f` over `domain`.

    Returns ``(estimate, error_estimate)``. Infinite domains are mapped onto
    (0, 1) first. Raises `DivergentIntegralError` when the mass carried by
    the nodes closest to the endpoints does not die out, and
    `QuadratureError` when the levels fail to agree.
    """
    tol = DEFAULTS.quad_tol if tol is None else tol
    max_level = DEFAULTS.ts_max_level if max_level is None else max_level
    iv = _as_interval(domain)
    g = _mapped(f, iv)

    terms, dists = [], []
    total = prev = None
    err = math.inf
    for level in range(max_level + 1):
        s, c, w = _ts_level(level)
        t, d = _eval_terms(g, s, c, w)
        terms = [x * 0.5 for x in terms]  # halve weights of earlier levels
        terms.append(t)
        dists.append(d)
        allt = np.concatenate(terms)
        total = math.fsum(allt)
        if prev is not None:
            err = abs(total - prev)
            if level >= 3 and err <= max(tol, tol * abs(total)):
                break
        prev = total
    allt = np.concatenate(terms)
    alld = np.concatenate(dists)

    if detect_divergence:
        _check_tail(allt, alld, total)
    if not err <= max(10 * tol, 10 * tol * abs(total)):
        raise QuadratureError("tanh-sinh levels disagree", total, err)
    return total, err


def _check_tail(terms, dists, total):
    """Flag divergence from the mass sitting at extreme endpoint distances.

    For an integrable singularity the mass within distance eps of an
    endpoint vanishes like a power of eps; for a divergent one it decays
    at most logarithmically.
    """
    near = math.fsum(terms[dists < 1e-100])
    nearer = math.fsum(terms[dists < 1e-200])
    if abs(near) > 1e-6 * max(1.0, abs(total)) and abs(nearer) > 0.25 * abs(near):
        raise DivergentIntegralError(
            "divergent integral: endpoint mass does not vanish",
            estimate=math.copysign(math.inf, total))


def integrate(f: Callable, domain=(0.0, 1.0), endpoint_hints=None,
              tol: float | None = None, points: Sequence[float] = (),
              method: str = "auto") -> float:
    """Integrate `f` over `domain` to absolute tolerance `tol`.

    Parameters
    ----------
    f : callable
        Vectorised integrand. It may be infinite (or undefined) exactly at
        an endpoint.
    domain : Interval or (lo, hi)
        Either bound may be infinite.
    endpoint_hints : optional
        Any truthy value (e.g. a pair of power exponents, or ``"log"``)
        announces endpoint singularities and selects tanh-sinh directly.
    points : sequence of float
        Interior break points (kinks) at which the domain is split.
    method : {"auto", "gk", "ts"}
        ``auto`` tries Gauss-Kronrod and falls back to tanh-sinh.

    Raises
    ------
    QuadratureError, DivergentIntegralError
    """
    tol = DEFAULTS.quad_tol if tol is None else tol
    iv = _as_interval(domain)
    cuts = sorted(p for p in points if iv.lo < p < iv.hi)
    if cuts:
        edges = [iv.lo, *cuts, iv.hi]
        return math.fsum(
            integrate(f, (a, b), endpoint_hints, tol, (), method)
            for a, b in zip(edges[:-1], edges[1:]))

    if method == "ts" or (method == "auto" and endpoint_hints):
        return tanh_sinh(f, iv, tol)[0]
    if method not in ("auto", "gk"):
        raise ValueError(f"unknown quadrature method {method!r}")

    with warnings.catch_warnings():
        warnings.simplefilter("error", _spi.IntegrationWarning)
        try:
            with np.errstate(all="ignore"):
                val, err = _spi.quad(lambda x: float(f(x)), iv.lo, iv.hi,
                                     epsabs=tol, epsrel=tol, limit=400)
            if math.isfinite(val) and err <= max(10 * tol, 10 * tol * abs(val)):
                return val
            if method == "gk":
                raise QuadratureError("Gauss-Kronrod tolerance not met", val, err)
        except _spi.IntegrationWarning as exc:
            if method == "gk":
                raise QuadratureError(str(exc)) from exc
    return tanh_sinh(f, iv, tol)[0]


# ---------------------------------------------------------------------------
# root finding


def find_root(g: Callable[[float], float], bracket, tol: float | None = None) -> float:
    """Root of a monotone `g` inside `bracket` by Brent's safeguarded method.

    Infinite bracket ends are pushed outward until a sign change appears.
    """
    tol = DEFAULTS.root_tol if tol is None else tol
    lo, hi = (bracket.lo, bracket.hi) if isinstance(bracket, Interval) else bracket
    lo, hi = float(lo), float(hi)
    if not math.isfinite(lo) or not math.isfinite(hi):
        lo, hi = _expand_bracket(g, lo, hi)
    glo, ghi = g(lo), g(hi)
    if glo == 0:
        return lo
    if ghi == 0:
        return hi
    if np.sign(glo) == np.sign(ghi):
        raise BracketError(f"bracket error: no sign change on [{lo}, {hi}]")
    return _spo.brentq(g, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500)


def _expand_bracket(g, lo, hi):
    a = lo if math.isfinite(lo) else (min(-1.0, hi - 1.0) if math.isfinite(hi) else -1.0)
    b = hi if math.isfinite(hi) else (max(1.0, a + 1.0))
    step = 1.0
    for _ in range(2000):
        ga, gb = g(a), g(b)
        if np.sign(ga) != np.sign(gb):
            return a, b
        if not math.isfinite(lo):
            a -= step
        if not math.isfinite(hi):
            b += step
        step *= 2.0
    raise BracketError("bracket error: could not find a sign change")


def invert_monotone(F: Callable, targets, lo, hi, iters: int = 200,
                    tol: float | None = None) -> np.ndarray:
    """Vectorised inverse of an increasing `F`: x with F(x) = target.

    `lo` and `hi` are finite arrays (or scalars) bracketing each root.
    Runs bisection until the brackets shrink below `tol` relative to
    their size, so it is slow but never leaves the bracket.
    """
    tol = DEFAULTS.root_tol if tol is None else tol
    y = np.asarray(targets, dtype=float)
    a = np.broadcast_to(np.asarray(lo, dtype=float), y.shape).copy()
    b = np.broadcast_to(np.asarray(hi, dtype=float), y.shape).copy()
    for _ in range(iters):
        m = 0.5 * (a + b)
        below = F(m) < y
        a = np.where(below, m, a)
        b = np.where(below, b, m)
        if np.all(b - a <= tol * np.maximum(1e-300, np.abs(m)) + 1e-300):
            break
    return 0.5 * (a + b)


# ---------------------------------------------------------------------------
# grids and Hermite interpolation


def canonical_nodes(n: int | None = None, left: float | None = None,
                    right: float | None = None) -> np.ndarray:
    """Default node set on [0, 1]: uniform in logit, plus both endpoints.

    Nodes crowd geometrically toward 0 (down to about exp(-left)) and 1
    (down to about exp(-right) in 1 - u), so endpoint singularities and
    heavy mass near the boundary stay resolved.
    """
    n = DEFAULTS.grid_size if n is None else n
    left = DEFAULTS.logit_left if left is None else left
    right = DEFAULTS.logit_right if right is None else right
    s = np.linspace(-left, right, n - 2)
    u = 1.0 / (1.0 + np.exp(-s))
    u = np.unique(u[(u > 0) & (u < 1)])
    return np.concatenate([[0.0], u, [1.0]])


def logit_grid(n: int | None = None, left: float | None = None,
               right: float | None = None) -> tuple[np.ndarray, float]:
    """Uniform grid in s = logit(u) covering [-left, right], with s = 0 a node.

    Returns ``(s, h)``. The spacing is fixed by `n` and the range; the range is
    then shifted by less than one step so that u = 1/2 falls on a node.
    """
    n = DEFAULTS.grid_size if n is None else int(n)
    left = DEFAULTS.logit_left if left is None else float(left)
    right = DEFAULTS.logit_right if right is None else float(right)
    if n < 16:
        raise ValueError("grid needs at least 16 nodes")
    h = (left + right) / (n - 1)
    i0 = int(round(left / h))
    s = (np.arange(n) - i0) * h
    return s, h


def _fd_weights(offsets: np.ndarray) -> np.ndarray:
    """First-derivative weights at 0 for a stencil of integer `offsets`."""
    k = offsets.size
    A = np.vander(offsets.astype(float), k, increasing=True).T
    rhs = np.zeros(k)
    rhs[1] = 1.0
    return np.linalg.solve(A, rhs)


def grid_derivative(y: np.ndarray, h: float, breaks: Sequence[int] = (),
                    order: int = 6) -> tuple[np.ndarray, np.ndarray]:
    """Derivative of samples `y` on a uniform grid of step `h`.

    Uses `order`-accurate finite differences, switching to one-sided
    stencils near the ends of each smooth segment. `breaks` lists node
    indices where the function has a kink; at those nodes the left and
    right derivatives differ. Returns ``(left, right)`` derivative arrays.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    half = order // 2
    cuts = sorted({0, n - 1, *[int(b) for b in breaks if 0 < b < n - 1]})
    left = np.empty(n)
    right = np.empty(n)
    for a, b in zip(cuts[:-1], cuts[1:]):
        seg = y[a:b + 1]
        m = seg.size
        k = min(order + 1, m)
        d = np.empty(m)
        central = _fd_weights(np.arange(-half, half + 1)) if m >= order + 1 else None
        for i in range(m):
            if central is not None and half <= i < m - half:
                d[i] = central @ seg[i - half:i + half + 1]
            else:
                lo = min(max(i - half, 0), m - k)
                offs = np.arange(lo, lo + k) - i
                d[i] = _fd_weights(offs) @ seg[lo:lo + k]
        d /= h
        right[a:b] = d[:-1]
        left[a + 1:b + 1] = d[1:]
        if a == 0:
            left[0] = d[0]
        if b == n - 1:
            right[n - 1] = d[-1]
    return left, right


def _hermite(t, h, y0, y1, d0, d1):
    t2 = t * t
    t3 = t2 * t
    return ((2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0
            + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * d1)


def _hermite_cell_integrals(x, y, d):
    h = np.diff(x)
    return 0.5 * h * (y[:-1] + y[1:]) + h * h * (d[:-1] - d[1:]) / 12.0


def _fritsch_carlson(x, y, d):
    """Limit Hermite slopes so every cell is monotone."""
    d = d.copy()
    delta = np.diff(y) / np.diff(x)
    for i, dl in enumerate(delta):
        if dl == 0:
            d[i] = d[i + 1] = 0.0
            continue
        a, b = d[i] / dl, d[i + 1] / dl
        if a < 0:
            d[i], a = 0.0, 0.0
        if b < 0:
            d[i + 1], b = 0.0, 0.0
        r = a * a + b * b
        if r > 9.0:
            k = 3.0 / math.sqrt(r)
            d[i], d[i + 1] = k * a * dl, k * b * dl
    return d


@dataclass(frozen=True)
class GridFunction:
    """A function on [0, 1] carried by node values and (optional) slopes.

    Between interior nodes it is the cubic Hermite interpolant. In the two
    end cells it follows ``y_end + (y_1 - y_end) * (v / v_1) ** q`` with v
    the distance to the endpoint; this captures power laws and, for small
    q, logarithmic blow-up. `endpoint_exponents` optionally records the
    exact power-law exponents (p0 at 0, p1 at 1) when they are known.
    """

    nodes: np.ndarray
    values: np.ndarray
    slopes: np.ndarray | None = None
    endpoint_exponents: tuple | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        x = np.asarray(self.nodes, dtype=float)
        y = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "nodes", x)
        object.__setattr__(self, "values", y)
        if x.ndim != 1 or x.shape != y.shape or x.size < 2:
            raise ValueError("nodes and values must be 1-d arrays of equal length >= 2")
        if x[0] != 0.0 or x[-1] != 1.0:
            raise ValueError("grid must start at 0 and end at 1")
        if np.any(np.diff(x) <= 0):
            raise MonotonicityError("grid nodes must be strictly increasing")
        if x.size > 2 and not np.all(np.isfinite(y[1:-1])):
            raise ValueError("grid values must be finite at interior nodes")
        if self.slopes is not None:
            object.__setattr__(self, "slopes", np.asarray(self.slopes, dtype=float))

    # -- slopes and end models ------------------------------------------

    def node_slopes(self) -> np.ndarray:
        if "slopes" not in self._cache:
            x, y = self.nodes, self.values
            if self.slopes is not None:
                d = self.slopes.copy()
            elif x.size > 3:
                d = np.full_like(y, np.nan)
                d[1:-1] = PchipInterpolator(x[1:-1], y[1:-1])(x[1:-1], 1)
            else:
                d = np.full_like(y, (y[-1] - y[0]))
            self._cache["slopes"] = d
        return self._cache["slopes"]

    def _end_model(self, side: int):
        """(y_end, y_1, dist_1, q, hermite) for the end cell on `side` (0 or 1)."""
        x, y, d = self.nodes, self.values, self.node_slopes()
        if x.size == 2:
            return None
        if side == 0:
            y_end, y1, dist, d_end, d1 = y[0], y[1], x[1], d[0], d[1]
            slope_out = d1
        else:
            y_end, y1, dist, d_end, d1 = y[-1], y[-2], 1.0 - x[-2], d[-1], d[-2]
            slope_out = -d1
        if math.isfinite(y_end) and math.isfinite(d_end):
            return (y_end, y1, dist, 1.0, True)
        base = y_end if math.isfinite(y_end) else 0.0
        diff = y1 - base
        if diff == 0 or not math.isfinite(slope_out):
            q = 1.0
        else:
            q = dist * slope_out / diff
        if base == 0.0 and q == 0.0:
            q = 1e-300
        return (base, y1, dist, q, False)

    def end_exponent(self, side: int) -> float:
        """Power-law exponent of the function at endpoint `side`.

        Uses the recorded exact exponent when known; otherwise the local
        log-derivative at the outermost interior node, falling back to a
        log-log regression over the outer 1% of nodes.
        """
        if self.endpoint_exponents is not None and self.endpoint_exponents[side] is not None:
            return float(self.endpoint_exponents[side])
        x, y = self.nodes, self.values
        if self.slopes is not None and x.size > 2:
            i = 1 if side == 0 else -2
            dist = x[i] if side == 0 else 1.0 - x[i]
            sgn = 1.0 if side == 0 else -1.0
            if y[i] > 0:
                return sgn * dist * self.slopes[i] / y[i]
        return self.regression_exponent(side)

    def regression_exponent(self, side: int, frac: float = 0.01) -> float:
        x, y = self.nodes[1:-1], self.values[1:-1]
        k = max(3, int(frac * x.size))
        if side == 0:
            dist, val = x[:k], y[:k]
        else:
            dist, val = 1.0 - x[-k:], y[-k:]
        ok = (dist > 0) & (val > 0)
        if ok.sum() < 2:
            return 0.0
        slope = np.polyfit(np.log(dist[ok]), np.log(val[ok]), 1)[0]
        return float(slope)

    # -- evaluation ------------------------------------------------------

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        x, y, d = self.nodes, self.values, self.node_slopes()
        out = np.empty_like(u)
        i = np.clip(np.searchsorted(x, u, side="right") - 1, 0, x.size - 2)
        h = x[i + 1] - x[i]
        t = (u - x[i]) / h
        with np.errstate(all="ignore"):
            out = _hermite(t, h, y[i], y[i + 1], d[i], d[i + 1])
            if x.size > 2:
                for side, cell in ((0, 0), (1, x.size - 2)):
                    base, y1, dist, q, herm = self._end_model(side)
                    if herm:
                        continue
                    m = i == cell
                    if not np.any(m):
                        continue
                    v = u[m] if side == 0 else 1.0 - u[m]
                    out[m] = base + (y1 - base) * (v / dist) ** q
        out = np.where(u == x[0], y[0], out)
        out = np.where(u == x[-1], y[-1], out)
        return out

    # -- integration -----------------------------------------------------

    def integral(self, h: Callable | None = None, dh: Callable | None = None,
                 power: float | None = None, cumulative: bool = False):
        """Integral of ``h(self)`` over [0, 1] (or its running integral at the nodes).

        `dh` is the derivative of `h`, used to give the Hermite rule exact
        slopes; `power` tells the end-cell check that ``h(y) = y**power`` so
        divergence can be decided from the end exponent.
        """
        x, y, d = self.nodes, self.values, self.node_slopes()
        if h is None:
            hy, hd = y, d
        else:
            with np.errstate(all="ignore"):
                hy, hd = h(y), dh(y) * d
        cells = np.empty(x.size - 1)
        if x.size > 2:
            cells[1:-1] = _hermite_cell_integrals(x[1:-1], hy[1:-1], hd[1:-1])
        for side, cell in ((0, 0), (1, x.size - 2)):
            cells[cell] = self._end_cell_integral(side, h, power, hy, hd)
        if cumulative:
            out = np.concatenate([[0.0], np.cumsum(cells)])
            return out
        return math.fsum(cells)

    def _end_cell_integral(self, side, h, power, hy, hd):
        x = self.nodes
        if x.size == 2:
            return 0.5 * (hy[0] + hy[1])
        base, y1, dist, q, herm = self._end_model(side)
        if herm:
            if side == 0:
                return float(_hermite_cell_integrals(x[:2], hy[:2], hd[:2])[0])
            return float(_hermite_cell_integrals(x[-2:], hy[-2:], hd[-2:])[0])
        if base == 0.0 and power is not None:
            # pure power law: closed form, divergent when power * q <= -1
            e = power * q + 1.0
            if e <= 0:
                raise DivergentIntegralError(
                    f"divergent integral at endpoint {side}: exponent {q:.4g}")
            return dist * y1 ** power / e

        def f(v):
            val = base + (y1 - base) * (v / dist) ** q
            return val if h is None else h(val)

        return tanh_sinh(f, (0.0, dist), tol=1e-14 * max(1.0, abs(hy[1 if side == 0 else -2]) * dist))[0]


class MonotoneInterpolant:
    """Shape-preserving cubic interpolant of increasing data, with inverse."""

    def __init__(self, g: GridFunction, require_monotone: bool = True):
        x, y = g.nodes, g.values
        fin = np.isfinite(y)
        if require_monotone and np.any(np.diff(y[fin]) <= 0):
            raise MonotonicityError("monotonicity violation: values not strictly increasing")
        self.grid = g
        d = g.node_slopes().copy()
        self.increasing = require_monotone
        if require_monotone:
            inner = slice(1, -1) if x.size > 3 else slice(None)
            d[inner] = _fritsch_carlson(x[inner], y[inner], d[inner])
        self._slopes = d
        self._g = GridFunction(x, y, d, g.endpoint_exponents)

    def __call__(self, u):
        return self._g(u)

    def inverse(self, target):
        """Node-free inverse by bracketed bisection inside the right cell."""
        if not self.increasing:
            raise MonotonicityError("inverse requires a monotone interpolant")
        x, y = self._g.nodes, self._g.values
        tgt = np.asarray(target, dtype=float)
        i = np.clip(np.searchsorted(y, tgt, side="right") - 1, 0, x.size - 2)
        lo, hi = x[i], x[i + 1]
        out = invert_monotone(self._g, tgt, lo, hi, tol=1e-15)
        out = np.where(tgt <= y[0], x[0], out)
        out = np.where(tgt >= y[-1], x[-1], out)
        return out


def monotone_interpolant(g: GridFunction, require_monotone: bool = True) -> MonotoneInterpolant:
    """Build a shape-preserving interpolant of `g`; exposes ``.inverse`` when monotone."""
    return MonotoneInterpolant(g, require_monotone)
