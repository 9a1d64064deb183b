"""The *-transform: pdQs of distributions, pdQs of pdQs, *-order, reconstruction.

A `Pdq` is a positive density on [0, 1]. It is backed either by callables
(a closed form, or ``fQ / kappa`` for a catalog law) or by a *chart*: samples
on a uniform grid in a parameter ``s`` together with the map ``s -> u``.

Charts make the repeated transform exact up to quadrature. If ``g`` is
sampled at positions ``u(s)``, then ``g*`` takes the value ``g(u(s)) / kappa``
at position ``G(u(s))``. So along ``s`` the transform only rescales the
values and multiplies the Jacobian ``du/ds`` by ``g``; no interpolation is
needed. The initial chart is ``s = logit(u)``, in which the power-law and
logarithmic endpoint behaviour of pdQs becomes smooth and exponentially
decaying, so trapezoid sums over ``s`` converge very fast.
"""

from __future__ import annotations

import csv
import io
import math
from fractions import Fraction
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import special as sc
from scipy.interpolate import PchipInterpolator

from .catalog import Distribution, Family
from .errors import (
    DivergentIntegralError,
    MonotonicityError,
    NotSquareIntegrableError,
    ParameterError,
    PdqError,
    ReconstructionError,
)
from .numerics import (
    DEFAULTS,
    GridFunction,
    Interval,
    _hermite,
    grid_derivative,
    integrate,
    invert_monotone,
    logit_grid,
    monotone_interpolant,
)

__all__ = ["Pdq", "StarOrder", "star_transform", "star_order", "reconstruct_cdf",
           "uniform_pdq", "pdq_from_callable", "read_pdq_csv", "write_pdq_csv"]

# exponent margin used when an endpoint exponent is estimated rather than known
EXPONENT_MARGIN = 0.05
# an integral whose estimated endpoint tail exceeds this share is declared divergent
TAIL_SHARE = 1e-6


# ---------------------------------------------------------------------------
# charts


@dataclass(frozen=True)
class _Chart:
    """Log-space samples of a density ``g`` along a uniform parameter grid.

    ``lg = ln g`` and ``lw = ln du/ds`` with their (left, right) derivatives
    in ``s``; the two differ only at kink nodes. ``u`` and ``t = 1 - u`` are
    the node positions, each accurate on its own half. ``rates`` holds the
    exact endpoint log-slopes ``(d lg/ds, d lw/ds)`` at ``s -> -inf`` and
    ``s -> +inf`` where they are known, else None.
    """

    s: np.ndarray
    h: float
    lg: np.ndarray
    dlg: tuple
    lw: np.ndarray
    dlw: tuple
    u: np.ndarray
    t: np.ndarray
    rates: tuple
    breaks: tuple

    @property
    def g(self) -> np.ndarray:
        return np.exp(self.lg)

    def exponent(self, side: int) -> float:
        """Power-law exponent of g at endpoint `side` in its own variable u."""
        a, b = self._rates(side)
        return a / b

    def _rates(self, side: int):
        known = self.rates[side]
        if known is not None:
            return known
        return self._fitted_rates[side]

    @cached_property
    def _fitted_rates(self):
        """Endpoint log-slopes fitted by least squares over the outer 1% of nodes."""
        k = max(3, int(0.01 * self.s.size))
        out = []
        for sl in (slice(0, k), slice(-k, None)):
            s = self.s[sl]
            a = np.polyfit(s, self.lg[sl], 1)[0]
            b = np.polyfit(s, self.lw[sl], 1)[0]
            out.append((float(a), float(b)))
        return tuple(out)

    def exponent_known(self, side: int) -> bool:
        return self.rates[side] is not None

    def power_terms(self, k: float):
        """``y = g**k du/ds`` and its left/right s-derivatives."""
        with np.errstate(over="ignore", under="ignore"):
            ly = k * self.lg + self.lw
            y = np.exp(ly)
        dl = y * (k * self.dlg[0] + self.dlw[0])
        dr = y * (k * self.dlg[1] + self.dlw[1])
        return y, dl, dr

    def _cells(self, y, dl, dr):
        h = self.h
        return 0.5 * h * (y[:-1] + y[1:]) + h * h * (dr[:-1] - dl[1:]) / 12.0

    def power_integral(self, k: float, cumulative: bool = False):
        """``int_0^1 g(u)**k du``; divergence is decided from endpoint exponents.

        With ``cumulative`` also returns the running integrals from the left
        and from the right at every node.
        """
        y, dl, dr = self.power_terms(k)
        cells = self._cells(y, dl, dr)
        core = math.fsum(cells)
        tails = []
        for side in (0, 1):
            i = 0 if side == 0 else -1
            a, b = self._rates(side)
            # local decay rate of y away from the grid end (s -> -inf or +inf)
            lam = k * a + b if side == 0 else -(k * a + b)
            p = a / b
            crit = -1.0 / k if k != 0 else -math.inf
            loc_rate = (k * self.dlg[1][i] + self.dlw[1][i]) if side == 0 else \
                -(k * self.dlg[0][i] + self.dlw[0][i])
            tail = y[i] / loc_rate if loc_rate > 0 else (y[i] / lam if lam > 0 else math.inf)
            if k > 0:
                bad = p <= crit
            else:
                bad = p >= crit
            if self.exponent_known(side):
                diverges = abs(p - crit) <= 1e-12 or bad
            else:
                gap = (p - crit) if k > 0 else (crit - p)
                if gap <= -EXPONENT_MARGIN:
                    diverges = True
                elif gap >= EXPONENT_MARGIN:
                    diverges = False
                else:
                    diverges = not tail < TAIL_SHARE * max(abs(core), 1e-300)
            if diverges:
                raise DivergentIntegralError(
                    f"divergent integral: endpoint {side} exponent {p:.6g} "
                    f"{'<=' if k > 0 else '>='} {crit:.6g}")
            tails.append(tail)
        total = tails[0] + core + tails[1]
        if not cumulative:
            return total
        left = tails[0] + np.concatenate([[0.0], np.cumsum(cells)])
        right = tails[1] + np.concatenate([np.cumsum(cells[::-1])[::-1], [0.0]])
        return total, left, right

    def integral(self, fun: Callable) -> float:
        """``int_0^1 fun(u, g, lg) du`` by the trapezoid rule in s, plus tails."""
        with np.errstate(all="ignore"):
            vals = np.asarray(fun(self.u, self.g, self.lg), dtype=float)
            y = vals * np.exp(self.lw)
        y = np.where(np.exp(self.lw) == 0, 0.0, y)
        if not np.all(np.isfinite(y)):
            raise DivergentIntegralError("integrand not finite on the grid")
        core = self.h * (math.fsum(y) - 0.5 * (y[0] + y[-1]))
        scale = max(abs(core), 1.0)
        tail = 0.0
        for i, j in ((0, 2), (-1, -3)):
            if abs(y[i]) <= 1e-15 * scale:
                continue
            # decay rate of y moving outward past the last node
            lam = math.log(abs(y[j]) / abs(y[i])) / (2 * self.h) \
                if y[j] != 0 and np.sign(y[j]) == np.sign(y[i]) else 0.0
            if lam <= 1e-6:
                raise DivergentIntegralError("integrand does not decay at an endpoint")
            tail += y[i] / lam
        return core + tail

    def transport(self):
        """Chart of ``g*`` together with ``kappa = int g**2``."""
        kappa = self.power_integral(2.0)
        mass, left, right = self.power_integral(1.0, cumulative=True)
        shift = math.log(mass) - math.log(kappa)
        new = _Chart(
            s=self.s, h=self.h,
            lg=self.lg + shift, dlg=self.dlg,
            lw=self.lg + self.lw - math.log(mass),
            dlw=(self.dlg[0] + self.dlw[0], self.dlg[1] + self.dlw[1]),
            u=left / mass, t=right / mass,
            rates=tuple(None if r is None else (r[0], r[0] + r[1]) for r in self.rates),
            breaks=self.breaks)
        return new, kappa

    # -- evaluation between nodes ------------------------------------------

    @cached_property
    def _cum(self):
        """Normalised running mass from the left and from the right."""
        mass, left, right = self.power_integral(1.0, cumulative=True)
        return left / mass, right / mass

    @cached_property
    def _ends(self):
        """First and last node whose position and value are resolved."""
        idx = self._usable()
        return int(idx[0]), int(idx[-1])

    def _locate(self, X, dX, target):
        """Cell index and fraction where the Hermite curve through (X, dX) hits target."""
        n = X.size
        i = np.clip(np.searchsorted(X, target, side="right") - 1, 0, n - 2)
        lo, hi = np.zeros_like(target), np.ones_like(target)
        x0, x1, d0, d1 = X[i], X[i + 1], dX[i], dX[i + 1]
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            below = _hermite(mid, self.h, x0, x1, d0, d1) < target
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return i, 0.5 * (lo + hi)

    def _hermite_lg(self, i, th):
        return _hermite(th, self.h, self.lg[i], self.lg[i + 1],
                        self.dlg[1][i], self.dlg[0][i + 1])

    def log_density_at(self, u):
        """``ln g(u)``: Hermite in s between nodes, power law beyond the ends."""
        u = np.asarray(u, dtype=float)
        a, b = self._ends
        w = np.exp(self.lw)
        out = np.empty_like(u)
        lower = u <= 0.5
        with np.errstate(divide="ignore", invalid="ignore"):
            if lower.any():
                x = u[lower]
                i, th = self._locate(self.u[a:], w[a:], x)
                val = self._hermite_lg(i + a, th)
                rate = self.dlg[1][a] / (w[a] / self.u[a])
                tail = self.lg[a] + rate * (np.log(x) - math.log(self.u[a]))
                out[lower] = np.where(x < self.u[a], tail, val)
            if (~lower).any():
                t = 1.0 - u[~lower]
                i, th = self._locate(-self.t[:b + 1], w[:b + 1], -t)
                val = self._hermite_lg(i, th)
                rate = self.dlg[0][b] / (-w[b] / self.t[b])
                tail = self.lg[b] + rate * (np.log(t) - math.log(self.t[b]))
                out[~lower] = np.where(t < self.t[b], tail, val)
        return np.where((u <= 0) | (u >= 1), self._end_log(u), out)

    def _end_log(self, u):
        out = np.full_like(u, np.nan)
        for side, mask in ((0, u <= 0), (1, u >= 1)):
            p = self.exponent(side)
            out = np.where(mask, -np.inf if p > 0 else (np.inf if p < 0 else
                                                       self.lg[0 if side == 0 else -1]), out)
        return out

    def cdf_at(self, x):
        x = np.asarray(x, dtype=float)
        a, b = self._ends
        w = np.exp(self.lw)
        gw = np.exp(self.lg + self.lw)
        vl, vr = self._cum
        out = np.empty_like(x)
        lower = x <= 0.5
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if lower.any():
                xx = x[lower]
                i, th = self._locate(self.u[a:], w[a:], xx)
                j = i + a
                val = _hermite(th, self.h, vl[j], vl[j + 1], gw[j], gw[j + 1])
                q = gw[a] * self.u[a] / (w[a] * vl[a])
                tail = vl[a] * (xx / self.u[a]) ** q
                out[lower] = np.where(xx < self.u[a], tail, val)
            if (~lower).any():
                t = 1.0 - x[~lower]
                i, th = self._locate(-self.t[:b + 1], w[:b + 1], -t)
                val = _hermite(th, self.h, vr[i], vr[i + 1], -gw[i], -gw[i + 1])
                q = gw[b] * self.t[b] / (w[b] * vr[b])
                tail = vr[b] * (t / self.t[b]) ** q
                out[~lower] = 1.0 - np.where(t < self.t[b], tail, val)
        return np.clip(np.where(x <= 0, 0.0, np.where(x >= 1, 1.0, out)), 0.0, 1.0)

    def quantile_at(self, v):
        v = np.asarray(v, dtype=float)
        a, b = self._ends
        w = np.exp(self.lw)
        gw = np.exp(self.lg + self.lw)
        vl, vr = self._cum
        out = np.empty_like(v)
        lower = v <= vl[np.searchsorted(self.u, 0.5)]
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if lower.any():
                vv = v[lower]
                i, th = self._locate(vl[a:], gw[a:], vv)
                j = i + a
                val = _hermite(th, self.h, self.u[j], self.u[j + 1], w[j], w[j + 1])
                q = gw[a] * self.u[a] / (w[a] * vl[a])
                tail = self.u[a] * (vv / vl[a]) ** (1.0 / q)
                out[lower] = np.where(vv < vl[a], tail, val)
            if (~lower).any():
                r = 1.0 - v[~lower]
                i, th = self._locate(-vr[:b + 1], gw[:b + 1], -r)
                val = _hermite(th, self.h, self.t[i], self.t[i + 1], -w[i], -w[i + 1])
                q = gw[b] * self.t[b] / (w[b] * vr[b])
                tail = self.t[b] * (r / vr[b]) ** (1.0 / q)
                out[~lower] = 1.0 - np.where(r < vr[b], tail, val)
        return np.clip(np.where(v <= 0, 0.0, np.where(v >= 1, 1.0, out)), 0.0, 1.0)

    # -- views in the u variable -------------------------------------------

    def _usable(self):
        """Nodes whose positions are resolved in floating point, increasing."""
        u, t = self.u, self.t
        with np.errstate(over="ignore"):
            ok = (u > 1e-300) & (t > 0) & (u < 1.0) & np.isfinite(self.lg)
            ok &= np.exp(self.lg - self.lw) < 1e300
        idx = np.flatnonzero(ok)
        return idx[_increasing(u[idx])]

    def density_grid(self) -> GridFunction:
        idx = self._usable()
        g = np.exp(self.lg[idx])
        # d g/du = g * (d lg/ds) / (du/ds); use the average of one-sided slopes
        dlg = 0.5 * (self.dlg[0][idx] + self.dlg[1][idx])
        slope = g * dlg / np.exp(self.lw[idx])
        nodes = np.concatenate([[0.0], self.u[idx], [1.0]])
        vals = np.concatenate([[math.nan], g, [math.nan]])
        sl = np.concatenate([[math.nan], slope, [math.nan]])
        return GridFunction(nodes, vals, sl, (self.exponent(0), self.exponent(1)))

    def cdf_grid(self) -> GridFunction:
        idx = self._usable()
        _, left, right = self.power_integral(1.0, cumulative=True)
        mass = left[-1] + right[-1]
        v = np.where(self.u[idx] <= 0.5, left[idx] / mass, 1.0 - right[idx] / mass)
        inner = (v > 0) & (v < 1)
        idx, v = idx[inner], v[inner]
        keep = _increasing(v)
        idx, v = idx[keep], v[keep]
        nodes = np.concatenate([[0.0], self.u[idx], [1.0]])
        vals = np.concatenate([[0.0], v, [1.0]])
        sl = np.concatenate([[math.nan], np.exp(self.lg[idx]), [math.nan]])
        return GridFunction(nodes, vals, sl)


def _increasing(x: np.ndarray) -> np.ndarray:
    """Mask of a strictly increasing subsequence (each kept value beats all before it)."""
    if x.size == 0:
        return np.zeros(0, dtype=bool)
    prev = np.concatenate([[-np.inf], np.maximum.accumulate(x)[:-1]])
    return x > prev


def _breaks_for(s: np.ndarray, kinks: Sequence[float]) -> tuple:
    out = []
    for k in kinks:
        if 0 < k < 1:
            i = int(np.argmin(np.abs(s - math.log(k / (1 - k)))))
            if 0 < i < s.size - 1:
                out.append(i)
    return tuple(sorted(set(out)))


def _chart_from_log_values(s, h, lg, kinks, exponents) -> _Chart:
    u = sc.expit(s)
    t = sc.expit(-s)
    lw = np.log(u) + np.log(t)
    breaks = _breaks_for(s, kinks)
    dlg = grid_derivative(lg, h, breaks)
    dlw_val = t - u
    rates = []
    for side, p in enumerate(exponents):
        if p is None:
            rates.append(None)
        else:
            # u ~ e^s as s -> -inf; t ~ e^{-s} as s -> +inf
            rates.append((p, 1.0) if side == 0 else (-p, -1.0))
    return _Chart(s, h, lg, dlg, lw, (dlw_val, dlw_val), u, t, tuple(rates), breaks)


# ---------------------------------------------------------------------------
# Pdq


@dataclass(frozen=True)
class StarOrder:
    """Result of a *-order test.

    ``order`` is None when every iterate checked exists; ``checked_up_to``
    then says how far the check reached (None means proved for all n).
    """

    order: int | None
    checked_up_to: int | None
    method: str

    @property
    def infinite(self) -> bool:
        return self.order is None

    def __str__(self):
        if self.order is not None:
            return str(self.order)
        if self.checked_up_to is None:
            return "infinite"
        return f"infinite-up-to-{self.checked_up_to}"


class Pdq:
    """A positive probability density on [0, 1].

    Parameters
    ----------
    density : callable, optional
        Vectorised density. Omit it for a chart-backed (grid) pdQ.
    log_density, density_upper : callable, optional
        ``ln g(u)`` and ``g(1 - t)`` where a more accurate form exists.
    cdf, quantile : callable, optional
        Closed forms; otherwise derived numerically from the chart.
    kappa_parent : float, optional
        Normaliser used to create this pdQ from its parent.
    sup_norm : float, optional
        Supremum of the density (may be inf); estimated when omitted.
    endpoint_exponents : pair
        Exact power-law exponents at 0 and 1 when known, else None.
    kinks : sequence of float
        Interior points where the density is not smooth.
    """

    def __init__(self, density: Callable | None = None, *, log_density=None,
                 density_upper=None, cdf=None, quantile=None,
                 kappa_parent: float | None = None, sup_norm: float | None = None,
                 endpoint_exponents=(None, None), kinks: Sequence[float] = (),
                 name: str = "pdq", chart: _Chart | None = None, grid_size: int | None = None):
        if density is None and chart is None:
            raise ValueError("a Pdq needs a density or a chart")
        self._density = density
        self._log_density = log_density
        self._density_upper = density_upper
        self._cdf = cdf
        self._quantile = quantile
        self.kappa_parent = kappa_parent
        self._sup = sup_norm
        self.endpoint_exponents = tuple(endpoint_exponents)
        self.kinks = tuple(kinks)
        self.name = name
        self._chart = chart
        self._grid_size = grid_size
        self._cache: dict = {}

    def __repr__(self):
        return f"Pdq({self.name!r})"

    # -- charts and grids ---------------------------------------------------

    @property
    def chart(self) -> _Chart:
        if self._chart is None:
            s, h = logit_grid(self._grid_size)
            u, t = sc.expit(s), sc.expit(-s)
            lg = np.empty_like(s)
            lo = s <= 0
            lg[lo] = self._eval_log(u[lo])
            if self._density_upper is not None:
                with np.errstate(divide="ignore"):
                    lg[~lo] = np.log(self._density_upper(t[~lo]))
            else:
                lg[~lo] = self._eval_log(u[~lo])
            # drop extreme nodes where the density under- or overflows
            fin = np.isfinite(lg)
            if not fin.all():
                idx = np.flatnonzero(fin)
                a, b = idx[0], idx[-1]
                if not fin[a:b + 1].all():
                    raise PdqError(f"density of {self.name} not finite inside (0, 1)")
                s, lg = s[a:b + 1], lg[a:b + 1]
            self._chart = _chart_from_log_values(s, h, lg, self.kinks, self.endpoint_exponents)
        return self._chart

    @property
    def grid(self) -> GridFunction:
        """The density as a `GridFunction` on its chart's nodes."""
        if "grid" not in self._cache:
            self._cache["grid"] = self.chart.density_grid()
        return self._cache["grid"]

    @property
    def grid_backed(self) -> bool:
        return self._density is None

    # -- evaluation ---------------------------------------------------------

    def _eval_log(self, u):
        with np.errstate(divide="ignore", invalid="ignore"):
            if self._log_density is not None:
                return np.asarray(self._log_density(u), dtype=float)
            return np.log(np.asarray(self._density(u), dtype=float))

    def density(self, u):
        u = np.asarray(u, dtype=float)
        if self._density is not None:
            with np.errstate(all="ignore"):
                return np.asarray(self._density(u), dtype=float) * np.ones_like(u)
        return np.exp(self.chart.log_density_at(u))

    __call__ = density

    def log_density(self, u):
        u = np.asarray(u, dtype=float)
        if self._density is not None:
            return self._eval_log(u) * np.ones_like(u)
        return self.chart.log_density_at(u)

    def log_density_upper(self, t):
        """``ln g(1 - t)``, accurate for small ``t`` when a complement form exists."""
        t = np.asarray(t, dtype=float)
        if self._density_upper is not None:
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.log(np.asarray(self._density_upper(t), dtype=float)) * np.ones_like(t)
        if self._density is None:
            return self.chart.log_density_at(1.0 - t)
        return self._eval_log(1.0 - t) * np.ones_like(t)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if self._cdf is not None:
            with np.errstate(all="ignore"):
                out = np.asarray(self._cdf(np.clip(x, 0.0, 1.0)), dtype=float)
        else:
            out = self.chart.cdf_at(np.clip(x, 0.0, 1.0))
        return np.where(x <= 0, 0.0, np.where(x >= 1, 1.0, out))

    def quantile(self, v):
        v = np.asarray(v, dtype=float)
        if self._quantile is not None:
            with np.errstate(all="ignore"):
                out = np.asarray(self._quantile(v), dtype=float) * np.ones_like(v)
        elif self._cdf is not None:
            # bisection in logit(u) keeps relative accuracy near both ends
            z = invert_monotone(lambda z: self._cdf(sc.expit(z)), v,
                                np.full_like(v, -745.0), np.full_like(v, 745.0), tol=1e-15)
            out = sc.expit(z)
        else:
            out = self.chart.quantile_at(v)
        return np.where(v <= 0, 0.0, np.where(v >= 1, 1.0, out))

    # -- integrals ----------------------------------------------------------

    def integral(self, fun: Callable, tol: float | None = None) -> float:
        """``int_0^1 fun(u, g(u), ln g(u)) du``.

        Callable-backed densities use tanh-sinh on each half of [0, 1] (the
        upper half in the complement variable when an accurate form is
        available); grid-backed densities integrate along their chart.
        """
        if self._density is None:
            return self.chart.integral(fun)
        cuts = [k for k in self.kinks if 0 < k < 1 and k != 0.5]

        def lower(u):
            lg = self._eval_log(u)
            return fun(u, np.exp(lg), lg)

        def upper(t):
            u = 1.0 - t
            if self._density_upper is not None:
                with np.errstate(divide="ignore"):
                    lg = np.log(self._density_upper(t))
            else:
                lg = self._eval_log(u)
            return fun(u, np.exp(lg), lg)

        lo = integrate(lower, (0.0, 0.5), endpoint_hints=True, tol=tol,
                       points=[k for k in cuts if k < 0.5])
        hi = integrate(upper, (0.0, 0.5), endpoint_hints=True, tol=tol,
                       points=[1 - k for k in cuts if k > 0.5])
        return lo + hi

    def power_integral(self, k: float) -> float:
        """``int_0^1 g**k`` on the chart, with the endpoint-exponent divergence test."""
        return self.chart.power_integral(k)

    @property
    def kappa(self) -> float:
        """``int_0^1 g**2``; raises `NotSquareIntegrableError` when infinite."""
        if "kappa" not in self._cache:
            try:
                self._cache["kappa"] = self.power_integral(2.0)
            except DivergentIntegralError as exc:
                raise NotSquareIntegrableError(
                    f"not square-integrable: pdQ of {self.name} does not exist ({exc})") from exc
        return self._cache["kappa"]

    @property
    def sup_norm(self) -> float:
        if self._sup is None:
            ch = self.chart
            unbounded = False
            for side in (0, 1):
                p = ch.exponent(side)
                margin = 1e-12 if ch.exponent_known(side) else EXPONENT_MARGIN
                unbounded |= p < -margin
            self._sup = math.inf if unbounded else float(np.max(ch.g))
        return self._sup

    def sup_on_grid(self) -> float:
        """Largest density value at the chart nodes."""
        return float(np.max(self.chart.g))

    def with_name(self, name: str) -> "Pdq":
        other = Pdq.__new__(Pdq)
        other.__dict__.update(self.__dict__)
        other._cache = dict(self._cache)
        other.name = name
        return other

    # -- CSV ----------------------------------------------------------------

    def to_csv(self, dest=None) -> str | None:
        """Write ``u,density`` at the chart nodes; returns the text when `dest` is None."""
        return write_pdq_csv(self, dest)


def uniform_pdq(grid_size: int | None = None) -> Pdq:
    one = lambda u: np.ones_like(np.asarray(u, dtype=float))
    zero = lambda u: np.zeros_like(np.asarray(u, dtype=float))
    ident = lambda u: np.asarray(u, dtype=float)
    return Pdq(one, log_density=zero, density_upper=one, cdf=ident, quantile=ident,
               sup_norm=1.0, endpoint_exponents=(0.0, 0.0), name="uniform",
               grid_size=grid_size)


def pdq_from_callable(density: Callable, name: str = "custom", *, log_density=None,
                      endpoint_exponents=(None, None), normalize: bool = True,
                      kinks: Sequence[float] = (), grid_size: int | None = None) -> Pdq:
    """Wrap a positive function on (0, 1) as a pdQ, normalising it if asked.

    `log_density`, when given, must be ``ln density``; it keeps values where
    the density itself underflows.
    """
    common = dict(endpoint_exponents=endpoint_exponents, kinks=kinks, name=name,
                  grid_size=grid_size)
    raw = Pdq(density, log_density=log_density, **common)
    if not normalize:
        return raw
    mass = raw.integral(lambda u, g, lg: g)
    if not (mass > 0 and math.isfinite(mass)):
        raise PdqError(f"{name}: density must be positive with finite mass")
    lm = math.log(mass)
    scaled_log = None if log_density is None else \
        (lambda u: np.asarray(log_density(u), dtype=float) - lm)
    return Pdq(lambda u: np.asarray(density(u), dtype=float) / mass, log_density=scaled_log,
               **common)


# ---------------------------------------------------------------------------
# the transform


def _pdq_of_distribution(dist: Distribution, numeric: bool, grid_size) -> Pdq:
    fam = dist.family
    try:
        kappa = dist.kappa
    except DivergentIntegralError as exc:
        raise NotSquareIntegrableError(
            f"not square-integrable: pdQ of {dist} does not exist") from exc
    if not math.isfinite(kappa):
        raise NotSquareIntegrableError(f"not square-integrable: pdQ of {dist} does not exist")
    sup = dist.sup_pdf / kappa
    common = dict(kappa_parent=kappa, sup_norm=sup, endpoint_exponents=fam.pdq_exponents,
                  kinks=fam.kinks, name=f"{dist}*", grid_size=grid_size)
    if fam.pdq is not None and not numeric:
        upper = None
        if fam.dq_upper is not None:
            upper = lambda t: dist.density_quantile_upper(t) / kappa
        return Pdq(fam.pdq, log_density=fam.pdq_log, density_upper=upper, cdf=fam.pdq_cdf,
                   quantile=fam.pdq_quantile, **common)
    lk = math.log(kappa)

    def log_density(u):
        with np.errstate(divide="ignore"):
            return np.log(dist.density_quantile(u)) - lk

    return Pdq(lambda u: dist.density_quantile(u) / kappa, log_density=log_density,
               density_upper=lambda t: dist.density_quantile_upper(t) / kappa, **common)


def star_transform(src, *, numeric: bool = False, grid_size: int | None = None) -> Pdq:
    """pdQ of a distribution, or the next *-iterate of a pdQ.

    For a `Distribution` f this is ``f*(u) = fQ(u) / kappa`` with
    ``kappa = int_0^1 fQ(u) du``; an attached closed form is used when one
    is attached unless ``numeric`` is set. For a `Pdq` g the result is
    ``g*(u) = g(G^{-1}(u)) / kappa`` with ``kappa = int g**2``, computed by
    moving g's chart nodes to ``G(u)``; the result is grid-backed.

    Raises
    ------
    NotSquareIntegrableError
        When the required kappa is infinite.
    """
    if isinstance(src, Distribution):
        return _pdq_of_distribution(src, numeric, grid_size)
    if not isinstance(src, Pdq):
        raise TypeError("star_transform expects a Distribution or a Pdq")
    try:
        chart, kappa = src.chart.transport()
    except DivergentIntegralError as exc:
        raise NotSquareIntegrableError(
            f"not square-integrable: pdQ of {src.name} does not exist ({exc})") from exc
    src._cache.setdefault("kappa", kappa)
    sup = src._sup / kappa if src._sup is not None else None
    exps = tuple(None if p is None else p / (p + 1.0) for p in src.endpoint_exponents)
    kinks = tuple(float(src.cdf(k)) for k in src.kinks)
    return Pdq(None, chart=chart, kappa_parent=kappa, sup_norm=sup,
               endpoint_exponents=exps, kinks=kinks, name=f"{src.name}*")


# ---------------------------------------------------------------------------
# *-order


def _power_shape(dist: Distribution) -> float | None:
    if dist.name == "power":
        return dist.params["b"]
    if dist.name == "beta" and dist.params.get("b") == 1.0:
        return dist.params["a"]
    if dist.name == "uniform":
        return 1.0
    return None


def _moment_finite(dist: Distribution, n: int) -> tuple[bool, str]:
    """Is ``mu_n = int_0^1 fQ**(n-1) du`` finite? Returns (finite, method)."""
    lm = None
    try:
        lm = dist.log_moment(n)
    except DivergentIntegralError:
        return False, "moment_test"
    if lm is not None:
        return math.isfinite(lm), "moment_test"
    p0, p1 = dist.pdq_exponents
    if p0 is not None and p1 is not None:
        return all((n - 1) * p + 1 > 0 for p in (p0, p1)), "exponent_test"
    try:
        val = dist.u_integral(lambda y: y ** (n - 1))
    except DivergentIntegralError:
        return False, "moment_test"
    return math.isfinite(val), "moment_test"


def star_order(dist: Distribution, max_n: int = 10) -> StarOrder:
    """*-order of `dist`: the largest n for which ``f^{n*}`` exists.

    Power(b) laws use the exact shape recursion ``b -> 2 - 1/b`` (the next
    pdQ exists while the shape exceeds 1/2). Other laws use the fact that
    ``f^{n*}`` exists exactly when ``mu_{n+1}`` is finite, checking the
    power integrals up to ``mu_{max_n + 2}``.
    """
    if max_n < 1:
        raise ValueError("max_n must be at least 1")
    b = _power_shape(dist)
    if b is not None:
        if b >= 1.0:
            return StarOrder(None, None, "closed_form")
        # exact rational arithmetic: 3/4 -> 2/3 -> 1/2 must stop at 1/2 exactly
        b = Fraction(repr(float(b)))
        order = 0
        while b > Fraction(1, 2):
            order += 1
            b = 2 - 1 / b
        return StarOrder(order, None, "closed_form")
    method = "moment_test"
    for m in range(2, max_n + 3):
        finite, method = _moment_finite(dist, m)
        if not finite:
            return StarOrder(m - 2, max_n, method)
    return StarOrder(None, max_n, method)


# ---------------------------------------------------------------------------
# reconstruction


def reconstruct_cdf(g: Pdq) -> Distribution:
    """A law on [0, 1] whose pdQ is `g`.

    With ``H(x) = int_0^x 1/g`` the cdf is ``F(x) = H^{-1}(H(1) x)``; its
    density quantile is ``H(1) g(u)``. Requires ``int_0^1 1/g < infinity``.

    Raises
    ------
    ReconstructionError
        When ``int 1/g`` diverges.
    """
    ch = g.chart
    try:
        total, left, right = ch.power_integral(-1.0, cumulative=True)
    except DivergentIntegralError as exc:
        raise ReconstructionError(
            f"reconstruction condition fails: integral of 1/g diverges for {g.name}") from exc
    idx = ch._usable()
    u = ch.u[idx]
    Hn = np.where(u <= 0.5, left[idx], total - right[idx])
    ok = (Hn > 0) & (Hn < total)
    idx, Hn = idx[ok], Hn[ok]
    keep = _increasing(Hn)
    idx, Hn = idx[keep], Hn[keep]
    nodes = np.concatenate([[0.0], ch.u[idx], [1.0]])
    vals = np.concatenate([[0.0], Hn, [total]])
    slopes = np.concatenate([[math.nan], np.exp(-ch.lg[idx]), [math.nan]])
    H = monotone_interpolant(GridFunction(nodes, vals, slopes))

    def quantile(v):
        return H(np.clip(np.asarray(v, dtype=float), 0.0, 1.0)) / total

    def cdf(x):
        return H.inverse(total * np.clip(np.asarray(x, dtype=float), 0.0, 1.0))

    def pdf(x):
        return total * g.density(cdf(x))

    sup = total * g.sup_norm if g._sup is not None or not g.grid_backed else math.inf
    fam = Family(Interval(0.0, 1.0), pdf, cdf, quantile,
                 pdq_exponents=g.endpoint_exponents, sup_pdf=sup)
    return Distribution(f"reconstructed({g.name})", {}, fam)


# ---------------------------------------------------------------------------
# CSV


def write_pdq_csv(pdq: Pdq, dest=None) -> str | None:
    """Write the pdQ as ``u,density`` rows at its chart nodes."""
    ch = pdq.chart
    idx = ch._usable()
    # keep nodes whose u, once written as a float, still pins down 1 - u
    t_float = 1.0 - ch.u[idx]
    idx = idx[np.abs(t_float - ch.t[idx]) <= 1e-9 * ch.t[idx]]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["u", "density"])
    for ui, gi in zip(ch.u[idx], np.exp(ch.lg[idx])):
        w.writerow([repr(float(ui)), repr(float(gi))])
    text = buf.getvalue()
    if dest is None:
        return text
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        Path(dest).write_text(text)
    return None


def read_pdq_csv(src, name: str | None = None, grid_size: int | None = None) -> Pdq:
    """Read a ``u,density`` CSV into a normalised pdQ.

    Between nodes ``ln g`` is interpolated monotonically in ``logit(u)``;
    beyond the outermost nodes it is extended linearly, i.e. as a power
    law whose exponent is fitted to the outer 1% of nodes.
    """
    if hasattr(src, "read"):
        text = src.read()
        label = name or "csv"
    else:
        text = Path(src).read_text()
        label = name or Path(src).stem
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise PdqError("empty pdQ file")
    header = [c.strip().lower() for c in rows[0]]
    if header[:2] != ["u", "density"]:
        raise PdqError("pdQ CSV must have header 'u,density'")
    try:
        data = np.array([[float(a), float(b)] for a, b, *_ in rows[1:] if a.strip()])
    except ValueError as exc:
        raise PdqError(f"malformed pdQ CSV: {exc}") from exc
    if data.ndim != 2 or data.shape[0] < 4:
        raise PdqError("pdQ CSV needs at least 4 rows")
    u, g = data[:, 0], data[:, 1]
    inside = (u > 0) & (u < 1)
    u, g = u[inside], g[inside]
    if np.any(np.diff(u) <= 0):
        raise MonotonicityError("pdQ CSV: u must be strictly increasing")
    if np.any(g <= 0) or not np.all(np.isfinite(g)):
        raise PdqError("pdQ CSV: density must be positive and finite")
    s = np.log(u) - np.log1p(-u)
    lg = np.log(g)
    interp = PchipInterpolator(s, lg, extrapolate=False)
    k = max(3, int(0.01 * s.size))
    slope_lo = np.polyfit(s[:k], lg[:k], 1)[0]
    slope_hi = np.polyfit(s[-k:], lg[-k:], 1)[0]

    def from_logit(z):
        out = interp(np.clip(z, s[0], s[-1]))
        out = np.where(z < s[0], lg[0] + slope_lo * (z - s[0]), out)
        return np.where(z > s[-1], lg[-1] + slope_hi * (z - s[-1]), out)

    def log_density(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return from_logit(np.log(x) - np.log1p(-x))

    def log_upper(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            return from_logit(np.log1p(-t) - np.log(t))

    raw = Pdq(lambda x: np.exp(log_density(x)), log_density=log_density,
              density_upper=lambda t: np.exp(log_upper(t)), name=label, grid_size=grid_size)
    lm = math.log(raw.chart.power_integral(1.0))
    return Pdq(lambda x: np.exp(log_density(x) - lm),
               log_density=lambda x: log_density(x) - lm,
               density_upper=lambda t: np.exp(log_upper(t) - lm),
               name=label, grid_size=grid_size)
