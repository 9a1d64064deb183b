"""Kullback-Leibler divergences between pdQs and distances from uniformity.

For pdQs ``f1`` and ``f2`` on [0, 1] the directed divergence is
``I(f1:f2) = int f1 ln(f1 / f2)``. Against the uniform density it reduces to
``I(U:f) = -int ln f`` and ``I(f:U) = int f ln f``; their sum ``J`` gives the
semi-metric ``d = sqrt(J)``, and the pair ``(sqrt I(U:f), sqrt I(f:U))``
places a pdQ on a map whose Euclidean norm is its distance from uniformity.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .catalog import Distribution, FamilyGrid
from .errors import DivergentIntegralError, PdqError
from .numerics import find_root, integrate
from .pdq import Pdq, star_transform

__all__ = ["kl_divergence", "UniformityProfile", "uniformity_profile", "semi_metric",
           "MapLocus", "LocusPoint", "map_locus", "locus_crossing", "write_locus_csv"]

# densities below this are treated as zero, where f ln f -> 0
_UNDERFLOW = 1e-300


def _is_uniform(f: Pdq) -> bool:
    return f.name == "uniform" and f.endpoint_exponents == (0.0, 0.0) \
        and f.kappa_parent is None


def _as_pdq(f) -> Pdq:
    return star_transform(f) if isinstance(f, Distribution) else f


def _kl_terms(lg1, lg2):
    with np.errstate(all="ignore"):
        g1 = np.exp(lg1)
        out = g1 * (lg1 - lg2)
    return np.where(g1 < _UNDERFLOW, 0.0, out)


def kl_divergence(f1, f2, tol: float | None = None) -> float:
    """Directed divergence ``I(f1:f2) = int_0^1 f1 ln(f1 / f2)``.

    Parameters
    ----------
    f1, f2 : Pdq or Distribution
        Distributions are replaced by their pdQs.
    tol : float, optional
        Absolute quadrature tolerance.

    Returns
    -------
    float
        The divergence, or ``inf`` when the integral diverges.

    Raises
    ------
    QuadratureError
        When the quadrature fails for reasons other than divergence.
    """
    f1, f2 = _as_pdq(f1), _as_pdq(f2)
    if f1 is f2:
        return 0.0
    try:
        if _is_uniform(f1):
            return -f2.integral(lambda u, g, lg: lg, tol=tol)
        if _is_uniform(f2):
            return f1.integral(lambda u, g, lg: np.where(g < _UNDERFLOW, 0.0, g * lg), tol=tol)
        if f1.grid_backed:
            return f1.chart.integral(lambda u, g, lg: _kl_terms(lg, f2.log_density(u)))
        lo = integrate(lambda u: _kl_terms(f1.log_density(u), f2.log_density(u)),
                       (0.0, 0.5), endpoint_hints=True, tol=tol)
        hi = integrate(lambda t: _kl_terms(f1.log_density_upper(t), f2.log_density_upper(t)),
                       (0.0, 0.5), endpoint_hints=True, tol=tol)
        return lo + hi
    except DivergentIntegralError:
        return math.inf


@dataclass(frozen=True)
class UniformityProfile:
    """Divergences of a pdQ from uniformity and its map coordinates."""

    i_u_f: float
    i_f_u: float

    @property
    def j(self) -> float:
        return self.i_u_f + self.i_f_u

    @property
    def s1(self) -> float:
        return math.sqrt(max(self.i_u_f, 0.0)) + 0.0

    @property
    def s2(self) -> float:
        return math.sqrt(max(self.i_f_u, 0.0)) + 0.0

    @property
    def distance(self) -> float:
        return math.sqrt(max(self.j, 0.0)) + 0.0

    @property
    def divergent(self) -> bool:
        return math.isinf(self.j)

    def as_dict(self) -> dict:
        return {"i_u_f": self.i_u_f, "i_f_u": self.i_f_u, "j": self.j,
                "s1": self.s1, "s2": self.s2, "distance": self.distance}


def uniformity_profile(f, tol: float | None = None) -> UniformityProfile:
    """Both directed divergences between a pdQ and the uniform density.

    >>> round(uniformity_profile(make_family("normal")).distance, 6)
    0.5
    """
    f = _as_pdq(f)
    try:
        i_uf = -f.integral(lambda u, g, lg: lg, tol=tol)
    except DivergentIntegralError:
        i_uf = math.inf
    try:
        i_fu = f.integral(lambda u, g, lg: np.where(g < _UNDERFLOW, 0.0, g * lg), tol=tol)
    except DivergentIntegralError:
        i_fu = math.inf
    return UniformityProfile(i_uf, i_fu)


def semi_metric(f1, f2, tol: float | None = None) -> float:
    """``d(f1, f2) = sqrt(I(f1:f2) + I(f2:f1))``; ``inf`` if either diverges."""
    f1, f2 = _as_pdq(f1), _as_pdq(f2)
    if f1 is f2:
        return 0.0
    j = kl_divergence(f1, f2, tol) + kl_divergence(f2, f1, tol)
    return math.sqrt(max(j, 0.0))


@dataclass(frozen=True)
class LocusPoint:
    param: float
    s1: float
    s2: float
    distance: float
    error: str | None = None


@dataclass
class MapLocus:
    """Map coordinates of a family traced over one parameter."""

    family: str
    param: str
    points: list[LocusPoint] = field(default_factory=list)

    def valid(self) -> list[LocusPoint]:
        return [p for p in self.points if p.error is None]

    def crossing(self, distance: float) -> list[float]:
        """Parameter values where the locus crosses the given distance.

        Uses linear interpolation between consecutive valid points;
        `locus_crossing` refines a crossing by root finding.
        """
        pts = [p for p in self.valid() if math.isfinite(p.distance)]
        out = []
        for a, b in zip(pts[:-1], pts[1:]):
            da, db = a.distance - distance, b.distance - distance
            if da == 0:
                out.append(a.param)
            elif da * db < 0:
                out.append(a.param + (b.param - a.param) * da / (da - db))
        return out

    def to_csv(self, dest=None) -> str | None:
        return write_locus_csv([self], dest)


def map_locus(grid: FamilyGrid, tol: float | None = None) -> MapLocus:
    """Trace ``(param, s1, s2, distance)`` over a family grid.

    A parameter value whose pdQ does not exist, or whose divergences cannot
    be computed, is kept with its error message and NaN coordinates.
    """
    locus = MapLocus(grid.family, grid.param)
    for v in grid.values:
        try:
            dist = next(iter(FamilyGrid(grid.family, grid.param, (v,), grid.fixed)
                             .distributions()))[1]
            prof = uniformity_profile(star_transform(dist), tol)
            locus.points.append(LocusPoint(float(v), prof.s1, prof.s2, prof.distance))
        except (PdqError, ValueError) as exc:
            nan = math.nan
            locus.points.append(LocusPoint(float(v), nan, nan, nan, str(exc)))
    return locus


def locus_crossing(family: str, param: str, distance: float, bracket: tuple[float, float],
                   fixed: dict | None = None, tol: float = 1e-10) -> float:
    """Parameter value in `bracket` at which the family's distance from uniformity equals `distance`."""
    fixed = dict(fixed or {})

    def gap(v):
        dist = next(iter(FamilyGrid(family, param, (float(v),), fixed).distributions()))[1]
        return uniformity_profile(star_transform(dist)).distance - distance

    return find_root(gap, bracket, tol=tol)


def _fmt(x: float) -> str:
    return repr(float(x))


def write_locus_csv(loci: Iterable[MapLocus], dest=None) -> str | None:
    """Write ``family,param,s1,s2,distance`` rows; returns the text if `dest` is None."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["family", "param", "s1", "s2", "distance"])
    for loc in loci:
        for p in loc.points:
            w.writerow([loc.family, _fmt(p.param), _fmt(p.s1), _fmt(p.s2), _fmt(p.distance)])
    text = buf.getvalue()
    if dest is None:
        return text
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        Path(dest).write_text(text)
    return None
