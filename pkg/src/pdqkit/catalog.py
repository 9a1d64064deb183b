"""Closed-form distribution families and their density quantiles.

Each family is defined in standard form (location 0, scale 1); `make_family`
adds location and scale. A family supplies pdf, cdf and quantile, the
density quantile ``fQ(u) = f(Q(u))``, and whatever closed forms are known:
the normaliser ``kappa = int f**2``, the power integrals
``mu_n = int f**n`` (as logs), and the pdQ ``f*(u) = fQ(u) / kappa`` with
its cdf and quantile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy import special as sc
from scipy import stats

from .errors import DomainError, ParameterError
from .numerics import Interval, integrate, invert_monotone

__all__ = ["Distribution", "Family", "FAMILIES", "make_family", "parse_family_spec",
           "evaluate", "FamilyGrid"]

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)
_SQRTPI = math.sqrt(math.pi)


def _phi(z):
    return np.exp(-0.5 * z * z) / _SQRT2PI


@dataclass(frozen=True)
class Family:
    """Standard-form description of a family; internal to the catalog."""

    support: Interval
    pdf: Callable
    cdf: Callable
    quantile: Callable
    density_quantile: Callable | None = None
    dq_upper: Callable | None = None
    kappa: float | None = None
    log_moment: Callable[[int], float] | None = None
    pdq: Callable | None = None
    pdq_log: Callable | None = None
    pdq_cdf: Callable | None = None
    pdq_quantile: Callable | None = None
    pdq_exponents: tuple = (None, None)
    kinks: tuple = ()
    sup_pdf: float = math.inf


@dataclass(frozen=True)
class Distribution:
    """A continuous law given by pdf, cdf and quantile on a real support.

    Instances are immutable. Attributes prefixed ``pdq_`` describe the
    pdQ when it has a closed form; they are ``None`` otherwise.
    """

    name: str
    params: Mapping[str, float]
    family: Family = field(repr=False)
    loc: float = 0.0
    scale: float = 1.0

    # -- the law itself -------------------------------------------------

    @property
    def support(self) -> Interval:
        s = self.family.support
        return Interval(self.loc + self.scale * s.lo, self.loc + self.scale * s.hi)

    @property
    def bounded_pdf(self) -> bool:
        return math.isfinite(self.family.sup_pdf)

    @property
    def sup_pdf(self) -> float:
        return self.family.sup_pdf / self.scale

    def _z(self, x):
        return (np.asarray(x, dtype=float) - self.loc) / self.scale

    def pdf(self, x):
        z = self._z(x)
        s = self.family.support
        with np.errstate(all="ignore"):
            out = np.where((z > s.lo) & (z < s.hi), self.family.pdf(z), 0.0)
        return out / self.scale

    def cdf(self, x):
        z = self._z(x)
        s = self.family.support
        with np.errstate(all="ignore"):
            out = self.family.cdf(np.clip(z, s.lo, s.hi))
        return np.where(z <= s.lo, 0.0, np.where(z >= s.hi, 1.0, out))

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        with np.errstate(all="ignore"):
            return self.loc + self.scale * self.family.quantile(u)

    def density_quantile(self, u):
        """``f(Q(u))`` computed without forming Q where a stable form exists."""
        u = np.asarray(u, dtype=float)
        with np.errstate(all="ignore"):
            if self.family.density_quantile is not None:
                out = self.family.density_quantile(u)
            else:
                out = self.family.pdf(self.family.quantile(u))
        return out / self.scale

    def density_quantile_upper(self, t):
        """``fQ(1 - t)``, accurate for tiny `t` where the family allows it."""
        t = np.asarray(t, dtype=float)
        with np.errstate(all="ignore"):
            if self.family.dq_upper is not None:
                out = self.family.dq_upper(t)
            else:
                out = self.density_quantile(1.0 - t) * self.scale
        return out / self.scale

    def u_integral(self, h: Callable = lambda y: y, tol: float | None = None) -> float:
        """``int_0^1 h(fQ(u)) du`` with both endpoints resolved in floating point.

        The upper half is integrated in the complement ``t = 1 - u`` so that
        singular behaviour at ``u = 1`` keeps full relative precision.
        """
        cuts = [k for k in self.family.kinks if 0 < k < 1 and k != 0.5]
        lo = integrate(lambda u: h(self.density_quantile(u)), (0.0, 0.5),
                       endpoint_hints=True, tol=tol, points=[k for k in cuts if k < 0.5])
        hi = integrate(lambda t: h(self.density_quantile_upper(t)), (0.0, 0.5),
                       endpoint_hints=True, tol=tol, points=[1 - k for k in cuts if k > 0.5])
        return lo + hi

    # -- square-integrability and power integrals ------------------------

    @property
    def kappa(self) -> float:
        """``int f(x)**2 dx = int_0^1 fQ(u) du``."""
        k = self.family.kappa
        if k is None:
            return self.u_integral()
        return k / self.scale

    def log_moment(self, n: int) -> float | None:
        """Closed-form ``log int f**n``, or None when none is known."""
        if self.family.log_moment is None:
            return None
        return self.family.log_moment(n) + (1 - n) * math.log(self.scale)

    # -- closed-form pdQ ---------------------------------------------------

    @property
    def pdq_closed_form(self) -> Callable | None:
        return self.family.pdq

    @property
    def pdq_exponents(self) -> tuple:
        return self.family.pdq_exponents

    def __str__(self):
        if not self.params:
            return self.name
        return self.name + ":" + ",".join(f"{k}={v:g}" for k, v in self.params.items())


# ---------------------------------------------------------------------------
# families


def _uniform():
    one = lambda u: np.ones_like(np.asarray(u, dtype=float))
    ident = lambda u: np.asarray(u, dtype=float)
    return Family(Interval(0.0, 1.0), one, ident, ident, one, one, kappa=1.0,
                  log_moment=lambda n: 0.0, pdq=one,
                  pdq_log=lambda u: np.zeros_like(np.asarray(u, dtype=float)),
                  pdq_cdf=ident, pdq_quantile=ident, pdq_exponents=(0.0, 0.0), sup_pdf=1.0)


def _normal():
    def pdq_log(u):
        z = sc.ndtri(u)
        return 0.5 * math.log(2.0) - 0.5 * z * z

    return Family(
        Interval(-math.inf, math.inf), _phi, sc.ndtr, sc.ndtri,
        lambda u: _phi(sc.ndtri(u)), lambda t: _phi(sc.ndtri(t)),
        kappa=1.0 / (2.0 * _SQRTPI),
        log_moment=lambda n: -0.5 * (n - 1) * math.log(2 * math.pi) - 0.5 * math.log(n),
        pdq=lambda u: np.exp(pdq_log(u)),
        pdq_log=pdq_log,
        pdq_cdf=lambda t: sc.ndtr(_SQRT2 * sc.ndtri(t)),
        pdq_quantile=lambda v: sc.ndtr(sc.ndtri(v) / _SQRT2),
        pdq_exponents=(1.0, 1.0),
        sup_pdf=1.0 / _SQRT2PI)


def _logistic():
    return Family(
        Interval(-math.inf, math.inf),
        lambda x: np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))) ** 2,
        sc.expit, sc.logit,
        lambda u: u * (1.0 - u), lambda t: t * (1.0 - t),
        kappa=1.0 / 6.0,
        log_moment=lambda n: sc.betaln(n, n),
        pdq=lambda u: 6.0 * u * (1.0 - u),
        pdq_log=lambda u: math.log(6.0) + np.log(u) + np.log1p(-u),
        pdq_cdf=lambda t: t * t * (3.0 - 2.0 * t),
        pdq_exponents=(1.0, 1.0),
        sup_pdf=0.25)


def _laplace():
    def quantile(u):
        return np.where(u <= 0.5, np.log(2.0 * u), -np.log(2.0 * (1.0 - u)))

    def cdf(x):
        return np.where(x < 0, 0.5 * np.exp(np.minimum(x, 0)), 1.0 - 0.5 * np.exp(-np.maximum(x, 0)))

    mn = lambda u: np.minimum(u, 1.0 - u)
    return Family(
        Interval(-math.inf, math.inf), lambda x: 0.5 * np.exp(-np.abs(x)), cdf, quantile, mn, mn,
        kappa=0.25,
        log_moment=lambda n: (1 - n) * math.log(2.0) - math.log(n),
        # the density quantile min(u, 1-u) integrates to 1/4, so the pdQ is 4 min(u, 1-u)
        pdq=lambda u: 4.0 * mn(u),
        pdq_log=lambda u: math.log(4.0) + np.log(mn(u)),
        pdq_cdf=lambda t: np.where(t <= 0.5, 2.0 * t * t, 1.0 - 2.0 * (1.0 - t) ** 2),
        pdq_quantile=lambda v: np.where(v <= 0.5, np.sqrt(v / 2.0), 1.0 - np.sqrt((1.0 - v) / 2.0)),
        pdq_exponents=(1.0, 1.0), kinks=(0.5,), sup_pdf=0.5)


def _t(nu: float):
    if nu <= 0:
        raise ParameterError("t requires nu > 0")
    c = math.exp(sc.gammaln((nu + 1) / 2) - sc.gammaln(nu / 2)) / math.sqrt(nu * math.pi)

    def log_moment(n):
        return n * math.log(c) + 0.5 * math.log(nu) + sc.betaln(0.5, n * (nu + 1) / 2 - 0.5)

    kw = {}
    if nu == 2:
        kw = dict(
            pdq=lambda u: 2.0 ** 7 * (u * (1.0 - u)) ** 1.5 / (3.0 * math.pi),
            pdq_log=lambda u: 7 * math.log(2.0) + 1.5 * (np.log(u) + np.log1p(-u)) - math.log(3 * math.pi),
        )
        quantile = lambda u: (2.0 * u - 1.0) / np.sqrt(2.0 * u * (1.0 - u))
        dq = lambda u: 2.0 ** 1.5 * (u * (1.0 - u)) ** 1.5
        pdf = lambda x: (2.0 + x * x) ** -1.5
        cdf = lambda x: 0.5 + x / (2.0 * np.sqrt(2.0 + x * x))
    else:
        law = stats.t(nu)
        pdf, cdf, quantile = law.pdf, law.cdf, law.ppf
        dq = None
    p = 1.0 + 1.0 / nu
    if dq is None:
        dq = lambda u: law.pdf(law.ppf(u))
    return Family(Interval(-math.inf, math.inf), pdf, cdf, quantile, dq, dq,
                  kappa=math.exp(log_moment(2)), log_moment=log_moment,
                  pdq_exponents=(p, p), sup_pdf=c, **kw)


def _cauchy():
    def log_moment(n):
        return -n * math.log(math.pi) + 0.5 * math.log(math.pi) + sc.gammaln(n - 0.5) - sc.gammaln(n)

    return Family(
        Interval(-math.inf, math.inf),
        lambda x: 1.0 / (math.pi * (1.0 + x * x)),
        lambda x: 0.5 + np.arctan(x) / math.pi,
        lambda u: np.tan(math.pi * (u - 0.5)),
        lambda u: np.sin(math.pi * u) ** 2 / math.pi,
        lambda t: np.sin(math.pi * t) ** 2 / math.pi,
        kappa=1.0 / (2.0 * math.pi),
        log_moment=log_moment,
        pdq=lambda u: 2.0 * np.sin(math.pi * u) ** 2,
        pdq_log=lambda u: math.log(2.0) + 2.0 * np.log(np.sin(math.pi * u)),
        pdq_cdf=lambda t: t - np.sin(2.0 * math.pi * t) / (2.0 * math.pi),
        pdq_exponents=(2.0, 2.0),
        sup_pdf=1.0 / math.pi)


def _exponential():
    return Family(
        Interval(0.0, math.inf),
        lambda x: np.exp(-x), lambda x: -np.expm1(-x), lambda u: -np.log1p(-u),
        lambda u: 1.0 - u, lambda t: np.asarray(t, dtype=float),
        kappa=0.5,
        log_moment=lambda n: -math.log(n),
        pdq=lambda u: 2.0 * (1.0 - u),
        pdq_log=lambda u: math.log(2.0) + np.log1p(-u),
        pdq_cdf=lambda t: 1.0 - (1.0 - t) ** 2,
        pdq_quantile=lambda v: 1.0 - np.sqrt(1.0 - v),
        pdq_exponents=(0.0, 1.0),
        sup_pdf=1.0)


def _reflected_exponential():
    """f(x) = e^x on x < 0, whose pdQ is 2u."""
    return Family(
        Interval(-math.inf, 0.0),
        lambda x: np.exp(x), lambda x: np.exp(x), lambda u: np.log(u),
        lambda u: np.asarray(u, dtype=float), lambda t: 1.0 - np.asarray(t, dtype=float),
        kappa=0.5,
        log_moment=lambda n: -math.log(n),
        pdq=lambda u: 2.0 * np.asarray(u, dtype=float),
        pdq_log=lambda u: math.log(2.0) + np.log(u),
        pdq_cdf=lambda t: np.asarray(t, dtype=float) ** 2,
        pdq_quantile=lambda v: np.sqrt(v),
        pdq_exponents=(1.0, 0.0),
        sup_pdf=1.0)


def _gumbel():
    return Family(
        Interval(-math.inf, math.inf),
        lambda x: np.exp(-x - np.exp(-x)),
        lambda x: np.exp(-np.exp(-x)),
        lambda u: -np.log(-np.log(u)),
        lambda u: -u * np.log(u),
        lambda t: -(1.0 - t) * np.log1p(-t),
        kappa=0.25,
        log_moment=lambda n: sc.gammaln(n) - n * math.log(n),
        pdq=lambda u: -4.0 * u * np.log(u),
        pdq_log=lambda u: math.log(4.0) + np.log(u) + np.log(-np.log(u)),
        pdq_exponents=(1.0, 1.0),
        sup_pdf=math.exp(-1.0))


def _lognormal(sigma: float):
    if sigma <= 0:
        raise ParameterError("lognormal requires sigma > 0")
    s = sigma

    def pdf(x):
        with np.errstate(divide="ignore"):
            return np.where(x > 0, _phi(np.log(x) / s) / (s * x), 0.0)

    def log_moment(n):
        return ((1 - n) * math.log(s) - 0.5 * n * math.log(2 * math.pi)
                + 0.5 * math.log(2 * math.pi / n) + (n - 1) ** 2 * s * s / (2 * n))

    def pdq_log(u):
        z = sc.ndtri(u)
        return (math.log(2 * _SQRTPI) - s * s / 4 - 0.5 * math.log(2 * math.pi)
                - 0.5 * z * z - s * z)

    return Family(
        Interval(0.0, math.inf), pdf,
        lambda x: sc.ndtr(np.log(np.maximum(x, 1e-300)) / s),
        lambda u: np.exp(s * sc.ndtri(u)),
        lambda u: _phi(sc.ndtri(u)) * np.exp(-s * sc.ndtri(u)) / s,
        lambda t: _phi(sc.ndtri(t)) * np.exp(s * sc.ndtri(t)) / s,
        kappa=math.exp(s * s / 4) / (2 * _SQRTPI * s),
        log_moment=log_moment,
        pdq=lambda u: np.exp(pdq_log(u)),
        pdq_log=pdq_log,
        pdq_cdf=lambda t: sc.ndtr(_SQRT2 * sc.ndtri(t) + s / _SQRT2),
        pdq_quantile=lambda v: sc.ndtr((sc.ndtri(v) - s / _SQRT2) / _SQRT2),
        pdq_exponents=(1.0, 1.0),
        sup_pdf=math.exp(s * s / 2) / (s * _SQRT2PI))


def _pareto(a: float):
    """Pareto Type II (Lomax) with shape a; its pdQ equals the Type I one."""
    if a <= 0:
        raise ParameterError("pareto requires a > 0")
    p = 1.0 + 1.0 / a
    return Family(
        Interval(0.0, math.inf),
        lambda x: a * (1.0 + x) ** (-a - 1.0),
        lambda x: -np.expm1(-a * np.log1p(x)),
        lambda u: np.expm1(-np.log1p(-u) / a),
        lambda u: a * (1.0 - u) ** p,
        lambda t: a * np.asarray(t, dtype=float) ** p,
        kappa=a / (p + 1.0),
        log_moment=lambda n: (n - 1) * math.log(a) - math.log((n - 1) * p + 1.0),
        pdq=lambda u: (p + 1.0) * (1.0 - u) ** p,
        pdq_log=lambda u: math.log(p + 1.0) + p * np.log1p(-u),
        pdq_cdf=lambda t: 1.0 - (1.0 - t) ** (p + 1.0),
        pdq_quantile=lambda v: 1.0 - (1.0 - v) ** (1.0 / (p + 1.0)),
        pdq_exponents=(0.0, p),
        sup_pdf=a)


def _power_moment(b, n):
    e = n * (b - 1.0) + 1.0
    return n * math.log(b) - math.log(e) if e > 0 else math.inf


def _power(b: float):
    if b <= 0.5:
        raise ParameterError("pdQ does not exist: f not square-integrable (power requires b > 1/2)")
    c = 2.0 - 1.0 / b
    p = 1.0 - 1.0 / b
    return Family(
        Interval(0.0, 1.0),
        lambda x: b * x ** (b - 1.0), lambda x: x ** b, lambda u: u ** (1.0 / b),
        lambda u: b * u ** p,
        lambda t: b * np.exp(p * np.log1p(-np.asarray(t, dtype=float))),
        kappa=b * b / (2.0 * b - 1.0),
        log_moment=lambda n: _power_moment(b, n),
        pdq=lambda u: c * u ** p,
        pdq_log=lambda u: math.log(c) + p * np.log(u),
        pdq_cdf=lambda t: t ** c,
        pdq_quantile=lambda v: v ** (1.0 / c),
        pdq_exponents=(p, 0.0),
        sup_pdf=b if b >= 1 else math.inf)


def _beta(a: float, b: float):
    if a <= 0.5 or b <= 0.5:
        raise ParameterError("pdQ does not exist: beta requires a > 1/2 and b > 1/2")
    if b == 1.0:
        return _power(a)
    law = stats.beta(a, b)
    lb = sc.betaln(a, b)

    def log_moment(n):
        x, y = n * (a - 1) + 1, n * (b - 1) + 1
        if x <= 0 or y <= 0:
            return math.inf
        return sc.betaln(x, y) - n * lb

    mirror = stats.beta(b, a)

    def small_log_x(law_, shape, v):
        # ppf underflows for tiny v; there x**shape ~ v * shape * B(a, b)
        with np.errstate(divide="ignore"):
            asym = (np.log(v) + math.log(shape) + lb) / shape
            return np.where(asym < -200.0, asym, np.log(law_.ppf(v)))

    def dq(u):
        u = np.asarray(u, dtype=float)
        lower = u <= 0.5
        lx_lo = small_log_x(law, a, np.where(lower, u, 0.5))
        lxc_hi = small_log_x(mirror, b, np.where(lower, 0.5, 1.0 - u))
        lx = np.where(lower, lx_lo, np.log1p(-np.exp(lxc_hi)))
        lxc = np.where(lower, np.log1p(-np.exp(lx_lo)), lxc_hi)
        return np.exp((a - 1) * lx + (b - 1) * lxc - lb)

    def dq_upper(t):
        t = np.asarray(t, dtype=float)
        lxc = small_log_x(mirror, b, np.minimum(t, 0.5))
        lx = np.log1p(-np.exp(lxc))
        return np.where(t <= 0.5, np.exp((a - 1) * lx + (b - 1) * lxc - lb), dq(1.0 - t))

    if a >= 1 and b >= 1:
        mode = (a - 1) / (a + b - 2) if a + b > 2 else 0.5
        sup = float(law.pdf(mode))
    else:
        sup = math.inf
    return Family(Interval(0.0, 1.0), law.pdf, law.cdf, law.ppf, dq, dq_upper,
                  kappa=math.exp(log_moment(2)), log_moment=log_moment,
                  pdq_exponents=(1 - 1 / a, 1 - 1 / b), sup_pdf=sup)


def _gamma(k: float):
    if k <= 0.5:
        raise ParameterError("pdQ does not exist: gamma requires shape k > 1/2")
    lg = sc.gammaln(k)

    def log_moment(n):
        m = n * (k - 1.0) + 1.0
        if m <= 0:
            return math.inf
        return sc.gammaln(m) - n * lg - m * math.log(n)

    def dq(u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            # gammaincinv underflows for tiny u; there x**k ~ u * Gamma(k + 1)
            asym = (np.log(u) + sc.gammaln(k + 1.0)) / k
            lx = np.where(asym < -200.0, asym, np.log(sc.gammaincinv(k, u)))
        return np.exp((k - 1) * lx - np.exp(lx) - lg)

    def dq_upper(t):
        x = sc.gammainccinv(k, np.asarray(t, dtype=float))
        return np.exp((k - 1) * np.log(x) - x - lg)

    sup = math.exp((k - 1) * math.log(k - 1) - (k - 1) - lg) if k > 1 else (1.0 if k == 1 else math.inf)
    return Family(
        Interval(0.0, math.inf),
        lambda x: np.exp((k - 1) * np.log(x) - x - lg),
        lambda x: sc.gammainc(k, x),
        lambda u: sc.gammaincinv(k, u),
        dq, dq_upper, kappa=math.exp(log_moment(2)), log_moment=log_moment,
        pdq_exponents=(1 - 1 / k, 1.0), sup_pdf=sup)


def _weibull(k: float):
    if k <= 0.5:
        raise ParameterError("pdQ does not exist: weibull requires k > 1/2")

    def log_moment(n):
        m = (n - 1) * (1.0 - 1.0 / k)
        if m + 1 <= 0:
            return math.inf
        return (n - 1) * math.log(k) + sc.gammaln(m + 1) - (m + 1) * math.log(n)

    def dq(u):
        L = -np.log1p(-u)
        return k * (1.0 - u) * L ** (1.0 - 1.0 / k)

    def dq_upper(t):
        t = np.asarray(t, dtype=float)
        return k * t * (-np.log(t)) ** (1.0 - 1.0 / k)

    if k > 1:
        xm = ((k - 1) / k) ** (1 / k)
        sup = k * xm ** (k - 1) * math.exp(-xm ** k)
    else:
        sup = 1.0 if k == 1 else math.inf
    return Family(
        Interval(0.0, math.inf),
        lambda x: k * x ** (k - 1) * np.exp(-x ** k),
        lambda x: -np.expm1(-x ** k),
        lambda u: (-np.log1p(-u)) ** (1.0 / k),
        dq, dq_upper, kappa=math.exp(log_moment(2)), log_moment=log_moment,
        pdq_exponents=(1 - 1 / k, 1.0), sup_pdf=sup)


def _tukey(lam: float):
    if lam == 0:
        return _logistic()
    if lam > 0:
        support = Interval(-1.0 / lam, 1.0 / lam)
    else:
        support = Interval(-math.inf, math.inf)

    def quantile(u):
        u = np.asarray(u, dtype=float)
        return (u ** lam - (1.0 - u) ** lam) / lam

    def dq(u):
        u = np.asarray(u, dtype=float)
        return 1.0 / (u ** (lam - 1.0) + (1.0 - u) ** (lam - 1.0))

    def cdf(x):
        # bisection in logit(u) keeps relative accuracy deep in the tails
        x = np.asarray(x, dtype=float)
        return np.where(x <= 0, lower_tail(x), 1.0 - lower_tail(-x))

    def lower_tail(x):
        s = invert_monotone(lambda z: quantile(sc.expit(z)), -np.abs(x),
                            np.full_like(x, -745.0), np.zeros_like(x), tol=1e-15)
        return sc.expit(s)

    def pdf(x):
        # symmetric law: evaluate in the lower tail where u keeps precision
        return dq(lower_tail(np.asarray(x, dtype=float)))

    def log_moment(n):
        return math.log(integrate(lambda u: dq(u) ** (n - 1), (0.0, 1.0), endpoint_hints=True))

    grid = np.linspace(0.0, 1.0, 2001)[1:-1]
    sup = float(np.max(dq(grid)))
    p = 1.0 - lam if lam < 1 else 0.0
    return Family(support, pdf, cdf, quantile, dq, dq,
                  kappa=integrate(dq, (0.0, 1.0), endpoint_hints=True),
                  log_moment=log_moment, pdq_exponents=(p, p), sup_pdf=sup)


def _y_minus_log1p(y):
    """``y - log1p(y)`` without cancellation for small y."""
    y = np.asarray(y, dtype=float)
    small = np.abs(y) < 0.1
    ys = np.where(small, y, 0.0)
    series = np.zeros_like(ys)
    term = ys
    for k in range(2, 24):
        term = -term * ys
        series -= term / k
    return np.where(small, series, y - np.log1p(np.where(small, 0.0, y)))


def _loglog():
    """f(x) = -ln x on (0, 1): unbounded, yet of infinite *-order."""

    def quantile(u):
        return np.exp(-_solve(-np.log(np.asarray(u, dtype=float))))

    def _solve(L):
        # y = -ln x solves y - log1p(y) = -ln u = L
        y = np.maximum(np.sqrt(2.0 * L), L + np.log1p(L))
        for _ in range(100):
            step = (_y_minus_log1p(y) - L) * (1.0 + y) / y
            y_new = np.maximum(y - step, 0.5 * y)
            if np.all(np.abs(y_new - y) <= 1e-16 * np.maximum(y_new, 1e-300)):
                y = y_new
                break
            y = y_new
        return y

    def dq(u):
        return _solve(-np.log(np.asarray(u, dtype=float)))

    def dq_upper(t):
        return _solve(-np.log1p(-np.asarray(t, dtype=float)))

    return Family(
        Interval(0.0, 1.0),
        lambda x: -np.log(x),
        lambda x: x * (1.0 - np.log(np.maximum(x, 1e-300))),
        quantile, dq, dq_upper,
        kappa=2.0,
        log_moment=lambda n: sc.gammaln(n + 1.0),
        pdq_exponents=(0.0, 0.5),
        sup_pdf=math.inf)


# name -> (builder, parameter names, defaults)
FAMILIES: dict[str, tuple[Callable, tuple[str, ...], dict]] = {
    "uniform": (_uniform, (), {}),
    "normal": (_normal, (), {}),
    "logistic": (_logistic, (), {}),
    "laplace": (_laplace, (), {}),
    "t": (_t, ("nu",), {"nu": 2.0}),
    "cauchy": (_cauchy, (), {}),
    "exponential": (_exponential, (), {}),
    "reflected_exponential": (_reflected_exponential, (), {}),
    "gumbel": (_gumbel, (), {}),
    "lognormal": (_lognormal, ("sigma",), {"sigma": 1.0}),
    "pareto": (_pareto, ("a",), {"a": 1.0}),
    "power": (_power, ("b",), {}),
    "beta": (_beta, ("a", "b"), {"a": 1.0, "b": 1.0}),
    "betasym": (lambda b: _beta(b, b), ("b",), {}),
    "gamma": (_gamma, ("k",), {}),
    "chi2": (lambda nu: _gamma(nu / 2.0), ("nu",), {}),
    "weibull": (_weibull, ("k",), {}),
    "tukey": (_tukey, ("lam",), {}),
    "loglog": (_loglog, (), {}),
}

_ALIASES = {"gaussian": "normal", "exp": "exponential", "expleft": "reflected_exponential", "t2": "t", "ln": "lognormal",
            "lomax": "pareto", "chisq": "chi2", "chi-squared": "chi2", "neglog": "loglog"}


def make_family(name: str, **params: float) -> Distribution:
    """Build a catalog distribution.

    ``loc`` and ``scale`` are accepted by every family; the remaining
    keyword arguments are the family's shape parameters.

    >>> make_family("power", b=2).quantile(0.25)
    array(0.5)
    """
    key = _ALIASES.get(name.lower(), name.lower())
    if key not in FAMILIES:
        raise ParameterError(f"unknown family {name!r}; known: {', '.join(sorted(FAMILIES))}")
    builder, names, defaults = FAMILIES[key]
    loc = float(params.pop("loc", 0.0))
    scale = float(params.pop("scale", 1.0))
    if not scale > 0:
        raise ParameterError("scale must be positive")
    unknown = set(params) - set(names)
    if unknown:
        raise ParameterError(f"family {key!r} has no parameter(s) {sorted(unknown)}")
    values = {**defaults, **{k: float(v) for k, v in params.items()}}
    missing = [n for n in names if n not in values]
    if missing:
        raise ParameterError(f"family {key!r} needs parameter(s) {missing}")
    shape = {n: values[n] for n in names}
    if name.lower() == "t2":
        shape = {"nu": 2.0}
    fam = builder(**shape)
    return Distribution(key, shape, fam, loc, scale)


def parse_family_spec(spec: str) -> Distribution:
    """Parse ``name:key=value,key=value`` (e.g. ``beta:a=2,b=3``)."""
    name, _, rest = spec.partition(":")
    params: dict[str, float] = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        k, eq, v = item.partition("=")
        if not eq:
            raise ParameterError(f"malformed family spec {spec!r}: expected key=value")
        try:
            params[k.strip()] = float(v)
        except ValueError as exc:
            raise ParameterError(f"malformed family spec {spec!r}: {v!r} is not a number") from exc
    return make_family(name.strip(), **params)


def evaluate(dist: Distribution, what: str, arg):
    """Evaluate pdf, cdf, quantile or density_quantile at `arg`."""
    a = np.asarray(arg, dtype=float)
    if what in ("pdf", "cdf"):
        if what == "pdf" and np.any(~dist.support.contains(a)):
            raise DomainError(f"{a} outside support [{dist.support.lo}, {dist.support.hi}]")
        return getattr(dist, what)(a)
    if what in ("quantile", "density_quantile"):
        if np.any((a <= 0) | (a >= 1)):
            raise DomainError(f"{what} needs u in (0, 1), got {arg}")
        return getattr(dist, what)(a)
    raise ValueError(f"unknown quantity {what!r}")


@dataclass(frozen=True)
class FamilyGrid:
    """A family name with the parameter values a locus is traced over."""

    family: str
    param: str
    values: tuple[float, ...]
    fixed: Mapping[str, float] = field(default_factory=dict)

    def distributions(self):
        for v in self.values:
            yield v, make_family(self.family, **{**self.fixed, self.param: v})
