"""Most powerful tests of uniformity against a fixed pdQ alternative.

For H0: X ~ U(0, 1) against H1: X ~ f1 (a pdQ), the Neyman-Pearson test
rejects for large ``l_x = sum ln f1(x_i)``. Under H0 each term has mean
``mu0 = E0 ln f1(U)`` and standard deviation ``sigma0``; under H1, ``mu1``
and ``sigma1``. The normal approximation gives the asymptotic power

    Pi_m = Phi(sqrt(m) (mu1 - mu0) / sigma1 + z_alpha sigma0 / sigma1)

with ``z_alpha = Phi^{-1}(alpha)`` (negative for small alpha).

Critical values can be asymptotic, exact for the normal pdQ (where
``l_x`` is a decreasing function of ``sum Phi^{-1}(x_i)**2 ~ chi2_m``), or
calibrated by Monte Carlo.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import special as sc
from scipy import stats

from .catalog import Distribution
from .errors import DivergentIntegralError, DomainError, ParameterError, TestUndefinedError
from .pdq import Pdq, star_transform

__all__ = ["AltMoments", "alt_moments", "alt_moments_beta", "TestReport", "PowerResult",
           "log_likelihood_stat", "np_test", "asymptotic_power", "normal_alternative_power",
           "exact_normal_power", "power_beta_closed_form", "sample_pdq", "mc_estimate",
           "null_statistics", "z_alpha", "MODES"]

MODES = ("exact_normal", "asymptotic", "monte_carlo")

# sub-stream labels: calibration draws never overlap evaluation draws
_CALIBRATION, _EVALUATION = 0, 1


def z_alpha(alpha: float) -> float:
    """Lower alpha-quantile of the standard normal, ``Phi^{-1}(alpha)``."""
    _check_alpha(alpha)
    return float(sc.ndtri(alpha))


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")


def _as_pdq(alt) -> Pdq:
    return star_transform(alt) if isinstance(alt, Distribution) else alt


# ---------------------------------------------------------------------------
# moments of the log-likelihood


@dataclass(frozen=True)
class AltMoments:
    """Means and standard deviations of ``ln f1`` under H0 and under H1."""

    mu0: float
    sigma0: float
    mu1: float
    sigma1: float

    @property
    def j(self) -> float:
        """Symmetrised divergence ``mu1 - mu0``."""
        return self.mu1 - self.mu0

    @property
    def standardized_j(self) -> float:
        return self.j / self.sigma1

    @property
    def sigma_ratio(self) -> float:
        return self.sigma0 / self.sigma1

    @property
    def is_null(self) -> bool:
        return self.j == 0.0 and self.sigma0 == 0.0 and self.sigma1 == 0.0


def alt_moments(alt, tol: float | None = None) -> AltMoments:
    """Moments of ``ln f1(X)`` under uniform and under ``f1``, by quadrature.

    A law that is Beta(b, 1) (including Power(b)) uses the closed forms.

    Raises
    ------
    TestUndefinedError
        When one of the four integrals diverges.
    """
    if isinstance(alt, Distribution):
        b = _beta_b1_shape(alt)
        if b is not None:
            return alt_moments_beta(b)
    f = _as_pdq(alt)

    def lg_clean(g, lg):
        return np.where(g == 0.0, 0.0, lg)

    try:
        m0 = f.integral(lambda u, g, lg: lg, tol=tol)
        s0 = f.integral(lambda u, g, lg: lg * lg, tol=tol)
        m1 = f.integral(lambda u, g, lg: g * lg_clean(g, lg), tol=tol)
        s1 = f.integral(lambda u, g, lg: g * lg_clean(g, lg) ** 2, tol=tol)
    except DivergentIntegralError as exc:
        raise TestUndefinedError(f"test undefined for this alternative: {exc}") from exc
    var0 = max(s0 - m0 * m0, 0.0)
    var1 = max(s1 - m1 * m1, 0.0)
    return AltMoments(m0, math.sqrt(var0), m1, math.sqrt(var1))


def _beta_b1_shape(dist: Distribution) -> float | None:
    if dist.name == "power":
        return dist.params["b"]
    if dist.name == "beta" and dist.params.get("b") == 1.0:
        return dist.params["a"]
    return None


def alt_moments_beta(b: float) -> AltMoments:
    """Closed-form moments for the pdQ of Beta(b, 1), ``b > 1/2``."""
    if not b > 0.5:
        raise ParameterError("Beta(b, 1) needs b > 1/2 for its pdQ to exist")
    c = 1.0 - 1.0 / b
    a = 2.0 - 1.0 / b
    mu0 = math.log(a) - c
    return AltMoments(mu0, abs(c), mu0 + c * c / a, abs(c) / a)


# ---------------------------------------------------------------------------
# statistics and tests


@dataclass(frozen=True)
class TestReport:
    """Outcome of one test. ``direction`` is ``>=`` or ``<=``: reject when
    ``statistic direction critical_value``."""

    __test__ = False

    statistic: float
    critical_value: float
    decision: str
    alpha: float
    m: int
    mode: str
    direction: str = ">="

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PowerResult:
    power: float
    mode: str
    std_error: float | None = None
    m: int | None = None
    alpha: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _check_sample(x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1 or x.size == 0:
        raise DomainError("the sample must be a non-empty vector")
    if np.any(~((x > 0.0) & (x < 1.0))):
        raise DomainError("sample values must lie in the open interval (0, 1)")
    return x


def log_likelihood_stat(x, alt) -> float:
    """``l_x = sum ln f1(x_i)``; ``-inf`` when ``f1`` underflows at some ``x_i``."""
    x = _check_sample(x)
    lg = _as_pdq(alt).log_density(x)
    if np.any(lg == -np.inf):
        return -math.inf
    return math.fsum(lg)


def _is_normal_pdq(f: Pdq) -> bool:
    u = np.array([0.01, 0.2, 0.5, 0.7, 0.95])
    ref = 0.5 * math.log(2.0) - 0.5 * sc.ndtri(u) ** 2
    return bool(np.allclose(f.log_density(u), ref, rtol=0, atol=1e-8))


def null_statistics(alt, m: int, reps: int, seed: int, stream: int = _CALIBRATION) -> np.ndarray:
    """``l_X`` for `reps` uniform samples of size `m`."""
    f = _as_pdq(alt)
    v = _uniform_block(m, reps, seed, stream)
    return _row_sums(f.log_density(v))


def _row_sums(a: np.ndarray) -> np.ndarray:
    # exact row sums: results do not depend on summation order
    return np.array([math.fsum(row) for row in a])


def _critical_from_null(stats_h0: np.ndarray, alpha: float) -> float:
    """Smallest order statistic with at most ``alpha`` of the null mass strictly above it."""
    s = np.sort(stats_h0)
    k = int(math.ceil((1.0 - alpha) * s.size)) - 1
    return float(s[min(max(k, 0), s.size - 1)])


def np_test(x, alt, alpha: float = 0.05, mode: str = "asymptotic", *,
            reps: int = 10_000, seed: int | None = None) -> TestReport:
    """Neyman-Pearson test of uniformity against the pdQ `alt`.

    Modes
    -----
    asymptotic
        Reject when ``l_x >= m mu0 + sqrt(m) sigma0 z_{1-alpha}``.
    exact_normal
        Normal pdQ only: reject when ``sum Phi^{-1}(x_i)**2`` is at most
        the lower alpha-quantile of chi-square with m degrees of freedom.
    monte_carlo
        Reject when ``l_x`` reaches the empirical upper alpha-point of
        `reps` null replicates drawn from `seed`.
    """
    _check_alpha(alpha)
    x = _check_sample(x)
    m = x.size
    f = _as_pdq(alt)
    if mode == "exact_normal":
        if not _is_normal_pdq(f):
            raise TestUndefinedError("exact_normal mode needs the normal pdQ alternative")
        stat = math.fsum(sc.ndtri(x) ** 2)
        crit = float(stats.chi2.ppf(alpha, m))
        return TestReport(stat, crit, "reject" if stat <= crit else "retain", alpha, m,
                          mode, "<=")
    stat = log_likelihood_stat(x, f)
    if mode == "asymptotic":
        am = alt_moments(alt)
        if am.sigma0 == 0.0:
            raise TestUndefinedError("test undefined: the alternative equals the null")
        crit = m * am.mu0 + math.sqrt(m) * am.sigma0 * -z_alpha(alpha)
    elif mode in ("monte_carlo", "monte_carlo_calibrated"):
        if seed is None:
            raise ParameterError("monte_carlo mode needs a seed")
        crit = _critical_from_null(null_statistics(f, m, reps, seed), alpha)
        mode = "monte_carlo_calibrated"
    else:
        raise ParameterError(f"unknown mode {mode!r}; choose from {MODES}")
    return TestReport(stat, crit, "reject" if stat >= crit else "retain", alpha, m, mode)


# ---------------------------------------------------------------------------
# power


def asymptotic_power(am: AltMoments, m: int, alpha: float = 0.05) -> PowerResult:
    """``Phi(sqrt(m) (mu1 - mu0) / sigma1 + z_alpha sigma0 / sigma1)``; exactly alpha at the null."""
    _check_alpha(alpha)
    if am.is_null:
        return PowerResult(alpha, "asymptotic", None, m, alpha)
    if not am.sigma1 > 0:
        raise TestUndefinedError("asymptotic power needs sigma1 > 0")
    arg = math.sqrt(m) * am.standardized_j + z_alpha(alpha) * am.sigma_ratio
    return PowerResult(float(sc.ndtr(arg)), "asymptotic", None, m, alpha)


def normal_alternative_power(m: int, alpha: float = 0.05) -> PowerResult:
    """Asymptotic power against the normal pdQ, ``Phi(sqrt(m / 2) + 2 z_alpha)``."""
    return PowerResult(float(sc.ndtr(math.sqrt(m / 2.0) + 2.0 * z_alpha(alpha))),
                       "asymptotic", None, m, alpha)


def exact_normal_power(m: int, alpha: float = 0.05) -> PowerResult:
    """Power of the exact chi-square test against the normal pdQ.

    Under the alternative ``Phi^{-1}(X)`` is normal with variance 1/2, so
    the statistic is half a chi-square variable.
    """
    _check_alpha(alpha)
    c = stats.chi2.ppf(alpha, m)
    return PowerResult(float(stats.chi2.cdf(2.0 * c, m)), "closed_form", None, m, alpha)


def power_beta_closed_form(b: float, m: int, alpha: float = 0.05) -> PowerResult:
    """Asymptotic power against the pdQ of Beta(b, 1): ``Phi(sqrt(m) |1 - 1/b| + (2 - 1/b) z_alpha)``."""
    _check_alpha(alpha)
    if not b > 0.5:
        raise ParameterError("Beta(b, 1) needs b > 1/2 for its pdQ to exist")
    if b == 1.0:
        return PowerResult(alpha, "closed_form", None, m, alpha)
    arg = math.sqrt(m) * abs(1.0 - 1.0 / b) + (2.0 - 1.0 / b) * z_alpha(alpha)
    return PowerResult(float(sc.ndtr(arg)), "closed_form", None, m, alpha)


# ---------------------------------------------------------------------------
# sampling and Monte Carlo


def _uniform_block(m: int, reps: int, seed: int, stream: int) -> np.ndarray:
    """``reps x m`` uniforms in (0, 1); replicate k draws from its own generator
    keyed by ``(seed, stream, k)``, so any replicate can be regenerated alone."""
    out = np.empty((reps, m))
    for k in range(reps):
        out[k] = np.random.default_rng([seed, stream, k]).random(m)
    return np.where(out == 0.0, 2.0 ** -54, out)


def sample_pdq(alt, m: int, seed: int) -> np.ndarray:
    """`m` draws from the pdQ by inverse-cdf sampling from a seeded PCG64 stream."""
    if m < 1:
        raise ValueError("m must be at least 1")
    v = np.random.default_rng(seed).random(m)
    v = np.where(v == 0.0, 2.0 ** -54, v)
    f = _as_pdq(alt)
    return np.asarray(f.quantile(v), dtype=float)


def mc_estimate(alt, m: int, alpha: float = 0.05, reps: int = 10_000, seed: int = 0,
                target: str = "power", test: str = "monte_carlo",
                calibration_reps: int | None = None):
    """Monte Carlo size, power or critical value of an NP test.

    With ``test="monte_carlo"`` the critical value comes from
    `calibration_reps` (default ``10 * reps``) null replicates on a
    calibration stream, so its own sampling error stays small next to the
    binomial error of the estimate. With ``test="exact_normal"`` (normal
    pdQ only) the exact chi-square rule is used instead. Size and power are
    rejection rates over `reps` fresh replicates (uniform or drawn from
    `alt`) on a separate stream.

    Returns
    -------
    PowerResult or float
        A float for ``target="critical_value"``; otherwise a result with
        the binomial standard error ``sqrt(p (1 - p) / reps)``.
    """
    _check_alpha(alpha)
    if reps < 1000:
        raise ValueError("reps must be at least 1000")
    if target not in ("size", "power", "critical_value"):
        raise ParameterError(f"unknown target {target!r}")
    f = _as_pdq(alt)
    if test == "exact_normal":
        if not _is_normal_pdq(f):
            raise TestUndefinedError("exact_normal mode needs the normal pdQ alternative")
        crit = float(stats.chi2.ppf(alpha, m))
    elif test == "monte_carlo":
        n_cal = 10 * reps if calibration_reps is None else calibration_reps
        crit = _critical_from_null(null_statistics(f, m, n_cal, seed, _CALIBRATION), alpha)
    else:
        raise ParameterError(f"unknown test {test!r}")
    if target == "critical_value":
        return crit
    v = _uniform_block(m, reps, seed, _EVALUATION)
    x = v if target == "size" else np.asarray(f.quantile(v), dtype=float)
    if test == "exact_normal":
        with np.errstate(over="ignore"):
            chi = _row_sums(sc.ndtri(x) ** 2)
        reject = chi <= crit
    else:
        reject = _row_sums(f.log_density(x)) >= crit
    p = float(np.count_nonzero(reject)) / reps
    return PowerResult(p, "monte_carlo", math.sqrt(p * (1.0 - p) / reps), m, alpha)
