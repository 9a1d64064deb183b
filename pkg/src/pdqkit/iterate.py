"""Repeated *-iteration and its convergence diagnostics.

Two independent engines produce the same per-step numbers.

* The moment engine needs only the power integrals ``mu_n = int f**n`` of
  the source law. The n-th iterate has ``kappa_n = int (f^{n*})**2 =
  mu_n mu_{n+2} / mu_{n+1}**2`` and ``int (f^{n*})**r`` is a product of
  powers of consecutive kappas.
* The grid engine applies `star_transform` repeatedly to a chart-backed
  pdQ and integrates each iterate directly.

Iterate indices follow the source: for a law f, row n describes ``f^{n*}``
(so row 1 is the pdQ). A `Pdq` passed in is taken as the first iterate.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .catalog import Distribution
from .errors import DivergentIntegralError, NotSquareIntegrableError, PdqError, QuadratureError
from .pdq import Pdq, star_transform

__all__ = ["MomentSequence", "moment_sequence", "IterationStep", "IterationTrace",
           "kappa_diagnostics", "iterate_grid", "nu", "lr_bound", "write_trace_csv",
           "CONVERGENCE_TOL", "CONVERGENCE_RUN"]

# kappa_n - 1 below this for CONVERGENCE_RUN consecutive steps counts as converged
CONVERGENCE_TOL = 1e-4
CONVERGENCE_RUN = 3


# ---------------------------------------------------------------------------
# moments


@dataclass(frozen=True)
class MomentSequence:
    """Power integrals ``mu_n = int f**n``, n = 1..N, stored as logarithms.

    ``log_mu[n]`` holds ``ln mu_n`` (index 0 is unused and set to 0); an
    entry is ``inf`` where the integral diverges and ``nan`` where it could
    not be computed.
    """

    log_mu: np.ndarray
    all_finite_up_to: int
    source: str = ""

    @property
    def N(self) -> int:
        return self.log_mu.size - 1

    @property
    def mu(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_mu)

    def log_kappa(self, n: int) -> float:
        """``ln kappa_n``; ``kappa_0 = mu_2``."""
        if n == 0:
            return self._get(2)
        return self._get(n) + self._get(n + 2) - 2.0 * self._get(n + 1)

    def kappa(self, n: int) -> float:
        return math.exp(self.log_kappa(n))

    def _get(self, n: int) -> float:
        if n > self.all_finite_up_to:
            raise PdqError(f"insufficient moment order: mu_{n} is not available "
                           f"(finite up to {self.all_finite_up_to})")
        return float(self.log_mu[n])


def _log_power_integral(dist: Distribution, n: int) -> float:
    lm = dist.log_moment(n)
    if lm is not None:
        return float(lm)
    # scale by kappa so large n does not overflow
    k = dist.kappa
    val = dist.u_integral(lambda y: (y / k) ** (n - 1))
    return math.log(val) + (n - 1) * math.log(k)


def moment_sequence(dist: Distribution, N: int) -> MomentSequence:
    """``mu_1 .. mu_N`` of a law, from closed forms where known, else by quadrature.

    Divergence of ``mu_n`` implies divergence of every higher moment, so the
    sequence stops at the first infinite value. A quadrature failure also
    stops it, leaving ``all_finite_up_to = n - 1``.
    """
    if N < 3:
        raise ValueError("N must be at least 3")
    log_mu = np.full(N + 1, np.nan)
    log_mu[0] = 0.0
    last = 0
    for n in range(1, N + 1):
        try:
            v = 0.0 if n == 1 else _log_power_integral(dist, n)
        except DivergentIntegralError:
            v = math.inf
        except QuadratureError:
            break
        log_mu[n] = v
        if not math.isfinite(v):
            log_mu[n + 1:] = math.inf
            break
        last = n
    return MomentSequence(log_mu, last, str(dist))


def nu(mu: MomentSequence, n: int, r: int) -> float:
    """``int (f^{n*})**r = kappa_{n+r-2} kappa_{n+r-3}**2 ... kappa_n**(r-1)``."""
    if r < 0:
        raise ValueError("r must be non-negative")
    return math.exp(math.fsum(j * mu.log_kappa(n + r - 1 - j) for j in range(1, r)))


def lr_bound(mu: MomentSequence, n: int, r: int) -> float:
    """Upper bound ``nu_r - 2 nu_{r-1} + nu_{r-2} + kappa_n - 1`` on ``int |f^{n*} - 1|**r``.

    Valid for integer ``r >= 4``.
    """
    if r < 4 or int(r) != r:
        raise ValueError("the bound needs an integer r >= 4")
    r = int(r)
    return nu(mu, n, r) - 2.0 * nu(mu, n, r - 1) + nu(mu, n, r - 2) + mu.kappa(n) - 1.0


# ---------------------------------------------------------------------------
# traces


@dataclass
class IterationStep:
    n: int
    kappa: float
    l2: float
    lr: dict = field(default_factory=dict)
    lr_bound: dict = field(default_factory=dict)
    sup_norm: float = math.nan
    sup_on_grid: float = math.nan


@dataclass
class IterationTrace:
    """Per-iterate diagnostics from one engine.

    Attributes
    ----------
    steps : list of IterationStep
    engine : {"moments", "grid"}
    kappa0 : float
        ``int f**2`` of the source law when known.
    star_order : int or None
        Set when the iteration stopped because an iterate is not square
        integrable: the index of the last iterate that exists.
    """

    source: str
    engine: str
    r_list: tuple = ()
    steps: list[IterationStep] = field(default_factory=list)
    kappa0: float | None = None
    star_order: int | None = None
    message: str = ""
    iterates: list = field(default_factory=list, repr=False)

    @property
    def kappas(self) -> np.ndarray:
        return np.array([s.kappa for s in self.steps])

    @property
    def truncated(self) -> bool:
        return self.star_order is not None

    @property
    def converged_at(self) -> int | None:
        """First index of a run of CONVERGENCE_RUN steps with ``kappa - 1 < CONVERGENCE_TOL``."""
        seq = ([(0, self.kappa0)] if self.kappa0 is not None else []) + \
            [(s.n, s.kappa) for s in self.steps]
        run = 0
        for i, (n, k) in enumerate(seq):
            run = run + 1 if k - 1.0 < CONVERGENCE_TOL else 0
            if run == CONVERGENCE_RUN:
                return seq[i - CONVERGENCE_RUN + 1][0]
        return None

    @property
    def kappa_bounded(self) -> bool:
        """Moment-side condition of the convergence-in-probability result."""
        k = self.kappas
        return bool(k.size and np.all(np.isfinite(k)))

    @property
    def kappa_decreasing(self) -> bool:
        k = self.kappas
        return bool(np.all(np.diff(k) <= 1e-12 * np.maximum(k[1:], 1.0)))

    @property
    def verdict(self) -> str:
        if self.truncated:
            return f"stopped: *-order {self.star_order}"
        n = self.converged_at
        if n is not None:
            return f"converged at n={n}"
        if self.kappa_bounded and self.kappa_decreasing:
            return "converging: kappa_n decreasing toward 1"
        return "undecided"

    def to_csv(self, dest=None) -> str | None:
        return write_trace_csv(self, dest)


def _r_label(r) -> str:
    r = float(r)
    return f"lr_{int(r)}" if r.is_integer() else f"lr_{r:g}"


def write_trace_csv(trace: IterationTrace, dest=None) -> str | None:
    """Write ``n,kappa,l2,lr_<r>...,sup_norm,engine``; returns the text if `dest` is None.

    The moment engine fills the ``lr`` columns with the moment bound
    (integer r >= 4) or the exact value (r = 2).
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "kappa", "l2", *(_r_label(r) for r in trace.r_list), "sup_norm", "engine"])
    for s in trace.steps:
        lr = s.lr if trace.engine == "grid" else s.lr_bound
        w.writerow([s.n, repr(float(s.kappa)), repr(float(s.l2)),
                    *(repr(float(lr.get(r, math.nan))) for r in trace.r_list),
                    repr(float(s.sup_norm)), trace.engine])
    text = buf.getvalue()
    if dest is None:
        return text
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        Path(dest).write_text(text)
    return None


def _l2(kappa: float) -> float:
    return math.sqrt(max(kappa - 1.0, 0.0))


def kappa_diagnostics(mu: MomentSequence, max_r: int = 4, n_steps: int | None = None,
                      sup0: float | None = None) -> IterationTrace:
    """Moment-engine trace: ``kappa_n``, L2 distances and L_r bounds.

    Parameters
    ----------
    mu : MomentSequence
    max_r : int
        Largest r for the L_r bounds; rows carry r = 2 and 4..max_r.
    n_steps : int, optional
        Number of iterates; defaults to every n the moments support.
    sup0 : float, optional
        ``sup f`` of the source; sup norms follow as ``sup_n = sup_{n-1} / kappa_{n-1}``.
    """
    r_list = (2, *range(4, max_r + 1))
    avail = mu.all_finite_up_to - 2
    want = avail if n_steps is None else n_steps
    trace = IterationTrace(mu.source, "moments", r_list)
    if mu.all_finite_up_to < 2:
        trace.star_order = 0
        trace.message = "f is not square-integrable"
        return trace
    trace.kappa0 = mu.kappa(0)
    sup = None if sup0 is None else sup0 / trace.kappa0
    nxt = mu.all_finite_up_to + 1
    if nxt <= mu.N and mu.log_mu[nxt] == math.inf:
        # f^{n*} exists exactly while mu_{n+1} is finite
        trace.star_order = nxt - 2
        trace.message = f"mu_{nxt} diverges"
    elif want > avail:
        trace.message = "insufficient moment order"
    for n in range(1, min(want, avail) + 1):
        k = mu.kappa(n)
        step = IterationStep(n, k, _l2(k), sup_norm=math.nan if sup is None else sup)
        step.lr_bound[2] = k - 1.0
        for r in range(4, max_r + 1):
            if n + r <= mu.all_finite_up_to:
                step.lr_bound[r] = lr_bound(mu, n, r)
        trace.steps.append(step)
        if sup is not None:
            sup = sup / k
    return trace


def iterate_grid(f, n_steps: int, r_list: Sequence[float] = (2.0,),
                 grid_size: int | None = None, keep_iterates: bool = False) -> IterationTrace:
    """Grid-engine trace of ``f*, f^{2*}, ...``.

    Parameters
    ----------
    f : Distribution or Pdq
        A law starts at its pdQ; a pdQ is taken as the first iterate.
    n_steps : int
        Number of iterates to record.
    r_list : sequence of float
        Exponents r for the empirical ``int |f^{n*} - 1|**r``.
    keep_iterates : bool
        Keep every iterate on ``trace.iterates`` (used for dumping).

    Each step integrates the iterate on its chart. An iterate that is not
    square integrable ends the trace with its *-order.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    r_list = tuple(float(r) for r in r_list)
    if isinstance(f, Distribution):
        trace = IterationTrace(str(f), "grid", r_list)
        try:
            g = star_transform(f, grid_size=grid_size)
        except NotSquareIntegrableError as exc:
            trace.star_order, trace.message = 0, str(exc)
            return trace
        trace.kappa0 = g.kappa_parent
    elif isinstance(f, Pdq):
        trace = IterationTrace(f.name, "grid", r_list)
        g = f
    else:
        raise TypeError("iterate_grid expects a Distribution or a Pdq")

    for n in range(1, n_steps + 1):
        if keep_iterates:
            trace.iterates.append(g)
        try:
            nxt = star_transform(g)
        except NotSquareIntegrableError as exc:
            trace.star_order, trace.message = n, str(exc)
            break
        k = nxt.kappa_parent
        ch = g.chart
        step = IterationStep(n, k, _l2(k), sup_norm=g.sup_norm, sup_on_grid=g.sup_on_grid())
        for r in r_list:
            try:
                step.lr[r] = ch.integral(lambda u, d, lg, r=r: np.abs(d - 1.0) ** r)
            except DivergentIntegralError:
                step.lr[r] = math.inf
        trace.steps.append(step)
        g = nxt
    return trace
