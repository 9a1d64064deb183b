"""pdqkit: probability density quantiles, their iterates, and tests of uniformity."""

from __future__ import annotations

from .catalog import Distribution, FamilyGrid, evaluate, make_family, parse_family_spec
from .divergence import (
    MapLocus,
    UniformityProfile,
    kl_divergence,
    locus_crossing,
    map_locus,
    semi_metric,
    uniformity_profile,
)
from .errors import (
    BracketError,
    DivergentIntegralError,
    DomainError,
    MonotonicityError,
    NotSquareIntegrableError,
    NumericalError,
    ParameterError,
    PdqError,
    QuadratureError,
    ReconstructionError,
    TestUndefinedError,
)
from .iterate import (
    IterationTrace,
    MomentSequence,
    iterate_grid,
    kappa_diagnostics,
    moment_sequence,
)
from .numerics import (
    GridFunction,
    Interval,
    find_root,
    integrate,
    monotone_interpolant,
)
from .pdq import (
    Pdq,
    StarOrder,
    pdq_from_callable,
    read_pdq_csv,
    reconstruct_cdf,
    star_order,
    star_transform,
    uniform_pdq,
    write_pdq_csv,
)
from .uniftest import (
    AltMoments,
    PowerResult,
    TestReport,
    alt_moments,
    asymptotic_power,
    log_likelihood_stat,
    mc_estimate,
    np_test,
    power_beta_closed_form,
    sample_pdq,
)

__version__ = "0.1.0"

__all__ = [
    "AltMoments", "BracketError", "Distribution", "DivergentIntegralError", "DomainError",
    "FamilyGrid", "GridFunction", "Interval", "IterationTrace", "MapLocus", "MomentSequence",
    "MonotonicityError", "NotSquareIntegrableError", "NumericalError", "ParameterError",
    "Pdq", "PdqError", "PowerResult", "QuadratureError", "ReconstructionError", "StarOrder",
    "TestReport", "TestUndefinedError", "UniformityProfile", "alt_moments",
    "asymptotic_power", "evaluate", "find_root", "integrate", "iterate_grid",
    "kappa_diagnostics", "kl_divergence", "locus_crossing", "log_likelihood_stat",
    "make_family", "map_locus", "mc_estimate", "moment_sequence", "monotone_interpolant",
    "np_test", "parse_family_spec", "pdq_from_callable", "power_beta_closed_form",
    "read_pdq_csv", "reconstruct_cdf", "sample_pdq", "semi_metric", "star_order",
    "star_transform", "uniform_pdq", "uniformity_profile", "write_pdq_csv",
]
