"""Desk-scale experiments with rough-number sets, sieve majorants, and
polynomial progressions.

The library is organized bottom-up: exact integer substrate (arith,
polynomials), shift tuples and residue classes (admissible), the sieved
set and its scaling context (wtrick), the smooth cutoff and majorant
(cutoff, majorant), exact local densities (local_factors), empirical
averages (correlation), and the counting/search layer (progressions).
The cli module ties them into reproducible batch reports.
"""

from .admissible import (
    AdmissibilityResult,
    HTuple,
    bundled_tuple50,
    is_admissible,
    search_narrow_tuple,
    wtrick_residues,
)
from .arith import PrimeTable, euler_phi_int, is_probable_prime, primorial, sieve
from .correlation import (
    CorrelationReport,
    EulerProductReport,
    PolyFormsReport,
    TidySumReport,
    ZMatrix,
    empirical_correlation,
    euler_factor_ep,
    euler_factor_ep_prime,
    euler_product_experiment,
    polynomial_forms_average,
    tidy_sum,
)
from .cutoff import (
    CutoffFunction,
    fourier_identity_value,
    normalize_cutoff,
    normalize_cutoff_reference,
)
from .errors import (
    CapacityError,
    NumericError,
    PreconditionError,
    SievelabError,
    UnsupportedCaseError,
)
from .local_factors import (
    BadPrimeReport,
    LinearFormSystem,
    PrimeClass,
    PrimeClassification,
    alpha_density,
    bad_prime_sum,
    bad_primes_linear,
    classify_prime,
    linear_local_factor,
    local_factor,
    verify_local_estimates,
)
from .majorant import (
    MajorantEvaluator,
    MajorizationReport,
    build_evaluator,
    verify_majorization,
)
from .polynomials import IntPolynomial, parse_polynomial, parse_polynomial_list
from .progressions import (
    PipelineReport,
    ProgressionHit,
    lambda_count,
    rescale_polys,
    run_pipeline,
    search_bounded_gap,
    search_in_a,
)
from .wtrick import (
    IndicatorTable,
    MaynardParams,
    ResidueSelection,
    SieveContext,
    build_maynard_set,
    build_scaled_indicator,
    choose_parameters,
    load_set,
    save_set,
    select_residue,
)

__all__ = [
    "AdmissibilityResult",
    "BadPrimeReport",
    "CapacityError",
    "CorrelationReport",
    "CutoffFunction",
    "EulerProductReport",
    "HTuple",
    "IndicatorTable",
    "IntPolynomial",
    "LinearFormSystem",
    "MajorantEvaluator",
    "MajorizationReport",
    "MaynardParams",
    "NumericError",
    "PipelineReport",
    "PolyFormsReport",
    "PreconditionError",
    "PrimeClass",
    "PrimeClassification",
    "PrimeTable",
    "ProgressionHit",
    "ResidueSelection",
    "SieveContext",
    "SievelabError",
    "TidySumReport",
    "UnsupportedCaseError",
    "ZMatrix",
    "alpha_density",
    "bad_prime_sum",
    "bad_primes_linear",
    "build_evaluator",
    "build_maynard_set",
    "build_scaled_indicator",
    "bundled_tuple50",
    "choose_parameters",
    "classify_prime",
    "empirical_correlation",
    "euler_factor_ep",
    "euler_factor_ep_prime",
    "euler_phi_int",
    "euler_product_experiment",
    "fourier_identity_value",
    "is_admissible",
    "is_probable_prime",
    "lambda_count",
    "linear_local_factor",
    "load_set",
    "local_factor",
    "normalize_cutoff",
    "normalize_cutoff_reference",
    "parse_polynomial",
    "parse_polynomial_list",
    "polynomial_forms_average",
    "primorial",
    "rescale_polys",
    "run_pipeline",
    "save_set",
    "search_bounded_gap",
    "search_in_a",
    "search_narrow_tuple",
    "select_residue",
    "sieve",
    "tidy_sum",
    "verify_local_estimates",
    "verify_majorization",
    "wtrick_residues",
]
