"""Certified local-minimality checks for one-dimensional integral functionals.

The package decides strong local minimality of a stationary path from an
interval-length criterion on the second-order coefficients along the path,
returns an explicit quadratic growth constant when it certifies, and ships a
classical conjugate-point computation for cross-validation plus a generator
that manufactures problems whose designated path is an exact extremal.
"""

__version__ = "0.1.0"

from .calculus import (
    Grid,
    SampledPath,
    cumulative_integral,
    friedrichs_coefficient,
    friedrichs_margin,
    h1_norm_sq,
    integrate,
)
from .certify import (
    MINIMUM_KINDS,
    RANDOM_SPLINE,
    SINE_BASIS,
    Certificate,
    EmpiricalReport,
    PerturbationCheck,
    PerturbationFamily,
    Verdict,
    VerdictKind,
    certify,
    classify,
    empirical_verify,
    functional_value,
    length_bound,
    quad_coefficient,
)
from .expr import (
    EvalDomainError,
    Expr,
    ParseError,
    const,
    diff,
    eval_at,
    evaluate,
    free_vars,
    parse,
    simplify,
    substitute,
    unparse,
    var,
)
from .generator import (
    AntiderivativeTable,
    BuildInfo,
    GeneratorError,
    GeneratorSpec,
    antiderivative,
    build,
    build_shifted,
    build_shifted_with_info,
    build_with_info,
    build_zero,
    build_zero_with_info,
    sample_corpus,
    tabulate_antiderivative,
)
from .jacobi import (
    AccessoryIntegrationError,
    AccessorySolution,
    CriteriaComparison,
    accessory_value,
    compare_criteria,
    first_conjugate_point,
    solve_accessory,
)
from .variational import (
    Extremal,
    Integrand,
    LegendreError,
    LegendreProfile,
    QuadraticDecomposition,
    coefficient_samples,
    decompose,
    el_residual,
    el_residual_max,
    legendre_profile,
    sample_expr,
    shift,
)
from .cli import main  # noqa: F401  (re-export for embedding)

__all__ = [
    "AccessoryIntegrationError",
    "AccessorySolution",
    "AntiderivativeTable",
    "BuildInfo",
    "Certificate",
    "CriteriaComparison",
    "EmpiricalReport",
    "EvalDomainError",
    "Expr",
    "Extremal",
    "GeneratorError",
    "GeneratorSpec",
    "Grid",
    "Integrand",
    "LegendreError",
    "LegendreProfile",
    "MINIMUM_KINDS",
    "ParseError",
    "PerturbationCheck",
    "PerturbationFamily",
    "QuadraticDecomposition",
    "RANDOM_SPLINE",
    "SINE_BASIS",
    "SampledPath",
    "Verdict",
    "VerdictKind",
    "accessory_value",
    "antiderivative",
    "build",
    "build_shifted",
    "build_shifted_with_info",
    "build_with_info",
    "build_zero",
    "build_zero_with_info",
    "certify",
    "classify",
    "coefficient_samples",
    "compare_criteria",
    "const",
    "cumulative_integral",
    "decompose",
    "diff",
    "el_residual",
    "el_residual_max",
    "empirical_verify",
    "eval_at",
    "evaluate",
    "first_conjugate_point",
    "free_vars",
    "friedrichs_coefficient",
    "friedrichs_margin",
    "functional_value",
    "h1_norm_sq",
    "integrate",
    "legendre_profile",
    "length_bound",
    "main",
    "parse",
    "quad_coefficient",
    "sample_corpus",
    "sample_expr",
    "shift",
    "simplify",
    "solve_accessory",
    "substitute",
    "tabulate_antiderivative",
    "unparse",
    "var",
    "__version__",
]
