"""
totpos: executable total positivity.

Exact and tolerance-gated TN_p / TP_p verdicts for matrices and sampled
kernels, with the machinery built on top of them:

- matrix core: RationalMatrix, Bareiss determinants, minor enumeration,
  Fekete certificates and Hankel definiteness tests
- preserver lab: the counterexample families that refute entrywise
  transforms, swept over parameter grids
- Whitney lifts: Gaussian convolutions that turn TN_p kernels into TP_p
  ones, and the discretized approximation of bounded kernels
- completions: TP 2x2 matrices inside generalized Vandermonde and Hankel
  kernels
- Polya frequency functions and sequences: rational Laplace transforms,
  power obstructions, Toeplitz and Sturm certificates

Verdicts carry the first violating minor as a witness, so every FAIL can
be re-checked independently.

Example:
    >>> from totpos import RationalMatrix, check
    >>> verdict = check(RationalMatrix.exact([[1, 2], [3, 4]]), strict=True)
    >>> verdict.status.value, verdict.witness.value
    ('FAIL', Fraction(-2, 1))
    >>>
    >>> from totpos import MAlpha, laplace
    >>> laplace(MAlpha(1)).to_dict()["numerator"]
    ['12']
"""

from __future__ import annotations

__version__ = "0.1.0"

# Completions
from totpos._completion import (
    HankelEmbedding,
    VandermondeEmbedding,
    embed_sym_2x2,
    embed_tp_2x2,
    exact_copy,
)

# Configuration
from totpos._config import THREADS_ENV_VAR, Settings, get_settings

# Exponential polynomials and rational functions
from totpos._laplace import (
    ExpPoly,
    ExpTerm,
    RationalFunction,
    laplace_exp_poly,
    strip_of_convergence,
    to_sympy_number,
)

# Matrix core
from totpos._matrix import (
    RationalMatrix,
    check,
    check_kernel,
    contiguous_check,
    contiguous_minors,
    det,
    fekete_tp,
    generalized_vandermonde,
    hadamard_bound,
    hankel_check,
    hankel_matrix,
    minors,
    resolve_tol,
    sample_kernel,
    toeplitz_matrix,
)

# Polya frequency functions and sequences
from totpos._polya import (
    ExpPolyDensity,
    GaussDensity,
    JainResult,
    LambdaD,
    MAlpha,
    OneSidedN,
    PffFamily,
    PfSequence,
    Phi,
    PowerObstruction,
    PowerVerdict,
    RootCertificate,
    SequenceWitness,
    atom_sequence_witness,
    cosine_jain,
    discretize_pff,
    eval_pff,
    generating_poly_pf_check,
    laplace,
    moment_hankel,
    pf_sequence_check,
    pff_toeplitz_check,
    pfseq_origin_determinants,
    power_obstruction,
    toeplitz_power_witness,
    transform_report,
)

# Preserver lab
from totpos._preserver import (
    PRESERVER_TOL,
    Bucket,
    FamilyId,
    FamilyWitness,
    Outcome,
    PreserverReport,
    expected_verdict,
    families_for,
    family_grid,
    make_family,
    n4_expansion,
    n4_power_det,
    refutation_covered,
    report_to_dict,
    sample_grid,
    search_counterexample,
    test_power_preserver,
    test_preserver,
)

# Scalars
from totpos._scalar import (
    Kind,
    Scalar,
    format_scalar,
    infer_kind,
    is_exact_value,
    parse_scalar,
    to_scalar,
)

# Serialization
from totpos._serialization import (
    dump_json,
    load_matrix,
    matrix_from_dict,
    matrix_to_dict,
    parse_matrix_text,
    verdict_to_dict,
    witness_to_dict,
)

# Entrywise transforms
from totpos._transform import (
    Atom,
    Constant,
    Polynomial,
    Power,
    Step,
    TransformSpec,
    apply_entrywise,
    parse_transform,
)

# Result types and exceptions
from totpos._types import (
    AmbiguousVerdictWarning,
    DegenerateExponentsError,
    KernelGrid,
    MinorIndex,
    NotTotallyPositiveError,
    Status,
    Verdict,
    Witness,
)

# Whitney lifts and approximation
from totpos._whitney import (
    ApproxMode,
    ApproxPoint,
    ApproxReport,
    ConvolutionPlan,
    GaussianProductIdentity,
    LiftResult,
    approximate,
    cauchy_binet_det,
    cc_nodes,
    convolve_step,
    fc_nodes,
    gauss,
    gauss_matrix,
    gaussian_product_identity,
    lift_iterations,
    lift_kernel,
    numeric_rank,
    scaling_constant,
    tp_lift,
)

__all__ = [
    # Version
    "__version__",
    # Scalars
    "Kind",
    "Scalar",
    "to_scalar",
    "infer_kind",
    "is_exact_value",
    "format_scalar",
    "parse_scalar",
    # Result types and exceptions
    "Status",
    "MinorIndex",
    "Witness",
    "Verdict",
    "KernelGrid",
    "NotTotallyPositiveError",
    "DegenerateExponentsError",
    "AmbiguousVerdictWarning",
    # Configuration
    "Settings",
    "get_settings",
    "THREADS_ENV_VAR",
    # Matrix core
    "RationalMatrix",
    "det",
    "minors",
    "contiguous_minors",
    "hadamard_bound",
    "check",
    "contiguous_check",
    "fekete_tp",
    "hankel_check",
    "generalized_vandermonde",
    "toeplitz_matrix",
    "hankel_matrix",
    "sample_kernel",
    "check_kernel",
    "resolve_tol",
    # Entrywise transforms
    "TransformSpec",
    "Constant",
    "Power",
    "Step",
    "Atom",
    "Polynomial",
    "apply_entrywise",
    "parse_transform",
    # Serialization
    "matrix_to_dict",
    "matrix_from_dict",
    "witness_to_dict",
    "verdict_to_dict",
    "load_matrix",
    "parse_matrix_text",
    "dump_json",
    # Preserver lab
    "FamilyId",
    "Bucket",
    "Outcome",
    "FamilyWitness",
    "PreserverReport",
    "PRESERVER_TOL",
    "make_family",
    "family_grid",
    "families_for",
    "sample_grid",
    "search_counterexample",
    "test_preserver",
    "test_power_preserver",
    "expected_verdict",
    "refutation_covered",
    "n4_expansion",
    "n4_power_det",
    "report_to_dict",
    # Whitney lifts and approximation
    "ConvolutionPlan",
    "LiftResult",
    "ApproxMode",
    "ApproxPoint",
    "ApproxReport",
    "GaussianProductIdentity",
    "gauss",
    "gauss_matrix",
    "numeric_rank",
    "lift_iterations",
    "convolve_step",
    "cauchy_binet_det",
    "lift_kernel",
    "tp_lift",
    "fc_nodes",
    "cc_nodes",
    "scaling_constant",
    "approximate",
    "gaussian_product_identity",
    # Completions
    "VandermondeEmbedding",
    "HankelEmbedding",
    "embed_tp_2x2",
    "embed_sym_2x2",
    "exact_copy",
    # Exponential polynomials and rational functions
    "ExpTerm",
    "ExpPoly",
    "RationalFunction",
    "laplace_exp_poly",
    "strip_of_convergence",
    "to_sympy_number",
    # Polya frequency functions and sequences
    "PffFamily",
    "LambdaD",
    "Phi",
    "GaussDensity",
    "MAlpha",
    "OneSidedN",
    "ExpPolyDensity",
    "eval_pff",
    "laplace",
    "PowerVerdict",
    "PowerObstruction",
    "power_obstruction",
    "PfSequence",
    "pf_sequence_check",
    "RootCertificate",
    "generating_poly_pf_check",
    "discretize_pff",
    "pff_toeplitz_check",
    "JainResult",
    "cosine_jain",
    "moment_hankel",
    "pfseq_origin_determinants",
    "SequenceWitness",
    "toeplitz_power_witness",
    "atom_sequence_witness",
    "transform_report",
]
