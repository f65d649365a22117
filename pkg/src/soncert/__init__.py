"""Lower bounds and exact rational nonnegativity certificates for sparse
polynomials, built from sums of nonnegative circuits and a second-order cone
relaxation over rational mediated sets."""

from .polyring import (
    Exponent,
    SparsePoly,
    SupportPartition,
    Circuit,
    is_even,
    support_partition,
    to_pn,
    substitute_power,
    is_nonneg_circuit,
    poly_from_json,
    poly_to_json,
    poly_sha256,
)
from .mediated import (
    med_seq,
    med_seq_elements,
    brute_min_med_seq,
    l_med_set,
    med_set,
    l_med_set_odd,
    med_set_odd,
    is_valid_mediated_set,
)
from .cover import (
    CoverInfeasible,
    CoverResult,
    lp_solve_exact,
    sim_sel,
    simplex_cover,
)
from .ipm import ConeSolve, solve_socp
from .socp import (
    ConeTriplePlan,
    LowerBoundResult,
    SocpProblem,
    SocpSolution,
    SolverFailure,
    UncoveredSupport,
    assemble,
    build_plan,
    lower_bound,
    pn_companion,
    solve_problem,
)
from .certify import (
    BoundaryFailure,
    Certificate,
    CertTriple,
    VerifyResult,
    check_cone,
    check_cone_strict,
    exact_sobs,
    project_slots,
    round_to_rational,
    verify_certificate,
)
from .generate import POLY_CLASSES, GenInstance, random_instance

__all__ = [
    "Exponent",
    "SparsePoly",
    "SupportPartition",
    "Circuit",
    "is_even",
    "support_partition",
    "to_pn",
    "substitute_power",
    "is_nonneg_circuit",
    "poly_from_json",
    "poly_to_json",
    "poly_sha256",
    "med_seq",
    "med_seq_elements",
    "brute_min_med_seq",
    "l_med_set",
    "med_set",
    "l_med_set_odd",
    "med_set_odd",
    "is_valid_mediated_set",
    "CoverInfeasible",
    "CoverResult",
    "simplex_cover",
    "sim_sel",
    "lp_solve_exact",
    "ConeSolve",
    "solve_socp",
    "ConeTriplePlan",
    "LowerBoundResult",
    "SocpProblem",
    "SocpSolution",
    "SolverFailure",
    "UncoveredSupport",
    "build_plan",
    "assemble",
    "lower_bound",
    "pn_companion",
    "solve_problem",
    "BoundaryFailure",
    "Certificate",
    "CertTriple",
    "VerifyResult",
    "round_to_rational",
    "project_slots",
    "check_cone",
    "check_cone_strict",
    "exact_sobs",
    "verify_certificate",
    "POLY_CLASSES",
    "GenInstance",
    "random_instance",
]
