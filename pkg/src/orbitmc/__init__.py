"""Decision procedures for LTL over polynomial predicates on orbits of
rational 3x3 matrices."""

from .errors import (
    BoundOverflowError,
    DomainError,
    InconclusiveError,
    InvalidInputError,
    OrbitmcError,
    SpecViolationError,
    WrongRegimeError,
)
from .predicates import AtomicPredicate, Poly3
from .ltl import Formula, parse_formula, pretty, to_negation_free
from .spectral import (
    ComplexForm,
    ComplexPair,
    RationalMatrix3,
    RealForm,
    ThreeReal,
    char_poly,
    classify,
    closed_form,
)
from .semilinear import (
    EventuallyPeriodicSpec,
    LassoWord,
    build_lasso,
    lasso_mc,
    real_case_spec,
    rou_case_spec,
)
from .bounded import (
    BigMagnitude,
    BoundCertificate,
    OracleCache,
    Verdict,
    boundify,
    check,
    compute_bounds,
    membership_oracle,
    model_check_bounded,
    rotation_context,
)

__version__ = "0.1.0"

__all__ = [
    "AtomicPredicate",
    "BigMagnitude",
    "BoundCertificate",
    "BoundOverflowError",
    "ComplexForm",
    "ComplexPair",
    "DomainError",
    "EventuallyPeriodicSpec",
    "Formula",
    "InconclusiveError",
    "InvalidInputError",
    "LassoWord",
    "OracleCache",
    "OrbitmcError",
    "Poly3",
    "RationalMatrix3",
    "RealForm",
    "SpecViolationError",
    "ThreeReal",
    "Verdict",
    "WrongRegimeError",
    "boundify",
    "build_lasso",
    "char_poly",
    "check",
    "classify",
    "closed_form",
    "compute_bounds",
    "lasso_mc",
    "membership_oracle",
    "model_check_bounded",
    "parse_formula",
    "pretty",
    "real_case_spec",
    "rotation_context",
    "rou_case_spec",
    "to_negation_free",
]
