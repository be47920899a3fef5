"""Jacobi ensemble with a jump: Hankel determinants, ladder identities and Painleve VI checks."""

from .errors import (
    DomainError,
    JPVIError,
    NotConverged,
    NotPositiveDefinite,
    PoleEvaluation,
    PrecisionExhausted,
    SingularLocus,
    StepUnderflow,
    ZeroDenominator,
)
from .moments import HankelResult, WeightParams, hankel, moment, multiint_oracle
from .numerics import working_precision
from .orthopoly import aux_quantities, build_system
from .identities import IdentityReport, run_suite, toda_residuals
from .painleve import SigmaTrace, pvi_integrate, sigma_trace, wn_from_pipeline
from .gap import asymptotic_check, asymptotic_constant, dn0_closed_form, gap_gram, gap_hankel

__all__ = [
    "DomainError", "JPVIError", "NotConverged", "NotPositiveDefinite", "PoleEvaluation",
    "PrecisionExhausted", "SingularLocus", "StepUnderflow", "ZeroDenominator",
    "HankelResult", "WeightParams", "hankel", "moment", "multiint_oracle",
    "working_precision", "aux_quantities", "build_system",
    "IdentityReport", "run_suite", "toda_residuals",
    "SigmaTrace", "pvi_integrate", "sigma_trace", "wn_from_pipeline",
    "asymptotic_check", "asymptotic_constant", "dn0_closed_form", "gap_gram", "gap_hankel",
]
