"""Mellin-transform identities for the Riemann zeta function, checked numerically."""

from .errors import (
    AccuracyError,
    DomainError,
    FitResidualError,
    GammaOverflowError,
    NonAnalyticError,
    NonConvergenceError,
    OracleNotRunError,
    PoleError,
    StripError,
    TailBudgetError,
    TailModelError,
    UnsupportedError,
    ZetaMellinError,
)
from .lambda_series import (
    LambdaConfig,
    lambda1,
    lambda1_integral_rep,
    lambda1_raw_sum,
    lambda2,
    lambda2_raw_sum,
    power_series,
)
from .mellin import IdentityId, StripPoint, inverse_mellin_line, mellin_numeric, rhs_closed_form
from .quadrature import IntegralResult, QuadratureConfig, integrate
from .residues import (
    ORACLE,
    PAPER,
    SubtractionPolynomial,
    fit_residue_polynomial,
    residue_oracle,
    subtraction_poly,
)
from .specialfn import (
    PrecisionPolicy,
    StieltjesTable,
    digamma,
    gamma,
    stieltjes,
    stieltjes_table,
    xi_critical,
    zeta,
    zeta_deriv,
)
from .verify import VerificationRecord, resolve_conventions, verify_identity, verify_theorem2
from .xi_integrals import XiIntegralSpec, lhs_xi_integral, rhs_weighted_integral

__version__ = "0.1.0"
