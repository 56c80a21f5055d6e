"""Penalized maximum likelihood for generalized linear models with group
lasso, lasso and elastic net penalties, finite-sample error-bound
calculators and a Poisson simulation harness."""

from .families import (
    Dataset,
    Family,
    empirical_risk,
    loss,
    psi,
    psi_prime,
    psi_second,
    risk_gradient,
)
from .groups import GroupStructure
from .penalties import (
    ELASTIC_NET,
    GROUP_LASSO,
    LASSO,
    PenaltySpec,
    SparsityProfile,
    norm_2_1,
    penalty_value,
    prox,
    regularizer_norm,
)
from .solver import (
    DivergenceError,
    FitConfig,
    FitResult,
    PathResult,
    fit,
    kkt_residual,
    lambda_max,
    path,
    select_lambda,
)
from .estimators import ElasticNetGLM, GroupLassoGLM, LassoGLM, PenalizedGLM

__all__ = [
    "Dataset",
    "DivergenceError",
    "ELASTIC_NET",
    "ElasticNetGLM",
    "Family",
    "FitConfig",
    "FitResult",
    "GROUP_LASSO",
    "GroupLassoGLM",
    "GroupStructure",
    "LASSO",
    "LassoGLM",
    "PathResult",
    "PenalizedGLM",
    "PenaltySpec",
    "SparsityProfile",
    "empirical_risk",
    "fit",
    "kkt_residual",
    "lambda_max",
    "loss",
    "norm_2_1",
    "path",
    "penalty_value",
    "prox",
    "psi",
    "psi_prime",
    "psi_second",
    "regularizer_norm",
    "risk_gradient",
    "select_lambda",
]

__version__ = "0.1.0"
