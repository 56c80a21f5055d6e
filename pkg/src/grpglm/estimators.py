"""scikit-learn style estimators wrapping the proximal-gradient solver.

These follow the fit/predict/get_params contract so the models compose
with pipelines and model-selection tooling. The functional API in
:mod:`grpglm.solver` remains the primitive layer.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .families import Dataset, Family, psi_prime
from .groups import GroupStructure
from .penalties import ELASTIC_NET, GROUP_LASSO, LASSO, PenaltySpec
from .solver import FitConfig, fit as _solver_fit


class PenalizedGLM(BaseEstimator, RegressorMixin):
    """Penalized maximum-likelihood GLM with group lasso, lasso or
    elastic net penalty.

    Parameters
    ----------
    family : str
        "poisson", "bernoulli" or "gaussian".
    penalty : str
        "grouplasso", "lasso" or "elasticnet".
    alpha : float
        The tuning parameter r_n (the penalty carries an extra factor 2).
    l2 : float
        The elastic net quadratic weight t_n; ignored otherwise.
    groups : sequence of int or None
        Contiguous group sizes; None means singleton groups.
    """

    def __init__(
        self,
        family: str = "poisson",
        penalty: str = GROUP_LASSO,
        alpha: float = 0.1,
        l2: float = 0.0,
        groups=None,
        max_iter: int = 10000,
        tol: float = 1e-7,
        acceleration: bool = False,
    ):
        self.family = family
        self.penalty = penalty
        self.alpha = alpha
        self.l2 = l2
        self.groups = groups
        self.max_iter = max_iter
        self.tol = tol
        self.acceleration = acceleration

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        fam = Family.from_name(self.family)
        gs = (
            GroupStructure(self.groups)
            if self.groups is not None
            else GroupStructure.singletons(X.shape[1])
        )
        if gs.p != X.shape[1]:
            raise ValueError(
                f"group sizes cover {gs.p} columns but X has {X.shape[1]}"
            )
        spec = PenaltySpec(
            self.penalty, self.alpha, self.l2 if self.penalty == ELASTIC_NET else 0.0
        )
        config = FitConfig(
            max_iter=self.max_iter, tol=self.tol, acceleration=self.acceleration
        )
        result = _solver_fit(fam, Dataset(X=X, y=y), gs, spec, config)
        self.coef_ = result.beta_hat
        self.active_groups_ = result.active_groups
        self.kkt_residual_ = result.kkt_residual
        self.n_iter_ = result.iterations
        self.converged_ = result.converged
        self.n_features_in_ = X.shape[1]
        self._family = fam
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        return X @ self.coef_

    def predict(self, X):
        """Conditional mean psi'(X beta_hat)."""
        theta = self.decision_function(X)
        return psi_prime(self._family, theta)


class GroupLassoGLM(PenalizedGLM):
    def __init__(self, family="poisson", alpha=0.1, groups=None,
                 max_iter=10000, tol=1e-7, acceleration=False):
        super().__init__(family=family, penalty=GROUP_LASSO, alpha=alpha,
                         groups=groups, max_iter=max_iter, tol=tol,
                         acceleration=acceleration)


class LassoGLM(PenalizedGLM):
    def __init__(self, family="poisson", alpha=0.1, max_iter=10000,
                 tol=1e-7, acceleration=False):
        super().__init__(family=family, penalty=LASSO, alpha=alpha,
                         max_iter=max_iter, tol=tol, acceleration=acceleration)


class ElasticNetGLM(PenalizedGLM):
    def __init__(self, family="poisson", alpha=0.1, l2=0.0, max_iter=10000,
                 tol=1e-7, acceleration=False):
        super().__init__(family=family, penalty=ELASTIC_NET, alpha=alpha,
                         l2=l2, max_iter=max_iter, tol=tol,
                         acceleration=acceleration)
