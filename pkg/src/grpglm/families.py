"""Exponential families, the GLM loss and the empirical risk.

The cumulant function ``psi`` fixes everything about a family: its first
derivative is the mean map (inverse canonical link) and its second
derivative is the conditional variance of the response. Three canonical
families are supported, all with natural domain equal to the whole real
line:

* Poisson:   psi(t) = exp(t)
* Bernoulli: psi(t) = log(1 + exp(t))
* Gaussian:  psi(t) = t^2 / 2   (unit dispersion)

There is no intercept and no standardization: the linear predictor is
exactly ``beta @ x``. Callers wanting an intercept append a constant
column.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

# exp(t) overflows float64 near t = 709.78; stay safely inside.
POISSON_THETA_MAX = 700.0


class Family(Enum):
    """The supported exponential families (canonical parametrization)."""

    POISSON = "poisson"
    BERNOULLI = "bernoulli"
    GAUSSIAN = "gaussian"

    @classmethod
    def from_name(cls, name: str) -> "Family":
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(
                f"unknown family {name!r}; expected one of "
                f"{[f.value for f in cls]}"
            ) from None


def _check_theta(theta):
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta)):
        raise ValueError("canonical parameter must be finite")
    return theta


def psi(family: Family, theta):
    """Cumulant (log-partition) function, elementwise."""
    theta = _check_theta(theta)
    if family is Family.POISSON:
        if np.any(theta > POISSON_THETA_MAX):
            raise OverflowError(
                f"Poisson cumulant overflows for theta > {POISSON_THETA_MAX}"
            )
        return np.exp(theta)
    if family is Family.BERNOULLI:
        # log(1 + e^t), stable for large |t|
        return np.logaddexp(0.0, theta)
    return 0.5 * theta**2


def psi_prime(family: Family, theta):
    """Mean map psi', elementwise."""
    theta = _check_theta(theta)
    if family is Family.POISSON:
        return np.exp(np.minimum(theta, POISSON_THETA_MAX))
    if family is Family.BERNOULLI:
        # sigmoid via the sign-split stable form
        out = np.empty_like(theta)
        pos = theta >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-theta[pos]))
        e = np.exp(theta[~pos])
        out[~pos] = e / (1.0 + e)
        return out if out.ndim else out[()]
    return theta


def psi_second(family: Family, theta):
    """Variance function psi'', elementwise; strictly positive."""
    theta = _check_theta(theta)
    if family is Family.POISSON:
        return np.exp(np.minimum(theta, POISSON_THETA_MAX))
    if family is Family.BERNOULLI:
        s = psi_prime(Family.BERNOULLI, theta)
        return s * (1.0 - s)
    return np.ones_like(theta) if np.ndim(theta) else 1.0


@dataclass
class Dataset:
    """A design matrix and response with optional sup-norm metadata.

    ``L_bound``, when given, certifies max |X_ij| <= L_bound; it is data
    provenance, not enforced downstream.
    """

    X: np.ndarray
    y: np.ndarray
    L_bound: float | None = None

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=float)
        self.y = np.ascontiguousarray(self.y, dtype=float)
        if self.X.ndim != 2:
            raise ValueError("X must be a 2-d matrix")
        if self.y.ndim != 1:
            raise ValueError("y must be a 1-d vector")
        n, p = self.X.shape
        if n < 1 or p < 1:
            raise ValueError("need at least one row and one column")
        if self.y.shape[0] != n:
            raise ValueError(f"y has {self.y.shape[0]} entries, X has {n} rows")
        if not np.all(np.isfinite(self.X)) or not np.all(np.isfinite(self.y)):
            raise ValueError("non-finite entries in data")
        if self.L_bound is not None:
            if self.L_bound < 0:
                raise ValueError("L_bound must be nonnegative")
            mx = float(np.max(np.abs(self.X)))
            if mx > self.L_bound:
                raise ValueError(
                    f"max |X_ij| = {mx} exceeds declared L_bound = {self.L_bound}"
                )

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


def _check_beta(beta, p: int) -> np.ndarray:
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (p,):
        raise ValueError(f"beta has shape {beta.shape}, expected ({p},)")
    return beta


def loss(family: Family, beta, x, y: float) -> float:
    """Single-observation GLM loss -y*(beta@x) + psi(beta@x)."""
    beta = np.asarray(beta, dtype=float)
    x = np.asarray(x, dtype=float)
    if beta.shape != x.shape:
        raise ValueError(f"beta shape {beta.shape} != x shape {x.shape}")
    t = float(beta @ x)
    return -y * t + float(psi(family, t))


def empirical_risk(family: Family, beta, data: Dataset) -> float:
    """Mean of the per-row GLM losses."""
    beta = _check_beta(beta, data.p)
    t = data.X @ beta
    return float(np.mean(-data.y * t + psi(family, t)))


def risk_gradient(family: Family, beta, data: Dataset) -> np.ndarray:
    """Analytic gradient (1/n) X^T (psi'(X beta) - y) of the empirical risk."""
    beta = _check_beta(beta, data.p)
    t = data.X @ beta
    resid = psi_prime(family, t) - data.y
    return (data.X.T @ resid) / data.n
