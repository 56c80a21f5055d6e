"""Penalty specifications, structured norms and exact proximal operators.

Penalty convention: all three penalties carry the factor-2 form

* group lasso:  2 * r_n * sum_g sqrt(d_g) ||beta^g||_2
* lasso:        2 * r_n * ||beta||_1
* elastic net:  2 * r_n * ||beta||_1 + t_n * ||beta||_2^2

so a single tuning parameter r_n is shared between the solver and the
error-bound calculators.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .groups import GroupStructure

GROUP_LASSO = "grouplasso"
LASSO = "lasso"
ELASTIC_NET = "elasticnet"
PENALTY_KINDS = (GROUP_LASSO, LASSO, ELASTIC_NET)


@dataclass(frozen=True)
class PenaltySpec:
    """Which penalty to apply and its tuning parameters."""

    kind: str
    r_n: float
    t_n: float = 0.0

    def __post_init__(self):
        if self.kind not in PENALTY_KINDS:
            raise ValueError(f"unknown penalty kind {self.kind!r}")
        if self.r_n < 0:
            raise ValueError("r_n must be nonnegative")
        if self.t_n < 0:
            raise ValueError("t_n must be nonnegative")
        if self.t_n > 0 and self.kind != ELASTIC_NET:
            raise ValueError("t_n is only meaningful for the elastic net")


@dataclass(frozen=True)
class SparsityProfile:
    """Group-level and coordinate-level sparsity of a coefficient vector."""

    active_groups: frozenset[int]
    m_star: int
    gamma_star: int
    s_star: int

    @classmethod
    def from_coefficients(cls, gs: GroupStructure, beta, tol: float = 0.0):
        beta = np.asarray(beta, dtype=float)
        norms = gs.group_norms(beta)
        active = frozenset(int(g) for g in np.nonzero(norms > tol)[0])
        gamma = sum(gs.sizes[g] for g in active)
        s = int(np.count_nonzero(np.abs(beta) > tol))
        return cls(active, len(active), gamma, s)

    @classmethod
    def from_active_groups(cls, gs: GroupStructure, active, s_star=None):
        active = frozenset(int(g) for g in active)
        if any(g < 0 or g >= gs.n_groups for g in active):
            raise ValueError("active group index out of range")
        gamma = sum(gs.sizes[g] for g in active)
        return cls(active, len(active), gamma, gamma if s_star is None else s_star)


def regularizer_norm(gs: GroupStructure, z) -> float:
    """The weighted structured norm sum_g sqrt(d_g) ||z^g||_2."""
    return float(gs.sqrt_sizes @ gs.group_norms(z))


def norm_2_1(gs: GroupStructure, z) -> float:
    """Unweighted group norm sum_g ||z^g||_2."""
    return float(np.sum(gs.group_norms(z)))


def penalty_value(spec: PenaltySpec, gs: GroupStructure, beta) -> float:
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (gs.p,):
        raise ValueError(f"beta has shape {beta.shape}, expected ({gs.p},)")
    if spec.kind == GROUP_LASSO:
        return 2.0 * spec.r_n * regularizer_norm(gs, beta)
    l1 = 2.0 * spec.r_n * float(np.sum(np.abs(beta)))
    if spec.kind == LASSO:
        return l1
    return l1 + spec.t_n * float(beta @ beta)


def _shrink_factors(norms: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    # max(0, 1 - tau/||z||), with the zero-norm case mapped to 0
    with np.errstate(divide="ignore", invalid="ignore"):
        f = 1.0 - thresholds / norms
    f[~np.isfinite(f)] = 0.0
    return np.maximum(f, 0.0)


def prox(spec: PenaltySpec, gs: GroupStructure, z, step: float) -> np.ndarray:
    """Exact proximal operator of step * penalty.

    Group lasso does blockwise shrinkage, lasso coordinatewise soft
    thresholding (the same scaling formula, so singleton groups are
    bitwise identical), elastic net soft thresholding followed by the
    ridge rescale 1/(1 + 2*step*t_n).
    """
    z = np.asarray(z, dtype=float)
    if z.shape != (gs.p,):
        raise ValueError(f"z has shape {z.shape}, expected ({gs.p},)")
    if step <= 0:
        raise ValueError("step must be positive")
    if spec.kind == GROUP_LASSO:
        norms = gs.group_norms(z)
        factors = _shrink_factors(norms, 2.0 * step * spec.r_n * gs.sqrt_sizes)
        return z * np.repeat(factors, gs.sizes)
    u = z * _shrink_factors(np.abs(z), np.full(gs.p, 2.0 * step * spec.r_n))
    if spec.kind == ELASTIC_NET and spec.t_n > 0:
        u /= 1.0 + 2.0 * step * spec.t_n
    return u
