"""Proximal-gradient solver for penalized GLM empirical risk.

The composite objective is ``empirical_risk(beta) + penalty_value(beta)``
with the smooth part handled by gradient steps and the (nonsmooth)
penalty by its exact prox. The Poisson risk has no global Lipschitz
gradient, so step sizes come from a backtracking line search enforcing
the quadratic upper-bound condition; momentum acceleration restarts
whenever it would break monotone descent, so the recorded objective
trace is non-increasing by construction.

Convergence is declared on the KKT residual of the penalized program,
an optimality certificate that can be recomputed independently of the
solve trajectory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .families import (
    POISSON_THETA_MAX,
    Dataset,
    Family,
    empirical_risk,
    psi,
    psi_prime,
    risk_gradient,
)
from .groups import GroupStructure
from .penalties import (
    ELASTIC_NET,
    GROUP_LASSO,
    LASSO,
    PenaltySpec,
    penalty_value,
    prox,
)
from . import _kernel

_FAMILY_CODES = {
    Family.POISSON: _kernel.FAM_POISSON,
    Family.BERNOULLI: _kernel.FAM_BERNOULLI,
    Family.GAUSSIAN: _kernel.FAM_GAUSSIAN,
}
_PENALTY_CODES = {
    GROUP_LASSO: _kernel.PEN_GROUP,
    LASSO: _kernel.PEN_LASSO,
    ELASTIC_NET: _kernel.PEN_ENET,
}


class DivergenceError(RuntimeError):
    """The iterate left the feasible/overflow-safe region or blew up."""


@dataclass
class FitConfig:
    max_iter: int = 10000
    tol: float = 1e-7
    step_init: float = 1.0
    shrink: float = 0.5
    acceleration: bool = False

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.step_init <= 0:
            raise ValueError("step_init must be positive")
        if not 0.0 < self.shrink < 1.0:
            raise ValueError("shrink must be in (0, 1)")


@dataclass
class FitResult:
    beta_hat: np.ndarray
    active_groups: tuple[int, ...]
    objective_trace: np.ndarray
    kkt_residual: float
    iterations: int
    converged: bool
    final_step: float = 1.0


@dataclass
class PathResult:
    lambda_grid: np.ndarray
    fits: list[FitResult]
    lambda_max: float


def _safe_risk(family: Family, data: Dataset, beta: np.ndarray) -> float:
    """Empirical risk, +inf outside the overflow-safe region."""
    t = data.X @ beta
    if family is Family.POISSON and np.max(np.abs(t)) > POISSON_THETA_MAX:
        return math.inf
    return float(np.mean(-data.y * t + psi(family, t)))


def kkt_residual(family, data, gs, spec, beta) -> float:
    """Max first-order optimality violation over groups; 0 iff optimal.

    For lasso/elastic net the check runs over singleton coordinates. The
    elastic net's quadratic term is treated as part of the smooth side.
    """
    beta = np.asarray(beta, dtype=float)
    g = risk_gradient(family, beta, data)
    if spec.kind == ELASTIC_NET:
        g = g + 2.0 * spec.t_n * beta

    if spec.kind == GROUP_LASSO:
        norms = gs.group_norms(beta)
        active = norms > 0
        coef = np.zeros(gs.n_groups)
        coef[active] = 2.0 * spec.r_n * gs.sqrt_sizes[active] / norms[active]
        v = g + np.repeat(coef, np.asarray(gs.sizes)) * beta
        res = gs.group_norms(v)
        gn = gs.group_norms(g)
        res[~active] = np.maximum(gn[~active] - 2.0 * spec.r_n * gs.sqrt_sizes[~active], 0.0)
        return float(np.max(res))

    active = beta != 0.0
    res_active = np.abs(g[active] + 2.0 * spec.r_n * np.sign(beta[active]))
    res_zero = np.maximum(np.abs(g[~active]) - 2.0 * spec.r_n, 0.0)
    worst = 0.0
    if res_active.size:
        worst = float(np.max(res_active))
    if res_zero.size:
        worst = max(worst, float(np.max(res_zero)))
    return worst


def lambda_max(family, data: Dataset, gs: GroupStructure, spec_kind: str) -> float:
    """Smallest r_n at which beta = 0 is optimal."""
    g = risk_gradient(family, np.zeros(data.p), data)
    if spec_kind == GROUP_LASSO:
        return float(np.max(gs.group_norms(g) / gs.sqrt_sizes)) / 2.0
    return float(np.max(np.abs(g))) / 2.0


def _objective(family, data, gs, spec, beta) -> float:
    r = _safe_risk(family, data, beta)
    if not math.isfinite(r):
        return math.inf
    return r + penalty_value(spec, gs, beta)


def _backtrack(family, data, gs, spec, y, f_y, grad_y, step, shrink):
    """Prox-gradient step from y with the sufficient-decrease condition.

    Returns (u, f_u, step). Shrinks until the smooth part satisfies
    f(u) <= f(y) + grad(y).(u-y) + ||u-y||^2 / (2 step).
    """
    slack = 1e-12 * (1.0 + abs(f_y))
    for _ in range(200):
        u = prox(spec, gs, y - step * grad_y, step)
        f_u = _safe_risk(family, data, u)
        if math.isfinite(f_u):
            d = u - y
            bound = f_y + float(grad_y @ d) + float(d @ d) / (2.0 * step)
            if f_u <= bound + slack:
                return u, f_u, step
        step *= shrink
    raise DivergenceError("line search failed: step shrank below usable range")


def fit(
    family: Family,
    data: Dataset,
    gs: GroupStructure,
    spec: PenaltySpec,
    config: FitConfig | None = None,
    warm_start: np.ndarray | None = None,
) -> FitResult:
    """Minimize empirical risk + penalty by accelerated proximal gradient."""
    config = config or FitConfig()
    if gs.p != data.p:
        raise ValueError(f"group structure covers {gs.p} coordinates, data has {data.p}")
    if spec.r_n == 0 and data.p > data.n:
        raise ValueError("unpenalized fit requires p <= n")

    x0 = np.zeros(data.p) if warm_start is None else np.array(warm_start, dtype=float)
    if x0.shape != (data.p,):
        raise ValueError("warm_start has wrong shape")

    X = np.ascontiguousarray(data.X, dtype=float)
    y = np.ascontiguousarray(data.y, dtype=float)
    x, trace, n_trace, iterations, status, step = _kernel.solve_kernel(
        X, y,
        gs.offsets.astype(np.int64), gs.sizes_array.astype(np.int64),
        gs.sqrt_sizes.astype(float),
        _FAMILY_CODES[family], _PENALTY_CODES[spec.kind],
        float(spec.r_n), float(spec.t_n), x0,
        float(config.tol), int(config.max_iter),
        float(config.step_init), float(config.shrink),
        bool(config.acceleration),
    )
    if status == _kernel.STATUS_BLOWUP:
        if iterations == 0:
            raise DivergenceError("starting point is outside the overflow-safe region")
        raise DivergenceError(f"objective blew up at iteration {iterations}")
    if status == _kernel.STATUS_LINESEARCH:
        raise DivergenceError("line search failed: step shrank below usable range")

    # the stored certificate is recomputed outside the iteration loop
    residual = kkt_residual(family, data, gs, spec, x)
    converged = residual <= config.tol

    norms = gs.group_norms(x)
    active = tuple(int(j) for j in np.nonzero(norms > 0)[0])
    return FitResult(
        beta_hat=x,
        active_groups=active,
        objective_trace=trace[:n_trace].copy(),
        kkt_residual=residual,
        iterations=iterations,
        converged=converged,
        final_step=step,
    )


def path(
    family: Family,
    data: Dataset,
    gs: GroupStructure,
    spec_kind: str,
    n_lambda: int,
    ratio: float,
    config: FitConfig | None = None,
    t_n: float = 0.0,
) -> PathResult:
    """Warm-started fits over a log-spaced grid from lambda_max down."""
    if n_lambda < 2:
        raise ValueError("n_lambda must be at least 2")
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must be in (0, 1)")
    config = config or FitConfig()
    lmax = lambda_max(family, data, gs, spec_kind)
    if lmax <= 0:
        raise ValueError("lambda_max is zero: the origin is already optimal everywhere")
    grid = np.geomspace(lmax, ratio * lmax, n_lambda)

    fits: list[FitResult] = []
    warm = None
    step = config.step_init
    for i, lam in enumerate(grid):
        spec = PenaltySpec(spec_kind, float(lam), t_n)
        cfg = FitConfig(
            max_iter=config.max_iter,
            tol=config.tol,
            step_init=step,
            shrink=config.shrink,
            acceleration=config.acceleration,
        )
        try:
            res = fit(family, data, gs, spec, cfg, warm_start=warm)
        except DivergenceError as exc:
            raise DivergenceError(f"fit failed at grid index {i} (lambda={lam}): {exc}") from exc
        fits.append(res)
        warm = res.beta_hat
        step = res.final_step
    return PathResult(lambda_grid=grid, fits=fits, lambda_max=lmax)


def select_lambda(path_result: PathResult, family: Family, valid_data: Dataset):
    """Pick the grid point minimizing validation mean squared error of the
    fitted mean; exact ties go to the larger (sparser) lambda."""
    if not path_result.fits:
        raise ValueError("empty path")
    errors = []
    with np.errstate(over="ignore"):
        for res in path_result.fits:
            beta = res.beta_hat
            if beta.shape != (valid_data.p,):
                raise ValueError("validation data dimension mismatch")
            mu = psi_prime(family, np.minimum(valid_data.X @ beta, POISSON_THETA_MAX)
                           if family is Family.POISSON else valid_data.X @ beta)
            err = float(np.mean((valid_data.y - mu) ** 2))
            errors.append(err)
    idx = int(np.argmin(errors))  # first occurrence == largest lambda
    return float(path_result.lambda_grid[idx]), path_result.fits[idx].beta_hat
