"""Closed-form constants and finite-sample error bounds, plus empirical
diagnostics for the restricted-quadratic-form (Group Stabil) condition
and the Poisson moment inequality.

The universal constant K is never pinned down theoretically; it is a
user input (default 1) and is echoed back in every report.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .families import Family
from .groups import GroupStructure
from .penalties import SparsityProfile

_SQRT2 = math.sqrt(2.0)


@dataclass
class BoundInputs:
    family: Family
    L: float
    B: float
    A: float
    n: int
    G_n: int
    gs: GroupStructure
    profile: SparsityProfile
    k_stabil: float
    K: float = 1.0

    def __post_init__(self):
        if self.L <= 0 or self.B <= 0 or self.K <= 0:
            raise ValueError("L, B and K must be positive")
        if self.A <= _SQRT2:
            raise ValueError("A must exceed sqrt(2)")
        if self.n < 1 or self.G_n < 1:
            raise ValueError("n and G_n must be positive integers")
        if not 0.0 < self.k_stabil < 1.0:
            raise ValueError("k_stabil must lie in (0, 1)")
        if math.log(2 * self.G_n) / self.n > 1.0:
            warnings.warn(
                "log(2*G_n)/n exceeds 1; the bounds' standing assumption fails",
                stacklevel=2,
            )


def kappa_n(B: float, n: int) -> float:
    """Radius constant 17B + 2/n."""
    return 17.0 * B + 2.0 / n


def c_n(family: Family, L: float, B: float, n: int) -> float:
    """Strong-convexity constant: min of psi''/2 over |x| <= L(9B + 1/n)."""
    R = L * (9.0 * B + 1.0 / n)
    if family is Family.GAUSSIAN:
        return 0.5
    if family is Family.POISSON:
        if R > 700.0:
            raise OverflowError("Poisson curvature constant underflows: L(9B+1/n) too large")
        return 0.5 * math.exp(-R)
    # sigma(R)(1 - sigma(R)) = e^{-R} / (1 + e^{-R})^2, stable for large R
    if R > 700.0:
        raise OverflowError("Bernoulli curvature constant underflows: L(9B+1/n) too large")
    e = math.exp(-R)
    return 0.5 * e / (1.0 + e) ** 2


def moment_constant(family: Family, L: float, B: float) -> float:
    """Moment-growth constant C_{L,B} with E|Y|^k <= k! C^k.

    Poisson has the closed form e^{LB}. Bernoulli responses satisfy
    |Y| <= 1, so 1 works. The Gaussian constant has no closed form here;
    max(1, e^{LB + 1/2}) is a documented surrogate (the factor e^{1/2}
    absorbs the Gaussian moment generating function at unit variance) and
    is excluded from exactness guarantees.
    """
    if family is Family.POISSON:
        if L * B > 700.0:
            raise OverflowError("e^{LB} overflows")
        return math.exp(L * B)
    if family is Family.BERNOULLI:
        return 1.0
    return max(1.0, math.exp(L * B + 0.5))


def _psi_prime_sup(family: Family, radius: float) -> float:
    # closed-form sup of |psi'| over |x| <= radius
    if family is Family.POISSON:
        if radius > 700.0:
            raise OverflowError("psi' supremum overflows")
        return math.exp(radius)
    if family is Family.BERNOULLI:
        return 1.0
    return radius


def tuning_threshold(inputs: BoundInputs) -> float:
    """Smallest admissible tuning parameter
    A*K*L*max(C_{L,B}, sup|psi'|) * sqrt(log(2 G_n)/n)."""
    kap = kappa_n(inputs.B, inputs.n)
    c_lb = moment_constant(inputs.family, inputs.L, inputs.B)
    sup = _psi_prime_sup(inputs.family, inputs.L * kap)
    return (
        inputs.A
        * inputs.K
        * inputs.L
        * max(c_lb, sup)
        * math.sqrt(math.log(2 * inputs.G_n) / inputs.n)
    )


def _warn_if_below_threshold(inputs: BoundInputs, r_n: float):
    if r_n < tuning_threshold(inputs):
        warnings.warn(
            "r_n is below the admissible tuning threshold; the bound's "
            "probability guarantee does not apply",
            stacklevel=3,
        )


def theorem1_bounds(inputs: BoundInputs, r_n: float) -> dict:
    """Group-lasso error bounds in the weighted, unweighted-group and
    prediction metrics."""
    if r_n <= 0:
        raise ValueError("r_n must be positive")
    _warn_if_below_threshold(inputs, r_n)
    c = c_n(inputs.family, inputs.L, inputs.B, inputs.n)
    k = inputs.k_stabil
    gamma = inputs.profile.gamma_star
    n = inputs.n
    tail = (1.0 + 1.0 / r_n) / (2.0 * n)
    bound_r = 4.0 / (c * k) * r_n * gamma + tail
    bound_21 = (4.0 / (c * k * math.sqrt(inputs.gs.d_min))) * r_n * gamma + tail / math.sqrt(
        inputs.gs.d_min
    )
    bound_pred = 16.0 / (c * c * k) * r_n * r_n * gamma + (2.0 * r_n + 1.0) / (2.0 * c * n)
    return {"bound_R": bound_r, "bound_21": bound_21, "bound_pred": bound_pred}


def theorem2_l2_bound(inputs: BoundInputs, r_n: float) -> float:
    """Sharper squared-l2 estimation bound under the stronger restricted
    condition over all group sets of size <= 2 m*."""
    if r_n < 0:
        raise ValueError("r_n must be nonnegative")
    c = c_n(inputs.family, inputs.L, inputs.B, inputs.n)
    kp = inputs.k_stabil
    gamma = inputs.profile.gamma_star
    n = inputs.n
    inner = (
        16.0 / (kp * kp * c * c) * r_n * r_n * gamma
        + (2.0 * r_n + 1.0) / (2.0 * kp * c * n)
        + 1.0 / (2.0 * kp * n)
    )
    return 10.0 * (inputs.gs.d_max / inputs.gs.d_min) * inner


def theorem3_lasso_bounds(inputs: BoundInputs, r_n: float) -> dict:
    """Lasso bounds: the singleton-group special case with s* in place of
    the group coordinate count."""
    if r_n <= 0:
        raise ValueError("r_n must be positive")
    _warn_if_below_threshold(inputs, r_n)
    c = c_n(inputs.family, inputs.L, inputs.B, inputs.n)
    k = inputs.k_stabil
    s = inputs.profile.s_star
    n = inputs.n
    tail = (1.0 + 1.0 / r_n) / (2.0 * n)
    bound_l1 = 4.0 / (c * k) * r_n * s + tail
    bound_pred = 16.0 / (c * c * k) * r_n * r_n * s + (2.0 * r_n + 1.0) / (2.0 * c * n)
    bound_l2 = 10.0 * (
        16.0 / (k * k * c * c) * r_n * r_n * s
        + (2.0 * r_n + 1.0) / (2.0 * k * c * n)
        + 1.0 / (2.0 * k * n)
    )
    return {"bound_l1": bound_l1, "bound_pred": bound_pred, "bound_l2": bound_l2}


def theorem6_elasticnet_bounds(inputs: BoundInputs, r_n: float, t_n: float) -> dict:
    """Elastic net bounds; warns when the coupling 2 t_n B = r_n is broken."""
    if r_n <= 0 or t_n < 0:
        raise ValueError("need r_n > 0 and t_n >= 0")
    if not math.isclose(2.0 * t_n * inputs.B, r_n, rel_tol=1e-9, abs_tol=0.0):
        warnings.warn(
            "elastic net bounds assume the coupling 2*t_n*B = r_n",
            stacklevel=2,
        )
    _warn_if_below_threshold(inputs, r_n)
    c = c_n(inputs.family, inputs.L, inputs.B, inputs.n)
    k = inputs.k_stabil
    s = inputs.profile.s_star
    n = inputs.n
    bound_l1 = (2.5**2) / (t_n + c * k) * r_n * s + (1.0 + 1.0 / r_n) / (2.0 * n)
    bound_pred = (
        2.0 * (2.5**2) / (c * k * (t_n + c * k)) * r_n * r_n * s
        + (2.0 * r_n + 3.0) / (2.0 * c * n)
    )
    return {"bound_l1": bound_l1, "bound_pred": bound_pred}


@dataclass
class GSCheckResult:
    """Heuristic (sampled) estimate of the restricted quadratic-form
    constant; an upper bound on the true one, not a certificate."""

    k_hat: float
    c0: float
    epsilon: float
    n_samples: int
    min_witness: np.ndarray


def _gs_ratio(sigma, gs, h_star_mask, epsilon, delta) -> float:
    denom = float(np.sum(gs.group_norms(delta)[h_star_mask] ** 2))
    if denom <= 0:
        return math.inf
    return (float(delta @ sigma @ delta) + epsilon) / denom


def check_group_stabil(
    sigma: np.ndarray,
    gs: GroupStructure,
    H_star,
    c0: float,
    epsilon: float,
    n_samples: int,
    seed: int,
) -> GSCheckResult:
    """Monte Carlo search for a small restricted quadratic-form ratio.

    Samples directions from the restricted cone (complement mass scaled
    to a uniform fraction of its allowance) and polishes the worst one by
    random local descent. The returned k_hat is the smallest ratio found.
    """
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (gs.p, gs.p):
        raise ValueError(f"sigma has shape {sigma.shape}, expected ({gs.p}, {gs.p})")
    if np.max(np.abs(sigma - sigma.T)) > 1e-10:
        raise ValueError("sigma must be symmetric")
    H_star = sorted(int(g) for g in H_star)
    if not H_star:
        raise ValueError("H_star must be nonempty")
    if any(g < 0 or g >= gs.n_groups for g in H_star):
        raise ValueError("group index out of range")
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")

    h_mask = np.zeros(gs.n_groups, dtype=bool)
    h_mask[H_star] = True
    coord_mask = np.repeat(h_mask, gs.sizes)
    sqrt_d = gs.sqrt_sizes

    rng = np.random.default_rng(seed)

    def project(delta_h, delta_c, u):
        """Assemble a cone member from H*-part, complement part and the
        uniform allowance fraction u."""
        delta = np.zeros(gs.p)
        delta[coord_mask] = delta_h
        gnorm = gs.group_norms(delta)
        allowance = c0 * float(sqrt_d[h_mask] @ gnorm[h_mask]) + epsilon
        comp = np.zeros(gs.p)
        comp[~coord_mask] = delta_c
        cnorm = gs.group_norms(comp)
        mass = float(sqrt_d[~h_mask] @ cnorm[~h_mask])
        if mass > 0:
            comp *= (u * allowance) / mass
        delta[~coord_mask] = comp[~coord_mask]
        return delta

    n_h = int(np.sum(coord_mask))
    n_c = gs.p - n_h

    best = math.inf
    witness = None
    for _ in range(n_samples):
        dh = rng.standard_normal(n_h)
        dc = rng.standard_normal(n_c) if n_c else np.zeros(0)
        u = rng.uniform()
        delta = project(dh, dc, u)
        r = _gs_ratio(sigma, gs, h_mask, epsilon, delta)
        if r < best:
            best, witness = r, delta

    # local polish: random perturbations of the cone parametrization with
    # a shrinking radius, keeping only improvements
    dh = witness[coord_mask].copy()
    dc = witness[~coord_mask].copy()
    # recover the fraction of allowance the witness uses
    gnorm = gs.group_norms(witness)
    allowance = c0 * float(sqrt_d[h_mask] @ gnorm[h_mask]) + epsilon
    mass = float(sqrt_d[~h_mask] @ gnorm[~h_mask])
    u = min(mass / allowance, 1.0) if allowance > 0 else 0.0
    radius = 0.5
    for _ in range(200):
        dh2 = dh + radius * rng.standard_normal(n_h)
        dc2 = dc + radius * rng.standard_normal(n_c) if n_c else dc
        u2 = min(max(u + radius * rng.standard_normal(), 0.0), 1.0)
        cand = project(dh2, dc2, u2)
        r = _gs_ratio(sigma, gs, h_mask, epsilon, cand)
        if r < best:
            best, witness = r, cand
            dh, dc, u = dh2, dc2, u2
        else:
            radius *= 0.97

    return GSCheckResult(
        k_hat=best, c0=c0, epsilon=epsilon, n_samples=n_samples, min_witness=witness
    )


def bell_number(k: int) -> int:
    """Exact Bell number via the Bell triangle; 0 <= k <= 25."""
    if not 0 <= k <= 25:
        raise ValueError("k must be in 0..25")
    row = [1]
    for _ in range(k):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def bell_bound_holds(k: int) -> bool:
    """Whether B_k <= k!, in exact integer arithmetic."""
    return bell_number(k) <= math.factorial(k)


@dataclass
class MomentCheckReport:
    L: float
    B: float
    n_samples: int
    rows: list[dict]

    @property
    def all_pass(self) -> bool:
        return all(not r["violated"] for r in self.rows)


def poisson_moment_check(
    L: float, B: float, k_max: int, n_samples: int, seed: int
) -> MomentCheckReport:
    """Monte Carlo check of E|Y|^k <= k! e^{kLB} for Poisson responses
    with log-rate drawn uniformly from [-LB, LB]."""
    if k_max > 6:
        raise ValueError("k_max above 6 needs prohibitive sample sizes")
    if k_max < 1 or n_samples < 1:
        raise ValueError("k_max and n_samples must be positive")
    rng = np.random.default_rng(seed)
    theta = rng.uniform(-L * B, L * B, size=n_samples)
    y = rng.poisson(np.exp(theta)).astype(float)
    rows = []
    for k in range(1, k_max + 1):
        vals = np.abs(y) ** k
        emp = float(np.mean(vals))
        se = float(np.std(vals, ddof=1) / math.sqrt(n_samples))
        bound = math.factorial(k) * math.exp(k * L * B)
        rows.append(
            {
                "k": k,
                "empirical_moment": emp,
                "bound": bound,
                "std_error": se,
                "violated": emp > bound + 3.0 * se,
            }
        )
    return MomentCheckReport(L=L, B=B, n_samples=n_samples, rows=rows)


def bounds_report(inputs: BoundInputs, r_n: float, t_n: float | None = None) -> dict:
    """Flat name -> number mapping of every calculator output plus the
    echoed inputs, ready for JSON serialization."""
    report = {
        "family": inputs.family.value,
        "L": inputs.L,
        "B": inputs.B,
        "A": inputs.A,
        "K": inputs.K,
        "n": inputs.n,
        "G_n": inputs.G_n,
        "k_stabil": inputs.k_stabil,
        "m_star": inputs.profile.m_star,
        "gamma_star": inputs.profile.gamma_star,
        "s_star": inputs.profile.s_star,
        "r_n": r_n,
        "kappa_n": kappa_n(inputs.B, inputs.n),
        "c_n": c_n(inputs.family, inputs.L, inputs.B, inputs.n),
        "moment_constant": moment_constant(inputs.family, inputs.L, inputs.B),
        "tuning_threshold": tuning_threshold(inputs),
    }
    report.update({f"theorem1_{k}": v for k, v in theorem1_bounds(inputs, r_n).items()})
    report["theorem2_bound_l2_sq"] = theorem2_l2_bound(inputs, r_n)
    report.update({f"theorem3_{k}": v for k, v in theorem3_lasso_bounds(inputs, r_n).items()})
    if t_n is not None:
        report["t_n"] = t_n
        report.update(
            {f"theorem6_{k}": v for k, v in theorem6_elasticnet_bounds(inputs, r_n, t_n).items()}
        )
    return report
