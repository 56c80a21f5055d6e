import math

import numpy as np
import pytest

from grpglm import Family, GroupStructure, SparsityProfile
from grpglm.bounds import (
    BoundInputs,
    bell_bound_holds,
    bell_number,
    bounds_report,
    c_n,
    check_group_stabil,
    kappa_n,
    moment_constant,
    poisson_moment_check,
    theorem1_bounds,
    theorem2_l2_bound,
    theorem3_lasso_bounds,
    theorem6_elasticnet_bounds,
    tuning_threshold,
)


def make_inputs(family=Family.POISSON, L=0.1, B=0.5, A=2.0, n=1000, gs=None,
                active=(0,), k=0.5, K=1.0, s_star=None):
    gs = gs or GroupStructure((2, 2, 2))
    profile = SparsityProfile.from_active_groups(gs, active, s_star=s_star)
    return BoundInputs(family=family, L=L, B=B, A=A, n=n, G_n=gs.n_groups,
                       gs=gs, profile=profile, k_stabil=k, K=K)


def test_input_validation():
    with pytest.raises(ValueError, match="A must exceed"):
        make_inputs(A=1.0)
    with pytest.raises(ValueError, match="positive"):
        make_inputs(L=0.0)
    with pytest.raises(ValueError, match="k_stabil"):
        make_inputs(k=1.0)
    with pytest.warns(UserWarning, match="standing assumption"):
        make_inputs(n=1)


def test_kappa_n():
    assert kappa_n(1.0, 2) == 18.0
    assert kappa_n(0.5, 100) == pytest.approx(8.52, rel=1e-12)
    assert kappa_n(1.0, 10**9) == pytest.approx(17.0, abs=1e-8)


def test_c_n():
    assert c_n(Family.GAUSSIAN, 3.0, 2.0, 10) == 0.5
    assert c_n(Family.POISSON, 1e-300, 1.0, 100) == pytest.approx(0.5, rel=1e-12)
    # 0.5 * exp(-0.1 * (9 + 0.01))
    assert c_n(Family.POISSON, 0.1, 1.0, 100) == pytest.approx(0.5 * math.exp(-0.901), abs=1e-5)
    assert c_n(Family.POISSON, 0.1, 1.0, 100) == pytest.approx(0.20308, abs=1e-5)
    R = 0.5 * (9 * 1.0 + 1 / 100)
    s = 1.0 / (1.0 + math.exp(-R))
    assert c_n(Family.BERNOULLI, 0.5, 1.0, 100) == pytest.approx(0.5 * s * (1 - s), rel=1e-9)
    with pytest.raises(OverflowError):
        c_n(Family.POISSON, 100.0, 10.0, 10)


def test_c_n_positive_everywhere(rng):
    for _ in range(30):
        L = float(rng.uniform(0.01, 2.0))
        B = float(rng.uniform(0.01, 5.0))
        n = int(rng.integers(1, 10000))
        for fam in (Family.POISSON, Family.BERNOULLI, Family.GAUSSIAN):
            try:
                assert c_n(fam, L, B, n) > 0
            except OverflowError:
                pass


def test_moment_constant():
    assert moment_constant(Family.POISSON, 1.0, 1.0) == pytest.approx(math.e, rel=1e-12)
    assert moment_constant(Family.POISSON, 0.0 + 1e-320, 5.0) == pytest.approx(1.0)
    assert moment_constant(Family.BERNOULLI, 3.0, 3.0) == 1.0
    assert moment_constant(Family.GAUSSIAN, 0.1, 0.1) == pytest.approx(
        max(1.0, math.exp(0.01 + 0.5)), rel=1e-12
    )


def test_tuning_threshold_frozen_value():
    # Poisson, A=2, K=1, L=0.1, B=0.5, n=1000, G_n=100:
    # kappa = 8.502, sup psi' = e^{0.8502} > e^{LB} = e^{0.05}, so
    # threshold = 2 * 1 * 0.1 * e^{0.8502} * sqrt(log(200)/1000)
    gs = GroupStructure((1,) * 100)
    inputs = make_inputs(gs=gs, active=(0,))
    expected = 2.0 * 1.0 * 0.1 * math.exp(0.8502) * math.sqrt(math.log(200.0) / 1000.0)
    assert tuning_threshold(inputs) == pytest.approx(expected, abs=1e-12)
    assert tuning_threshold(inputs) == pytest.approx(0.03406795, abs=1e-4)


def test_tuning_threshold_linear_in_A_K_L_gaussian():
    # Gaussian sup|psi'| = radius is linear in L, so only A and K scale
    # linearly for every family; L-linearity holds when the max argument
    # is the moment constant (Bernoulli with small L)
    base = make_inputs(family=Family.BERNOULLI, L=0.01)
    t0 = tuning_threshold(base)
    assert tuning_threshold(make_inputs(family=Family.BERNOULLI, L=0.01, A=4.0)) == pytest.approx(2 * t0, rel=1e-12)
    assert tuning_threshold(make_inputs(family=Family.BERNOULLI, L=0.01, K=3.0)) == pytest.approx(3 * t0, rel=1e-12)
    # Bernoulli max(C, sup) = 1 for small L, so threshold is linear in L
    assert tuning_threshold(make_inputs(family=Family.BERNOULLI, L=0.02)) == pytest.approx(2 * t0, rel=1e-12)


def test_theorem1_independent_recomputation(rng):
    for _ in range(10):
        gs = GroupStructure(tuple(int(s) for s in rng.integers(1, 6, size=5)))
        inputs = make_inputs(gs=gs, active=(0, 2), L=float(rng.uniform(0.01, 0.3)),
                             B=float(rng.uniform(0.1, 1.0)), n=int(rng.integers(100, 5000)),
                             k=float(rng.uniform(0.1, 0.9)))
        r = float(rng.uniform(0.05, 0.5))
        got = theorem1_bounds(inputs, r)
        c = c_n(inputs.family, inputs.L, inputs.B, inputs.n)
        k = inputs.k_stabil
        gam = inputs.profile.gamma_star
        n = inputs.n
        assert got["bound_R"] == pytest.approx(4 / (c * k) * r * gam + (1 + 1 / r) / (2 * n), rel=1e-9)
        assert got["bound_21"] == pytest.approx(
            (4 / (c * k * math.sqrt(gs.d_min))) * r * gam + (1 + 1 / r) / (2 * n * math.sqrt(gs.d_min)),
            rel=1e-9,
        )
        assert got["bound_pred"] == pytest.approx(
            16 / (c * c * k) * r * r * gam + (2 * r + 1) / (2 * c * n), rel=1e-9
        )


def test_theorem2_frozen_value():
    # c_n = 0.5 via Gaussian; k' = 0.5, r_n = 0.1, gamma* = 10, n = 1000,
    # d_max = d_min: 10 * (16/(0.25*0.25) * 0.01 * 10 + 1.2/500 + 0.001)
    gs = GroupStructure((5, 5, 5))
    inputs = make_inputs(family=Family.GAUSSIAN, gs=gs, active=(0, 1), k=0.5, n=1000)
    assert inputs.profile.gamma_star == 10
    assert theorem2_l2_bound(inputs, 0.1) == pytest.approx(256.034, rel=1e-9)


def test_theorem3_frozen_value_and_singleton_equivalence():
    gs = GroupStructure((1,) * 20)
    inputs = make_inputs(family=Family.GAUSSIAN, gs=gs, active=tuple(range(5)), k=0.5, n=1000)
    got = theorem3_lasso_bounds(inputs, 0.1)
    # (4/0.25) * 0.1 * 5 + 11 * 0.0005
    assert got["bound_l1"] == pytest.approx(8.0055, rel=1e-12)
    t1 = theorem1_bounds(inputs, 0.1)
    assert got["bound_l1"] == pytest.approx(t1["bound_R"], rel=1e-12)
    assert got["bound_pred"] == pytest.approx(t1["bound_pred"], rel=1e-12)
    # s* = 0 collapses to the tail term
    empty = make_inputs(family=Family.GAUSSIAN, gs=gs, active=(0,), s_star=0, n=1000)
    assert theorem3_lasso_bounds(empty, 0.1)["bound_l1"] == pytest.approx(
        (1 + 10.0) / 2000.0, rel=1e-12
    )


def test_theorem6_frozen_value_and_coupling_warning():
    gs = GroupStructure((1,) * 20)
    inputs = make_inputs(family=Family.GAUSSIAN, gs=gs, active=tuple(range(5)), k=0.5, n=1000, B=0.2)
    # coupling 2 * t_n * B = r_n holds: t_n = 0.25, B = 0.2, r_n = 0.1
    got = theorem6_elasticnet_bounds(inputs, 0.1, 0.25)
    assert got["bound_l1"] == pytest.approx(6.25 / 0.5 * 0.1 * 5 + 0.0055, rel=1e-12)
    assert got["bound_l1"] == pytest.approx(6.2555, rel=1e-12)
    assert got["bound_pred"] == pytest.approx(
        2 * 6.25 / (0.25 * 0.5) * 0.01 * 5 + (0.2 + 3) / (2 * 0.5 * 1000), rel=1e-12
    )
    with pytest.warns(UserWarning, match="coupling"):
        theorem6_elasticnet_bounds(inputs, 0.1, 0.1)


def test_below_threshold_warning():
    inputs = make_inputs()
    with pytest.warns(UserWarning, match="below the admissible"):
        theorem1_bounds(inputs, 1e-6)


def test_bounds_monotone_in_n(rng):
    """At r_n = tuning_threshold(n), every bound shrinks when n quadruples."""
    for _ in range(20):
        gs = GroupStructure(tuple(int(s) for s in rng.integers(1, 5, size=4)))
        fam = (Family.POISSON, Family.BERNOULLI, Family.GAUSSIAN)[int(rng.integers(3))]
        kwargs = dict(family=fam, gs=gs, active=(0, 1),
                      L=float(rng.uniform(0.01, 0.2)), B=float(rng.uniform(0.1, 0.5)),
                      k=float(rng.uniform(0.2, 0.8)))
        n = int(rng.integers(200, 5000))
        small = make_inputs(n=n, **kwargs)
        large = make_inputs(n=4 * n, **kwargs)
        vals = {}
        for tag, inp in (("small", small), ("large", large)):
            r = tuning_threshold(inp)
            v = list(theorem1_bounds(inp, r).values())
            v.append(theorem2_l2_bound(inp, r))
            v.extend(theorem3_lasso_bounds(inp, r).values())
            vals[tag] = v
        for lo, hi in zip(vals["large"], vals["small"]):
            assert lo < hi


def test_bell_numbers():
    known = [1, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975]
    for k, b in enumerate(known):
        assert bell_number(k) == b
    assert all(bell_bound_holds(k) for k in range(1, 21))
    assert bell_number(4) == 15 and math.factorial(4) == 24
    with pytest.raises(ValueError):
        bell_number(26)
    with pytest.raises(ValueError):
        bell_number(-1)


def test_group_stabil_identity(rng):
    for _ in range(10):
        sizes = tuple(int(s) for s in rng.integers(1, 5, size=int(rng.integers(2, 6))))
        gs = GroupStructure(sizes)
        h = sorted(rng.choice(gs.n_groups, size=int(rng.integers(1, gs.n_groups + 1)), replace=False))
        res = check_group_stabil(np.eye(gs.p), gs, h, c0=3.0, epsilon=1e-3,
                                 n_samples=50, seed=int(rng.integers(1 << 31)))
        assert res.k_hat >= 1.0 - 1e-6


def test_group_stabil_zero_matrix_and_witness_consistency():
    gs = GroupStructure((2, 2))
    res = check_group_stabil(np.zeros((4, 4)), gs, [0], c0=3.0, epsilon=0.01,
                             n_samples=200, seed=7)
    assert 0 < res.k_hat < 1.0
    # the invariant: k_hat is exactly the ratio at the stored witness
    w = res.min_witness
    denom = float(np.sum(gs.group_norms(w)[[0]] ** 2))
    assert res.k_hat == pytest.approx((0.0 + 0.01) / denom, abs=1e-10)


def test_group_stabil_validation():
    gs = GroupStructure((2, 2))
    bad = np.eye(4)
    bad[0, 1] = 1.0
    with pytest.raises(ValueError, match="symmetric"):
        check_group_stabil(bad, gs, [0], 3.0, 0.01, 10, 0)
    with pytest.raises(ValueError, match="nonempty"):
        check_group_stabil(np.eye(4), gs, [], 3.0, 0.01, 10, 0)


def test_poisson_moment_check():
    rep = poisson_moment_check(0.5, 0.5, k_max=4, n_samples=20000, seed=11)
    assert rep.all_pass
    assert [r["k"] for r in rep.rows] == [1, 2, 3, 4]
    for r in rep.rows:
        assert r["bound"] == pytest.approx(math.factorial(r["k"]) * math.exp(r["k"] * 0.25), rel=1e-12)
    # deterministic given the seed
    rep2 = poisson_moment_check(0.5, 0.5, k_max=4, n_samples=20000, seed=11)
    assert rep.rows == rep2.rows
    with pytest.raises(ValueError, match="prohibitive"):
        poisson_moment_check(0.5, 0.5, k_max=7, n_samples=10, seed=0)


def test_bounds_report_shape():
    inputs = make_inputs(B=0.2)
    rep = bounds_report(inputs, 0.1, t_n=0.25)
    for key in ("kappa_n", "c_n", "moment_constant", "tuning_threshold",
                "theorem1_bound_R", "theorem2_bound_l2_sq", "theorem3_bound_l1",
                "theorem6_bound_l1", "r_n", "t_n", "K"):
        assert key in rep
    assert all(isinstance(v, (int, float, str)) for v in rep.values())
    rep_no_enet = bounds_report(inputs, 0.1)
    assert "theorem6_bound_l1" not in rep_no_enet
