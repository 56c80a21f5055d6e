import numpy as np
import pytest

from grpglm import (
    ELASTIC_NET,
    GROUP_LASSO,
    LASSO,
    GroupStructure,
    PenaltySpec,
    SparsityProfile,
    norm_2_1,
    penalty_value,
    prox,
    regularizer_norm,
)


def test_spec_validation():
    with pytest.raises(ValueError, match="unknown penalty"):
        PenaltySpec("ridge", 0.1)
    with pytest.raises(ValueError, match="r_n"):
        PenaltySpec(LASSO, -0.1)
    with pytest.raises(ValueError, match="t_n"):
        PenaltySpec(LASSO, 0.1, t_n=0.5)
    spec = PenaltySpec(ELASTIC_NET, 0.1, t_n=0.5)
    assert spec.t_n == 0.5


def test_penalty_values_by_hand():
    gs = GroupStructure((2, 2))
    beta = np.array([3.0, 4.0, 0.0, 0.0])
    # group lasso: 2 * r * sqrt(2) * 5
    assert penalty_value(PenaltySpec(GROUP_LASSO, 0.1), gs, beta) == pytest.approx(
        2 * 0.1 * np.sqrt(2) * 5.0, rel=1e-14
    )
    assert penalty_value(PenaltySpec(LASSO, 0.1), gs, beta) == pytest.approx(1.4, rel=1e-14)
    assert penalty_value(PenaltySpec(ELASTIC_NET, 0.1, 0.2), gs, beta) == pytest.approx(
        1.4 + 0.2 * 25.0, rel=1e-14
    )


def test_structured_norms():
    gs = GroupStructure((2, 2))
    z = np.array([3.0, 4.0, 0.0, 1.0])
    assert regularizer_norm(gs, z) == pytest.approx(np.sqrt(2) * 6.0, rel=1e-14)
    assert norm_2_1(gs, z) == pytest.approx(6.0, rel=1e-14)


def test_regularizer_norm_is_a_norm(rng):
    gs = GroupStructure((3, 1, 4))
    for _ in range(50):
        a = rng.normal(size=8)
        b = rng.normal(size=8)
        c = rng.normal()
        na, nb = regularizer_norm(gs, a), regularizer_norm(gs, b)
        assert regularizer_norm(gs, a + b) <= na + nb + 1e-12
        assert regularizer_norm(gs, c * a) == pytest.approx(abs(c) * na, abs=1e-12)


def test_prox_group_shrinkage_by_hand():
    gs = GroupStructure((2,))
    spec = PenaltySpec(GROUP_LASSO, 1.0)
    z = np.array([3.0, 4.0])
    # threshold 2 * step * r * sqrt(2); norm 5
    step = 0.5
    tau = 2 * step * np.sqrt(2)
    np.testing.assert_allclose(prox(spec, gs, z, step), z * (1 - tau / 5.0), rtol=1e-14)
    # entire group zeroed when the norm is below the threshold
    assert np.all(prox(spec, gs, 0.1 * z, step) == 0.0)


def test_prox_lasso_soft_threshold():
    gs = GroupStructure.singletons(3)
    spec = PenaltySpec(LASSO, 0.5)
    u = prox(spec, gs, np.array([2.0, -0.5, 1.0]), 1.0)
    np.testing.assert_allclose(u, [1.0, 0.0, 0.0], atol=1e-15)


def test_prox_elastic_net_rescale():
    gs = GroupStructure.singletons(2)
    z = np.array([2.0, -3.0])
    lasso_u = prox(PenaltySpec(LASSO, 0.5), gs, z, 1.0)
    enet_u = prox(PenaltySpec(ELASTIC_NET, 0.5, t_n=0.25), gs, z, 1.0)
    np.testing.assert_allclose(enet_u, lasso_u / 1.5, rtol=1e-15)
    # t_n = 0 elastic net is exactly the lasso
    same = prox(PenaltySpec(ELASTIC_NET, 0.5, t_n=0.0), gs, z, 1.0)
    assert np.max(np.abs(same - lasso_u)) <= 1e-15


def test_singleton_group_lasso_is_lasso_bitwise(rng):
    gs = GroupStructure.singletons(6)
    for _ in range(20):
        z = rng.normal(size=6) * 2
        r = float(rng.uniform(0.01, 1.0))
        step = float(rng.uniform(0.1, 2.0))
        a = prox(PenaltySpec(GROUP_LASSO, r), gs, z, step)
        b = prox(PenaltySpec(LASSO, r), gs, z, step)
        assert np.array_equal(a, b)


@pytest.mark.parametrize(
    "spec",
    [
        PenaltySpec(GROUP_LASSO, 0.3),
        PenaltySpec(LASSO, 0.2),
        PenaltySpec(ELASTIC_NET, 0.2, 0.4),
    ],
)
def test_prox_optimality(spec, rng):
    """prox(z) minimizes 0.5||u-z||^2 + step*penalty(u) among perturbations."""
    gs = GroupStructure((2, 1, 3))
    for _ in range(100):
        z = rng.normal(size=6) * 2
        step = float(rng.uniform(0.05, 2.0))
        u = prox(spec, gs, z, step)
        base = 0.5 * np.sum((u - z) ** 2) + step * penalty_value(spec, gs, u)
        deltas = rng.normal(size=(200, 6))
        deltas *= (rng.uniform(0, 0.1, size=(200, 1))) / np.linalg.norm(deltas, axis=1, keepdims=True)
        for d in deltas:
            v = u + d
            alt = 0.5 * np.sum((v - z) ** 2) + step * penalty_value(spec, gs, v)
            assert base <= alt + 1e-10


@pytest.mark.parametrize(
    "spec",
    [
        PenaltySpec(GROUP_LASSO, 0.3),
        PenaltySpec(LASSO, 0.2),
        PenaltySpec(ELASTIC_NET, 0.2, 0.4),
    ],
)
def test_prox_nonexpansive(spec, rng):
    gs = GroupStructure((2, 4))
    for _ in range(50):
        z1 = rng.normal(size=6) * 3
        z2 = rng.normal(size=6) * 3
        step = float(rng.uniform(0.05, 2.0))
        d_out = np.linalg.norm(prox(spec, gs, z1, step) - prox(spec, gs, z2, step))
        assert d_out <= np.linalg.norm(z1 - z2) + 1e-12


def test_prox_input_validation():
    gs = GroupStructure((2,))
    with pytest.raises(ValueError, match="shape"):
        prox(PenaltySpec(LASSO, 0.1), gs, np.zeros(3), 1.0)
    with pytest.raises(ValueError, match="step"):
        prox(PenaltySpec(LASSO, 0.1), gs, np.zeros(2), 0.0)


def test_sparsity_profile():
    gs = GroupStructure((2, 2, 3))
    beta = np.array([0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0])
    prof = SparsityProfile.from_coefficients(gs, beta)
    assert prof.active_groups == frozenset({1, 2})
    assert prof.m_star == 2
    assert prof.gamma_star == 5
    assert prof.s_star == 2

    prof2 = SparsityProfile.from_active_groups(gs, [0, 2])
    assert prof2.gamma_star == 5 and prof2.s_star == 5
    with pytest.raises(ValueError, match="out of range"):
        SparsityProfile.from_active_groups(gs, [3])
