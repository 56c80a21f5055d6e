import numpy as np
import pytest

from grpglm import Dataset, Family, GroupStructure


def random_instance(rng, family, n, gs, beta_scale=0.3):
    """A dataset drawn from the family's own model at a random sparse beta."""
    p = gs.p
    X = rng.uniform(-1.0, 1.0, size=(n, p))
    beta = np.zeros(p)
    k = rng.integers(1, gs.n_groups + 1)
    for g in rng.choice(gs.n_groups, size=k, replace=False):
        sl = gs.slice(int(g))
        beta[sl] = rng.uniform(-beta_scale, beta_scale, size=sl.stop - sl.start)
    t = X @ beta
    if family is Family.POISSON:
        y = rng.poisson(np.exp(t)).astype(float)
    elif family is Family.BERNOULLI:
        y = (rng.uniform(size=n) < 1.0 / (1.0 + np.exp(-t))).astype(float)
    else:
        y = t + rng.normal(size=n)
    return Dataset(X=X, y=y), beta


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
