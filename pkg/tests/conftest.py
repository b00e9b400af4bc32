import numpy as np
import pytest

from intreg import DesignOptions, design, saint_venant_system, transport_system
from intreg.heat_example import HeatProblem, heat_gain


@pytest.fixture(scope="session")
def transport():
    return transport_system()


@pytest.fixture(scope="session")
def transport_cert(transport):
    return design(transport, DesignOptions(mu=1.0))


@pytest.fixture(scope="session")
def saint_venant():
    return saint_venant_system(c=1.0, d=1.0, k0=0.5, k1=0.5, b0=1.0, b1=1.0)


@pytest.fixture(scope="session")
def saint_venant_cert(saint_venant):
    return design(saint_venant)


@pytest.fixture(scope="session")
def heat_problem():
    return HeatProblem.build(2000)


@pytest.fixture(scope="session")
def heat_gain_data(heat_problem):
    return heat_gain(heat_problem)


def random_hyperbolic(rng, n_max=3, constant=False, lambda1_zero=False):
    """Random valid hyperbolic system; smooth coefficients unless constant."""
    from intreg.model_core import HyperbolicSystem

    n = int(rng.integers(1, n_max + 1))
    ell = int(rng.integers(0, n + 1))
    m = int(rng.integers(1, n + 1))
    signs = np.where(np.arange(n) < ell, 1.0, -1.0)
    base = rng.uniform(0.5, 2.0, size=n)
    amp = rng.uniform(0.0, 0.3, size=n) * (0.0 if constant else 1.0)
    phase = rng.uniform(0.0, 2 * np.pi, size=n)

    def lam0(s):
        return signs * (base + amp * np.sin(2 * np.pi * s + phase))

    if lambda1_zero:
        lam1 = np.zeros((n, n))
    else:
        coef = rng.uniform(-0.4, 0.4, size=(n, n))
        shift = rng.uniform(0.0, 2 * np.pi, size=(n, n))

        def lam1(s):
            return coef * np.cos(np.pi * s + shift)

    K = rng.uniform(-0.5, 0.5, size=(n, n))
    K *= 0.8 / max(1.0, np.linalg.norm(K, 2))
    B = rng.uniform(-1.0, 1.0, size=(n, m))
    L1 = rng.uniform(-1.0, 1.0, size=(m, n))
    L2 = rng.uniform(-1.0, 1.0, size=(m, n))
    return HyperbolicSystem.from_callables(
        n=n, ell=ell, m=m, lambda0=lam0, lambda1=lam1, K=K, B=B, L1=L1, L2=L2)
