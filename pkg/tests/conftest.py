import numpy as np
import pytest

from ramimo import BetaDistribution, SystemParams, analytic_moments

# Desk-scale reference point used across modules: cheap enough for CI yet
# busy enough (collisions, load) to exercise every term of the bounds.
DESK = dict(k=50, m=32, tau_u=60, tau_p=10, p_a=0.2)
DESK_SNR_DB = 10.0
DESK_ALPHA = 0.25


@pytest.fixture(scope="session")
def desk_dist() -> BetaDistribution:
    return BetaDistribution.from_snr_db(DESK_SNR_DB, DESK_ALPHA)


@pytest.fixture(scope="session")
def desk_params() -> SystemParams:
    return SystemParams(**DESK)


@pytest.fixture(scope="session")
def desk_moments(desk_dist):
    return analytic_moments(desk_dist)


def random_scenarios(seed: int, count: int = 100):
    """Random collision scenarios shared by the identity checks."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        c = int(rng.integers(0, 5))
        n_other = int(rng.integers(0, 8))
        tau_p = int(rng.integers(1, 40))
        m = int(rng.integers(2, 300))
        betas = rng.uniform(0.5, 20.0, size=1 + c + n_other)
        yield c, n_other, tau_p, m, betas
