import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "numeric",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("numeric")


@pytest.fixture(scope="session")
def poisson_grid():
    """512 equispaced samples of the mean-removed Poisson kernel (a = 1/2)."""
    from trigfit.core import SampleGrid

    a = 0.5
    n = 512
    x = np.arange(n) / n
    y = (1 - a * a) / (1 - 2 * a * np.cos(2 * np.pi * x) + a * a) - 1.0
    return SampleGrid(x, y)


@pytest.fixture(scope="session")
def poisson_model(poisson_grid):
    from trigfit.core import FitConfig
    from trigfit.pronyaaa import fit_pronyaaa

    model, report = fit_pronyaaa(poisson_grid, FitConfig(tol=1e-11))
    assert report.converged
    return model


@pytest.fixture(scope="session")
def poisson_expsum():
    """Exact one-term coefficient model of the mean-removed Poisson kernel."""
    from trigfit.core import ExpSum

    return ExpSum(np.array([1.0 + 0j]), np.array([np.log(0.5) + 0j]), 0.0)
