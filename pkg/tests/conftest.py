import numpy as np
import pytest
from hypothesis import settings

import inertia_hd as ih

settings.register_profile("suite", deadline=None, max_examples=50)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def quad2():
    """Ill-conditioned 2-d quadratic used across the solver tests."""
    return ih.quadratic_objective(np.diag([1.0, 10.0]))


@pytest.fixture(scope="session")
def quad1():
    """f(x) = x^2/2 in one dimension: every step has a closed form."""
    return ih.quadratic_objective(np.array([[1.0]]))


@pytest.fixture(scope="session")
def tiny_lasso():
    return ih.gen_lasso_instance(m=20, n=40, sparsity=4, seed=3)


@pytest.fixture(scope="session")
def tiny_metric(tiny_lasso):
    return ih.MetricRLS(tiny_lasso)
