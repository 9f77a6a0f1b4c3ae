import numpy as np
import pytest

from stiffwave import backend
from stiffwave.model import CaseDefinition


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def zero_case():
    """A trivial case with zero solution and zero forcing."""
    def zero(x, t):
        return np.zeros_like(np.asarray(x, dtype=float))
    return CaseDefinition(name="zero", eps=0.1, v_exact=zero, u_exact=zero,
                          g=zero)


@pytest.fixture
def restore_backend():
    previous = backend.active_name()
    yield
    backend.set_backend(previous)
