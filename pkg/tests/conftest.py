import pytest

from canontree.services import asymptotics


class _LazyCache(dict):
    def __init__(self, factory):
        super().__init__()
        self._factory = factory

    def __missing__(self, t):
        value = self[t] = self._factory(t)
        return value


@pytest.fixture(scope="session")
def q0_cert():
    """Certified singularity per arity, computed on first use."""
    return _LazyCache(asymptotics.solve_q0)


@pytest.fixture(scope="session")
def constants_report():
    """Full constants report per arity, computed on first use."""
    return _LazyCache(asymptotics.compute_constants)
