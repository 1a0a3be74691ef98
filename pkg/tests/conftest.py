import pytest

from padic_mzv.mzv import FrobeniusEngine, _vp_factorial
from padic_mzv.oracle import SumTables
from padic_mzv.sigma import SigmaAlgebra
from padic_mzv.tables import exact_scale

# acceptance lines collected by tests/test_acceptance.py, echoed after the run
ACCEPTANCE: dict[int, str] = {}


def make_algebra(p: int, n_max: int, weight: int = 6, N: int = 12, D: int = 8) -> SigmaAlgebra:
    scale = exact_scale(p, n_max, weight + 1, N)
    return SigmaAlgebra(SumTables(scale), D, N - (_vp_factorial(D, p) + D + 2))


@pytest.fixture(scope="session")
def alg5():
    return make_algebra(5, 5**5)


@pytest.fixture(scope="session")
def alg3():
    return make_algebra(3, 3**5)


@pytest.fixture(scope="session")
def engine4():
    """The default desk-scale run: p=5, N=12, W=4, D=8, n_max=5^5, j_max=6."""
    engine = FrobeniusEngine(p=5, N=12, W=4, D=8, check_tables=False, check_limits=False)
    return engine, engine.solve()


@pytest.fixture(scope="session")
def engine3_p3():
    engine = FrobeniusEngine(p=3, N=12, W=3, D=8, check_tables=False, check_limits=False)
    return engine, engine.solve()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
