import pytest

from edmlimit.families import bessel_rw_family, gamma_family, harmonic_poisson_family

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def gamma():
    return gamma_family()


@pytest.fixture(scope="session")
def harmonic():
    return harmonic_poisson_family()


@pytest.fixture(scope="session")
def bessel():
    return bessel_rw_family()


@pytest.fixture(scope="session")
def families(gamma, harmonic, bessel):
    return {"gamma": gamma, "harmonic": harmonic, "bessel": bessel}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
