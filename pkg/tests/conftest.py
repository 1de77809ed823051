import pytest
from hypothesis import HealthCheck, settings

from vclab import catalog

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def pytest_sessionstart(session):
    # every catalog group must satisfy the table invariants before anything else runs
    for name in catalog.CATALOG_NAMES:
        catalog.get(name).validate()


@pytest.fixture(scope="session")
def q8():
    return catalog.get("q8")


@pytest.fixture(scope="session")
def d4():
    return catalog.get("d4")


@pytest.fixture(scope="session")
def s3():
    return catalog.get("s3")


@pytest.fixture(scope="session")
def q8_spec():
    from vclab.construction import build_spec
    return build_spec(catalog.get("q8"))


@pytest.fixture(scope="session")
def d4_spec():
    from vclab.construction import build_spec
    return build_spec(catalog.get("d4"))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
