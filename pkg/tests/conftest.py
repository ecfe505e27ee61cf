import pytest

from plgb.spec import load_spec


@pytest.fixture(scope="session")
def hopf():
    return load_spec("su2_hopf")


@pytest.fixture(scope="session")
def selfaction():
    return load_spec("su2_selfaction")


@pytest.fixture(scope="session")
def s1():
    return load_spec("s1_group")


@pytest.fixture(scope="session")
def base(hopf):
    from plgb.bundle import induce_base

    return induce_base(hopf)


def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance lines at the end of the run."""
    import sys

    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in module.TITLES:
        terminalreporter.write_line(module.line(n))
