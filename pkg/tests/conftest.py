import pytest

from dca.sessions import generate_corpus


@pytest.fixture(scope="session")
def corpus():
    """Ten attack then ten normal sessions."""
    return generate_corpus(10, 10, base_seed=2024)


@pytest.fixture(scope="session")
def attack(corpus):
    return corpus[0]


@pytest.fixture(scope="session")
def normal(corpus):
    return corpus[10]


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if VERDICTS:
        terminalreporter.section("acceptance")
        for line in VERDICTS:
            terminalreporter.write_line(line)
