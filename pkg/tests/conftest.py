import random

import pytest

from rsparam import generate_basis, shipped_spec

SPEC_NAMES = ("kpz", "pam", "phi4")


@pytest.fixture(scope="session")
def bases():
    return {name: generate_basis(shipped_spec(name)) for name in SPEC_NAMES}


@pytest.fixture(scope="session")
def pam(bases):
    return bases["pam"]


@pytest.fixture
def rng():
    return random.Random(1234)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
