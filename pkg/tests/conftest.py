import os
import random

import pytest

from qspec import load_spec

SPECS = os.path.join(os.path.dirname(__file__), os.pardir, "specs")


def spec_path(name):
    return os.path.normpath(os.path.join(SPECS, name))


@pytest.fixture(scope="session")
def vending():
    return load_spec([spec_path("vending.qs")])


@pytest.fixture(scope="session")
def grants():
    return load_spec([spec_path("grants.qs")])


@pytest.fixture(scope="session")
def sender():
    return load_spec([spec_path("sender.qs")])


@pytest.fixture(scope="session")
def conflict():
    return load_spec([spec_path("conflict.qs")])


@pytest.fixture
def rng():
    return random.Random(1234)


# one line per acceptance criterion, repeated at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
