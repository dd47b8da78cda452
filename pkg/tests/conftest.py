import os

import pytest

from attclx.io import fixture_path, load_ohlcv_csv

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


@pytest.fixture(scope="session")
def stand_in():
    return load_ohlcv_csv(fixture_path("stand_in_daily.csv"))

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
