import numpy as np
import pytest

from coactive.tasks import RankingContext, RankingTask


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def two_doc_task():
    ctx = RankingContext(1, [[1.0, 0.0], [0.0, 1.0]])
    return RankingTask([ctx]), ctx


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
