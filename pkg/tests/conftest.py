import numpy as np
import pytest
from hypothesis import settings

from moarm.dataset import from_rows, generate_synthetic

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

# five transactions over A, B, C used throughout the hand-computed examples
D5_ROWS = [{0, 1, 2}, {0, 1}, {0, 2}, {1, 2}, {0, 1, 2}]


@pytest.fixture
def d5():
    return from_rows(D5_ROWS, ["A", "B", "C"])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_db():
    return generate_synthetic(120, 8, 0.3, seed=3)


# acceptance criteria report one line each at the end of the session
CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        status, title = CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {title}")
