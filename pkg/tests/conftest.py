from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

from iomarkov.io_table import build_table

DATA = Path(__file__).parent / "data"


def random_economy(rng: np.random.Generator, n: int, y_min: float = 0.05, density: float = 1.0):
    """Flow table with final-demand rates drawn from ``[y_min, 1]``.

    A random trade matrix is scaled so pole ``i`` sends ``1 - y_i`` of its
    output to other poles; value added is drawn freely and outputs solve
    ``X.T = W.T (I - A)^-1`` (computed with numpy, not the package).
    """
    y = rng.uniform(y_min, 1.0, n)
    shape = rng.uniform(0.0, 1.0, (n, n)) * (rng.uniform(size=(n, n)) < density)
    rows = shape.sum(axis=1)
    alpha = np.divide(shape, rows[:, None], out=np.zeros_like(shape), where=rows[:, None] > 0)
    alpha *= (1.0 - y)[:, None]
    w = rng.uniform(0.5, 5.0, n)
    x_out = np.linalg.solve((np.eye(n) - alpha).T, w)
    flows = alpha * x_out[:, None]
    final = x_out - flows.sum(axis=1)
    return build_table([f"P{i + 1}" for i in range(n)], flows, final)


@st.composite
def economies(draw, max_n: int = 10, y_min: float = 0.05):
    n = draw(st.integers(1, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_economy(np.random.default_rng(seed), n, y_min)


def morocco_like_table(seed: int = 7):
    """36 poles shaped like the Moroccan web: 35 mutually trading poles and a
    household pole D97T98 whose whole output goes to final expenditure."""
    rng = np.random.default_rng(seed)
    n = 36
    poles = [f"D{k:02d}" for k in range(1, n)] + ["D97T98"]
    flows = rng.uniform(0.01, 1.0, (n, n))
    flows[:, -1] = 0.01
    flows[-1, :] = 0.0
    final = rng.uniform(10.0, 20.0, n)
    final[-1] = 3.0
    return build_table(poles, flows, final)


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def two_pole():
    from iomarkov.io_table import parse_flow_table

    return parse_flow_table(DATA / "two_pole.csv")


# ---- acceptance reporting --------------------------------------------------

_CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when != "call":
        return
    number, title = mark.args
    _CRITERIA[number] = (title, "PASS" if report.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, verdict = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {verdict}  {title}")
