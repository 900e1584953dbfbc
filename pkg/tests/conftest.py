import warnings
from pathlib import Path

import pytest

from qpwalk.model import load_model
from qpwalk.oracle import solve_stationary
from qpwalk.pipeline import analyze_walk, gf_access

PKG_MODELS = Path(__file__).resolve().parents[1] / "src" / "qpwalk" / "models"
DATA = Path(__file__).resolve().parent / "data"


# filled by test_acceptance.py, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def model_path(name: str) -> Path:
    for d in (PKG_MODELS, PKG_MODELS / "example2", DATA):
        if (d / f"{name}.model").exists():
            return d / f"{name}.model"
    raise FileNotFoundError(name)


@pytest.fixture(scope="session")
def w1_spec():
    return load_model(model_path("W1"))


@pytest.fixture(scope="session")
def w1(w1_spec):
    return analyze_walk(w1_spec)


@pytest.fixture(scope="session")
def w1_grid(w1_spec):
    return solve_stationary(w1_spec, N=400, tol=1e-13)


@pytest.fixture(scope="session")
def w1_gf(w1, w1_grid):
    return gf_access(w1, w1_grid)


@pytest.fixture(scope="session")
def x3_spec():
    return load_model(model_path("X3"))


@pytest.fixture(scope="session")
def x3_grid(x3_spec):
    return solve_stationary(x3_spec, N=400, tol=1e-13)


class GridCache:
    """Oracle grids shared across test modules, keyed by (model, N)."""

    def __init__(self):
        self._grids = {}

    def get(self, name: str, N: int):
        key = (name, N)
        if key not in self._grids:
            spec = load_model(model_path(name))
            self._grids[key] = (spec, analyze_walk(spec), solve_stationary(spec, N=N, tol=1e-13))
        return self._grids[key]


@pytest.fixture(scope="session")
def grids():
    return GridCache()


@pytest.fixture(autouse=True)
def _quiet_numpy():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        yield
