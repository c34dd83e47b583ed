import numpy as np
import pytest

from ncg_dirac.models import model_m2, model_polygon, model_weighted_graph


def two_node(lam_xy=-1.0, lam_yx=-1.0, **kw):
    return model_weighted_graph(["x", "y"], [("x", "y"), ("y", "x")], {("x", "y"): lam_xy, ("y", "x"): lam_yx}, **kw)


TRIANGLE_ARROWS = [(0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0)]


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture
def pair():
    return two_node()


@pytest.fixture
def triangle():
    return model_polygon(3, -1.0)


@pytest.fixture
def m2_i():
    return model_m2("i", -1.0)


@pytest.fixture
def m2_ii():
    return model_m2("ii", -1.0, 1j)


_CRITERIA: dict[int, str] = {}


@pytest.fixture
def criterion():
    def record(number: int, ok: bool, detail: str):
        _CRITERIA[number] = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[k])
