import numpy as np
import pytest

from vcst_rcp.geometry import RelayCandidate, Workspace
from vcst_rcp.model import Robot, Scenario
from vcst_rcp.transport_graph import build_graph


def random_graph(rng, n_goals, n_relays, lam=None, size=100.0, speed=None):
    """Random geometric transport graph; relays are free points standing in for candidates."""
    lam = float(rng.uniform(0, 10)) if lam is None else lam
    speed = float(rng.uniform(1, 5)) if speed is None else speed
    pts = rng.uniform(0, size, size=(1 + n_goals + n_relays, 2))
    relays = [RelayCandidate(tuple(map(float, p)), (k, k + 1), 0.0) for k, p in enumerate(pts[1 + n_goals:])]
    return build_graph(tuple(pts[0]), [tuple(p) for p in pts[1:1 + n_goals]], relays, speed, lam)


def make_scenario(source, goals, robots, capacity=4, speed=5.0, t_service=5.0, size=(100.0, 100.0)):
    return Scenario(workspace=Workspace.box(*size), source=tuple(source), goals=[tuple(g) for g in goals],
                    robots=[Robot(i, tuple(p), capacity, speed) for i, p in enumerate(robots)],
                    t_service=t_service)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one summary line per acceptance criterion, filled from tests marked with @pytest.mark.criterion
_CRITERIA: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by the test")
    config.addinivalue_line("markers", "slow: long-running statistical test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or not (rep.when == "call" or rep.failed):
        return
    number, title = mark.args
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    _CRITERIA[number] = (title, "PASS" if rep.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(_CRITERIA):
        title, status, detail = _CRITERIA[n]
        terminalreporter.write_line(f"C{n:<2} {status}  {title}" + (f"  [{detail}]" if detail else ""))
