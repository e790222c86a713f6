import numpy as np
import pytest

from dvlaccel.simulator import DvlErrorModel, ManeuverProfile, simulate_segment
from dvlaccel.types import VelocityWindow


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_window(rng, n=None):
    n = n or int(rng.integers(2, 30))
    t = np.cumsum(rng.uniform(0.1, 2.0, n)) + rng.uniform(-50, 50)
    v = rng.uniform(-3, 3, (n, 3))
    return VelocityWindow(t, v)


@pytest.fixture
def const_accel_segment():
    prof = ManeuverProfile.constant_acceleration((1.0, 0.0, 0.0), (0.05, 0.0, 0.0))
    return simulate_segment(prof, DvlErrorModel.perfect(), 400, 1, seed=0, segment_id="ca")


# acceptance criteria: collect per-criterion outcomes and print one line each
_CRITERIA: dict[int, dict] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            item.user_properties += [("criterion", m.args[0]), ("title", m.args[1])]


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    entry = _CRITERIA.setdefault(props["criterion"], {"title": props.get("title", ""), "ok": True, "details": []})
    entry["ok"] &= report.passed
    if props.get("detail"):
        entry["details"].append(props["detail"])
    elif report.failed:
        entry["details"].append(f"{report.head_line} failed")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        e = _CRITERIA[num]
        status = "PASS" if e["ok"] else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d} {status}  {e['title']}: {'; '.join(e['details'])}")
