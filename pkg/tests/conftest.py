import numpy as np
import pytest

from optomemristor.config import device_params, load_config


@pytest.fixture(scope="session")
def cfg():
    return load_config()


@pytest.fixture(scope="session")
def nv_params(cfg):
    return device_params(cfg, "ag-ag-nonvolatile")


@pytest.fixture(scope="session")
def vol_params(cfg):
    return device_params(cfg, "pt-ag-volatile")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance summary ------------------------------------------------------

_CRITERIA: dict[str, dict] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number = marker.args[0]
    entry = _CRITERIA.setdefault(number, {"title": marker.args[1], "passed": True, "ran": False})
    if report.when == "call":
        entry["ran"] = True
        entry["measured"] = dict(item.user_properties)
    if report.failed:
        entry["passed"] = False


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        status = "PASS" if entry["passed"] and entry["ran"] else "FAIL"
        measured = ", ".join(f"{k}={v}" for k, v in entry.get("measured", {}).items())
        tr.write_line(f"{status}  criterion {number:2d}: {entry['title']}"
                      + (f"  [{measured}]" if measured else ""))
