import numpy as np
import pytest

from eulerclust.data import HalfmoonSpec, gen_halfmoon, normalize
from eulerclust.euler import RealDataset, scale_angles


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def halfmoon_theta():
    data, _ = normalize(gen_halfmoon(HalfmoonSpec()), "minmax01")
    return scale_angles(data, 1.0)


def gaussian_blobs(seed, n, d, k, spread=0.08):
    rng = np.random.default_rng(seed)
    centers = rng.uniform(0, 1, size=(k, d))
    labels = rng.integers(0, k, size=n)
    X = centers[labels] + rng.normal(0, spread, size=(n, d))
    return RealDataset(X, labels)


# --------------------------------------------------------------------------
# one PASS/FAIL line per acceptance criterion at the end of the run
# --------------------------------------------------------------------------

_acceptance = {}


def pytest_runtest_logreport(report):
    marker = getattr(report, "acceptance", None)
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _acceptance[marker] = "PASS" if report.outcome == "passed" else "FAIL"


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("acceptance")
    if m is not None:
        rep.acceptance = (m.args[0], m.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for (number, name), status in sorted(_acceptance.items()):
        terminalreporter.write_line(f"criterion {number:>2} {name:<42} {status}")
