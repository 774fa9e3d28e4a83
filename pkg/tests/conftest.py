import math

import numpy as np
import pytest
from hypothesis import settings, strategies as st

from onorm.certify import A3
from onorm.haar import SamplerConfig, sample_haar
from onorm.hadamard import sylvester
from onorm.matrix import OrthogonalMatrix

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")

_acceptance_results = []


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for key, value in report.user_properties:
        if key == "acceptance":
            _acceptance_results.append((value, report.outcome, report.duration))


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("acceptance")
        if m is not None:
            item.user_properties.append(("acceptance", (m.args[0], m.args[1])))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), outcome, duration in sorted(_acceptance_results):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] {number:>2}. {title}  ({duration:.1f} s)")


@pytest.fixture
def A():
    return OrthogonalMatrix.from_array(A3)


@pytest.fixture
def H2n():
    return OrthogonalMatrix.from_array(sylvester(1).rescaled())


@pytest.fixture
def H4n():
    return OrthogonalMatrix.from_array(sylvester(2).rescaled())


def rotation(theta):
    c, s = math.cos(theta), math.sin(theta)
    return OrthogonalMatrix.from_array(np.array([[c, -s], [s, c]]))


@st.composite
def haar_matrices(draw, min_n=1, max_n=8):
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    return sample_haar(n, SamplerConfig(seed))
