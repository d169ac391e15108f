import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from volsample import new_discretized_function  # noqa: E402


def random_instance(seed, m=None, n=None, weights="mixed"):
    rng = np.random.default_rng(seed)
    m = m or int(rng.integers(2, 7))
    n = n or int(rng.integers(2, 9))
    values = rng.standard_normal((m, n))
    w = rng.uniform(0.2, 3.0, n) if weights == "mixed" else np.ones(n)
    return new_discretized_function(values, w)


@pytest.fixture
def diag21():
    return new_discretized_function([[2.0, 0.0], [0.0, 1.0]], [1.0, 1.0])


@pytest.fixture
def identity2():
    return new_discretized_function(np.eye(2), [1.0, 1.0])


_ACCEPTANCE = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker and rep.when == "call":
        detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
        _ACCEPTANCE.append((marker.args[0], rep.passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}" + (f"  ({detail})" if detail else ""))
