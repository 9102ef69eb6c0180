import math

import numpy as np
import pytest

from mlsorth.pointset import make_pointset


@pytest.fixture
def grid9():
    g = [-1.0, 0.0, 1.0]
    return make_pointset([(a, b) for b in g for a in g])


@pytest.fixture
def circle6():
    t = [k * math.pi / 3 for k in range(6)]
    return make_pointset([(math.cos(a), math.sin(a)) for a in t])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# ----------------------------------------------------------------------------
# acceptance summary: one line per criterion at the end of the run

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def record():
    def _record(name: str, passed: bool, detail: str = "") -> bool:
        _ACCEPTANCE.append((name, bool(passed), detail))
        print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
        return bool(passed)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
