import numpy as np
import pytest

from wintgen import constructions as C
from wintgen.immersion import ImmersionSpec


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def cylinder_z2():
    return C.build("cylinder", C.catalog("holomorphic:z^2"), 1)


@pytest.fixture(scope="session")
def veronese_cone():
    return C.build("cone", C.catalog("veronese"), 0)


@pytest.fixture(scope="session")
def graph3():
    return ImmersionSpec.create(["u", "v", "w"], ["u", "v", "w", "u^2+v^2", "u*v"])


@pytest.fixture(scope="session")
def sphere3():
    return ImmersionSpec.create(
        ["u", "v", "w"],
        ["cos(u)*cos(v)*cos(w)", "cos(u)*cos(v)*sin(w)", "cos(u)*sin(v)", "sin(u)"],
        [(-0.5, 0.5)] * 3,
    )


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line for an acceptance criterion, then assert it."""

    def _record(number, title, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {title} -- {detail}"
        ACCEPTANCE_LINES.append((number, line))
        print(line)
        assert ok, line

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
