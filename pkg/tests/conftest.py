from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from acceptance_log import LINES  # noqa: E402


def pytest_terminal_summary(terminalreporter):
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES, key=lambda s: int(s.split()[1].rstrip(":").rstrip("abc"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def unit_sphere3():
    from hil import make_surface

    return make_surface("sphere:n=3")
