import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from stable_alloc import CenterSet, Region, build_grid  # noqa: E402


@pytest.fixture
def ring_instance():
    """Unit 1-torus, 8 cells, centers at 0.25 and 0.75."""
    region = Region.torus(1.0)
    return build_grid(region, (8,)), CenterSet(region, [[0.25], [0.75]])


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
