import sys

import numpy as np
import pytest

from desegsim.lattice import AgentType, Coord, World
from desegsim.segregation import Agent

_KINDS = {"E": AgentType.EXPAT, "N": AgentType.NATIVE}


def world_from_picture(picture, regions=None):
    """Build a world from rows like ``"EN.E"``; ``regions`` is an optional id grid."""
    rows = [r for r in picture.strip().splitlines()]
    h, w = len(rows), len(rows[0])
    grid = np.zeros((h, w), dtype=int) if regions is None else np.asarray(regions)
    world = World(grid)
    agents = []
    for y, row in enumerate(rows):
        for x, ch in enumerate(row):
            if ch in _KINDS:
                a = Agent(len(agents), _KINDS[ch], Coord(x, y))
                world.place(a.id, a.agent_type, a.position)
                agents.append(a)
    return world, agents


@pytest.fixture
def picture_world():
    return world_from_picture


def pytest_terminal_summary(terminalreporter):
    results = getattr(sys.modules.get("test_acceptance"), "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for key in sorted(results):
            terminalreporter.write_line(results[key])
