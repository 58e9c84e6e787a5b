import math

import numpy as np
import pytest

from parkguard.grid import Grid
from parkguard.hj_solver import SolverParams, boundary_phi0, depth_field
from parkguard.terrain import disc_mask


def disc_grid(h, pad=0.1):
    return Grid.from_extent(-1 - pad, 1 + pad, -1 - pad, 1 + pad, h)


@pytest.fixture(scope="session")
def disc04():
    """Unit disc at h = 0.04 with its boundary distance and depth field."""
    g = disc_grid(0.04)
    omega = disc_mask(g, (0.0, 0.0), 1.0)
    phi0 = boundary_phi0(omega)
    depth = depth_field(omega, SolverParams(), phi0)
    X, Y = g.mesh()
    return {"grid": g, "omega": omega, "phi0": phi0, "depth": depth, "r": np.hypot(X, Y)}


@pytest.fixture
def unit_grid():
    return Grid(5, 5, 1.0, (0.0, 0.0))


PI = math.pi


def pytest_terminal_summary(terminalreporter):
    import sys

    lines = []
    for name, mod in list(sys.modules.items()):
        if name.endswith("test_acceptance"):
            lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
