import numpy as np
import pytest

from semikit.grid import GridFunction, make_grid

ACCEPTANCE_LINES: list[str] = []


def random_trig(grid, rng, degree=6, real=True):
    """Random smooth trigonometric polynomial of the given degree."""
    x = grid.nodes
    k = np.arange(1, degree + 1)
    decay = 1.0 / k**2
    phase = 2 * np.pi * (x[:, None] - grid.x0) / grid.period * k[None, :]
    cs = rng.standard_normal(degree) * decay
    ss = rng.standard_normal(degree) * decay
    u = rng.standard_normal() + np.cos(phase) @ cs + np.sin(phase) @ ss
    if not real:
        u = u + 1j * (np.cos(phase) @ (rng.standard_normal(degree) * decay))
    return GridFunction(grid, u)


@pytest.fixture
def rng():
    return np.random.default_rng(20241207)


@pytest.fixture
def grid64():
    return make_grid(0.0, 2 * np.pi, 64)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
