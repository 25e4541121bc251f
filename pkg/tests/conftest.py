import numpy as np
import pytest

from nsacvdw import FarField, Grid1D, State, VdwParams


@pytest.fixture
def reduced():
    """Reduced constants: critical point at (1, 1, 1)."""
    return VdwParams(a=3.0, b=1.0 / 3.0, R=8.0 / 3.0)


@pytest.fixture
def smooth_params():
    return VdwParams(epsilon=1.0, c_v=5.0)


@pytest.fixture
def smooth_far():
    return FarField(3.0, 1.2)


def perturbed_state(grid, far, dv=0.05, du=0.02, dth=0.03, chi_dip=0.05):
    """Small Gaussian perturbation of the far field with chi near +1."""
    x = grid.x
    c = 0.5 * (grid.x_min + grid.x_max)
    g = np.exp(-4 * (x - c) ** 2)
    st = State(grid, 0.0, far.v_bar + dv * g, du * (x - c) * g,
               far.theta_bar + dth * np.exp(-4 * (x - c - 0.5) ** 2), 1.0 - chi_dip * g)
    st.v[[0, -1]] = far.v_bar
    st.u[[0, -1]] = 0.0
    st.theta[[0, -1]] = far.theta_bar
    st.chi[[0, -1]] = 1.0
    return st


@pytest.fixture
def small_grid():
    return Grid1D(-5.0, 5.0, 129)


ACCEPTANCE = {}


def record_criterion(number, ok, detail, part=""):
    """Remember one acceptance line; printed in the terminal summary."""
    label = f"{number:2d}{part}".ljust(3)
    ACCEPTANCE[number, part] = f"criterion {label}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(ACCEPTANCE[number, part])


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[number])
