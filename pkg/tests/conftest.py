import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from eqtcatch import (
    GaussianPump,
    ModeModel,
    PiecewiseExpPump,
    TimeGrid,
    biphoton_kernel,
    evolve_equal_time_moments,
    schmidt_decompose,
    reference_params,
)

ROW_A_PUMP = PiecewiseExpPump(5.5, 12e6, 220e-9)
ROW_B_PUMP = GaussianPump(6.5, 40e-9, 120e-9)
FIG2_GRID = TimeGrid(0.0, 600e-9, 241)


def moments_ivp(model, rtol=1e-11):
    """Equal-time moments from an adaptive integrator, written out in real components."""
    ko, ke = model.params.kappa_o, model.params.kappa_e
    kt = 0.5 * (ko + ke)

    def rhs(t, y):
        g = float(model.g(t))
        na, nc, mr, mi = y
        return [-ko * na + 2 * g * mi, -ke * nc + 2 * g * mi, -kt * mr, g * (na + nc + 1) - kt * mi]

    sol = solve_ivp(rhs, (model.grid.t_start, model.grid.t_end), [0, 0, 0, 0], t_eval=model.grid.times,
                    method="DOP853", rtol=rtol, atol=1e-16, max_step=0.5e-9)
    na, nc, mr, mi = sol.y
    return na, nc, mr + 1j * mi


def capture_ivp(fin, kappa, t_span, t_eval):
    """Cavity amplitude for d' = -kappa d / 2 + sqrt(kappa) f_in, from d = 0."""

    def rhs(t, y):
        k = kappa(t)
        d = y[0] + 1j * y[1]
        dd = -0.5 * k * d + math.sqrt(k) * fin(t)
        return [dd.real, dd.imag]

    sol = solve_ivp(rhs, t_span, [0.0, 0.0], t_eval=t_eval, method="DOP853", rtol=1e-12, atol=1e-14)
    return sol.y[0] + 1j * sol.y[1]


@pytest.fixture(scope="session")
def params():
    return reference_params()


@pytest.fixture(scope="session")
def row_a_model(params):
    return ModeModel(params, ROW_A_PUMP, FIG2_GRID)


@pytest.fixture(scope="session")
def row_b_model(params):
    return ModeModel(params, ROW_B_PUMP, FIG2_GRID)


@pytest.fixture(scope="session")
def row_a_traj(row_a_model):
    return evolve_equal_time_moments(row_a_model)


@pytest.fixture(scope="session")
def row_b_traj(row_b_model):
    return evolve_equal_time_moments(row_b_model)


@pytest.fixture(scope="session")
def row_a_kernel(row_a_model, row_a_traj):
    return biphoton_kernel(row_a_model, row_a_traj)


@pytest.fixture(scope="session")
def row_b_kernel(row_b_model, row_b_traj):
    return biphoton_kernel(row_b_model, row_b_traj)


@pytest.fixture(scope="session")
def row_a_schmidt(row_a_kernel):
    return schmidt_decompose(row_a_kernel)


@pytest.fixture(scope="session")
def row_b_schmidt(row_b_kernel):
    return schmidt_decompose(row_b_kernel)


def rel_l2(a, b):
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)) / np.linalg.norm(b))


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance_report(request):
    """Record one PASS/FAIL line per acceptance criterion for the terminal summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def report(label, ok, detail):
        lines.append(f"{label}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
