import math
import warnings

import numpy as np
import pytest

from conftest import ROW_A_PUMP, ROW_B_PUMP, rel_l2
from eqtcatch.dynamics import ModeModel, accidental_intensity, biphoton_kernel, evolve_equal_time_moments
from eqtcatch.errors import InstabilityError
from eqtcatch.fock import TruncationWarning, fock_correlator_oracle, fock_equal_time
from eqtcatch.model import TWO_PI, GaussianPump, SystemParams, TabulatedPump, TimeGrid, ZeroPump

COARSE = TimeGrid(0.0, 600e-9, 33)


@pytest.fixture(scope="module")
def coarse_b(params):
    return ModeModel(params, ROW_B_PUMP, COARSE)


@pytest.fixture(scope="module")
def oracle_b(coarse_b):
    return fock_correlator_oracle(coarse_b, (4, 4))


def test_zero_pump_gives_zero_matrix(params):
    model = ModeModel(params, ZeroPump(), TimeGrid(0, 50e-9, 6))
    assert not np.any(fock_correlator_oracle(model, (3, 3)))


def test_cutoff_validation(coarse_b):
    with pytest.raises(ValueError):
        fock_correlator_oracle(coarse_b, (2, 4))


def test_instability_rejected(params):
    with pytest.raises(InstabilityError):
        fock_equal_time(ModeModel(params, GaussianPump(200, 40e-9, 120e-9), COARSE))


def test_trace_preserved_and_moments_agree(coarse_b):
    ft = fock_equal_time(coarse_b, (4, 4))
    assert np.max(np.abs(ft.trace - 1.0)) <= 1e-8
    tr = evolve_equal_time_moments(coarse_b)
    assert np.max(np.abs(ft.n_c - tr.n_c)) <= 1e-6 * np.max(tr.n_c)
    assert np.max(np.abs(ft.m_ac - tr.m_ac)) <= 1e-6 * np.max(np.abs(tr.m_ac))
    assert np.max(ft.top_population) < 1e-6


def test_wick_factorization(coarse_b, oracle_b):
    """Fourth-order correlator = |pair amplitude|^2 + product of occupations."""
    K = biphoton_kernel(coarse_b)
    acc = accidental_intensity(coarse_b, evolve_equal_time_moments(coarse_b))
    assert rel_l2(K.intensity() + acc, oracle_b) <= 1e-5


def test_gaussian_engine_matches_oracle_row_a(params):
    model = ModeModel(params, ROW_A_PUMP, COARSE)
    G = fock_correlator_oracle(model, (4, 4))
    assert rel_l2(biphoton_kernel(model).intensity(), G) <= 0.05


def test_truncation_warning(params):
    model = ModeModel(params, ROW_B_PUMP, TimeGrid(0, 200e-9, 9))
    with pytest.warns(TruncationWarning):
        fock_correlator_oracle(model, (3, 3), truncation_tol=1e-30)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        fock_correlator_oracle(model, (4, 4))


def test_steady_state_ratio():
    """Constant weak squeezing: n_c / n_a settles at kappa_o / kappa_e in both engines."""
    p = SystemParams(kappa_e_i=0.0, kappa_e_c=TWO_PI * 1e6, kappa_o_i=0.0, kappa_o_c=TWO_PI * 3e6, g0=1.0)
    g = 0.01 * p.threshold
    pump = TabulatedPump((-1.0, 1.0), (g, g))
    model = ModeModel(p, pump, TimeGrid(0, 3e-6, 31), max_step=1e-9)
    ft = fock_equal_time(model, (3, 3))
    tr = evolve_equal_time_moments(model)
    fock_ratio = ft.n_c[-1] / ft.n_a[-1]
    assert tr.n_c[-1] / tr.n_a[-1] == pytest.approx(fock_ratio, rel=0.01)
    assert fock_ratio == pytest.approx(p.kappa_o / p.kappa_e, rel=0.01)
    assert math.isclose(ft.trace[-1], 1.0, abs_tol=1e-8)
