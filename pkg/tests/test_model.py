import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eqtcatch.model import (
    TWO_PI,
    GaussianPump,
    PiecewiseExpPump,
    SystemParams,
    TabulatedPump,
    TimeGrid,
    ZeroPump,
    format_quantity,
    parse_quantity,
    squeezing_strength,
    stability_check,
    reference_params,
)


@pytest.mark.parametrize("text, expected", [
    ("2π×0.55 MHz", TWO_PI * 0.55e6),
    ("2pi*1.25MHz", TWO_PI * 1.25e6),
    ("2π×260 kHz", TWO_PI * 260e3),
    ("2π·0.65 GHz", TWO_PI * 0.65e9),
    ("12 MHz", 12e6),
    ("40 ns", 40e-9),
    ("1e-3 s", 1e-3),
])
def test_parse_quantity(text, expected):
    assert parse_quantity(text) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("text", ["", "2π×40 ns", "12 furlongs", "MHz", "2π× MHz"])
def test_parse_quantity_rejects(text):
    with pytest.raises(ValueError):
        parse_quantity(text)


def test_quantity_round_trip_text():
    text = "2π×0.55 MHz"
    value = parse_quantity(text)
    assert value == pytest.approx(TWO_PI * 0.55e6, rel=1e-15)
    assert format_quantity(value, "MHz", two_pi=True) == text


@given(st.floats(1e-3, 1e3), st.sampled_from(["kHz", "MHz", "GHz"]), st.booleans())
def test_format_parse_round_trip(x, unit, two_pi):
    value = x * {"kHz": 1e3, "MHz": 1e6, "GHz": 1e9}[unit] * (TWO_PI if two_pi else 1.0)
    assert parse_quantity(format_quantity(value, unit, two_pi)) == pytest.approx(value, rel=1e-11)


def test_reference_totals():
    p = reference_params()
    assert p.kappa_e == p.kappa_e_i + p.kappa_e_c
    assert p.kappa_o == p.kappa_o_i + p.kappa_o_c
    assert p.kappa_e == pytest.approx(TWO_PI * 1.8e6)
    assert p.threshold == pytest.approx(0.5 * math.sqrt(p.kappa_e * p.kappa_o))


@pytest.mark.parametrize("field", ["kappa_e_c", "kappa_o_c", "g0", "omega_o"])
def test_system_params_positive(field):
    kwargs = dict(kappa_e_i=1.0, kappa_e_c=1.0, kappa_o_i=1.0, kappa_o_c=1.0, g0=1.0)
    kwargs[field] = 0.0
    with pytest.raises(ValueError):
        SystemParams(**kwargs)


def test_zero_intrinsic_loss_allowed():
    p = SystemParams(kappa_e_i=0.0, kappa_e_c=2.0, kappa_o_i=0.0, kappa_o_c=3.0, g0=1.0)
    assert p.kappa_e == 2.0 and p.kappa_o == 3.0
    with pytest.raises(ValueError):
        SystemParams(kappa_e_i=-1.0, kappa_e_c=2.0, kappa_o_i=0.0, kappa_o_c=3.0, g0=1.0)


def test_piecewise_exp_values():
    p = reference_params()
    pump = PiecewiseExpPump(5.5, 12e6, 220e-9)
    assert squeezing_strength(pump, p, 220e-9 * (1 - 1e-12)) == pytest.approx(5.5 * p.g0, rel=1e-9)
    assert squeezing_strength(pump, p, 220e-9) == 0.0
    assert squeezing_strength(pump, p, 1.0) == 0.0
    t = 100e-9
    assert squeezing_strength(pump, p, t) == pytest.approx(5.5 * math.exp(6e6 * (t - 220e-9)) * p.g0)


def test_gaussian_peak():
    p = reference_params()
    pump = GaussianPump(6.5, 40e-9, 120e-9)
    assert squeezing_strength(pump, p, 120e-9) == pytest.approx(6.5 * p.g0)
    assert squeezing_strength(pump, p, 160e-9) == pytest.approx(6.5 * math.exp(-0.5) * p.g0)


def test_tabulated_interpolates_and_clamps():
    pump = TabulatedPump.from_samples([(0.0, 0.0), (1.0, 2.0), (3.0, 0.0)])
    assert pump.multiplier(0.5) == pytest.approx(1.0)
    assert pump.multiplier(2.0) == pytest.approx(1.0)
    assert pump.multiplier(-1.0) == 0.0 and pump.multiplier(4.0) == 0.0


@pytest.mark.parametrize("times, values", [((0.0, 0.0, 1.0), (1, 1, 1)), ((0.0, 1.0), (1.0, -1.0)), ((0.0,), (1.0,))])
def test_tabulated_validation(times, values):
    with pytest.raises(ValueError):
        TabulatedPump(times, values)


@pytest.mark.parametrize("make", [
    lambda: PiecewiseExpPump(0.0, 1.0, 1.0),
    lambda: PiecewiseExpPump(1.0, 1.0, 0.0),
    lambda: GaussianPump(1.0, 0.0, 0.0),
    lambda: GaussianPump(-1.0, 1.0, 0.0),
])
def test_pump_validation(make):
    with pytest.raises(ValueError):
        make()


@settings(max_examples=50)
@given(st.floats(0.1, 10), st.floats(1e5, 1e8), st.floats(1e-8, 1e-6), st.lists(st.floats(-1e-5, 1e-5), min_size=1, max_size=20))
def test_pump_non_negative_and_single_jump(G1, gamma, mu, ts):
    pump = PiecewiseExpPump(G1, gamma, mu)
    vals = pump.multiplier(np.array(ts))
    assert np.all(vals >= 0) and np.all(np.isfinite(vals))
    # continuous left of mu, exactly zero from mu on
    assert pump.multiplier(mu * (1 - 1e-12)) == pytest.approx(G1, rel=1e-6)
    assert pump.multiplier(mu) == 0.0


@given(st.floats(0.1, 10), st.floats(1e-9, 1e-6), st.floats(-1e-6, 1e-6))
def test_gaussian_non_negative(G2, sigma, nu):
    t = np.linspace(-5e-6, 5e-6, 101)
    vals = GaussianPump(G2, sigma, nu).multiplier(t)
    assert np.all(vals >= 0) and np.max(vals) <= G2


def test_grid_basics():
    g = TimeGrid(0.0, 600e-9, 241)
    assert g.dt == pytest.approx(2.5e-9)
    assert g.times[0] == 0.0 and g.times[-1] == 600e-9
    assert np.sum(g.weights) == pytest.approx(600e-9)
    assert g.refined(2).n_points == 481
    with pytest.raises(ValueError):
        g.times[0] = 1.0
    for bad in [(1.0, 0.0, 10), (0.0, 1.0, 1), (0.0, 1.0, 2.5)]:
        with pytest.raises(ValueError):
            TimeGrid(*bad)


def test_stability_examples():
    p = reference_params()
    grid = TimeGrid(0.0, 600e-9, 241)
    ok, margin = stability_check(GaussianPump(6.5, 40e-9, 120e-9), p, grid)
    assert ok
    # 6.5 * 260 kHz over sqrt(1.8 MHz * 1.3 GHz) / 2, all with 2π
    assert margin == pytest.approx(6.5 * 260e3 / (0.5 * math.sqrt(1.8e6 * 1.3e9)), rel=1e-9)
    assert margin == pytest.approx(0.070, abs=5e-4)
    assert stability_check(ZeroPump(), p, grid) == (True, 0.0)
    assert not stability_check(GaussianPump(200, 40e-9, 120e-9), p, grid).stable
