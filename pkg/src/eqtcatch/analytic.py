"""Closed-form capture of single photons by a one-port receiving cavity.

The cavity amplitude obeys ``d' = -kappa1(t) d / 2 + sqrt(kappa1(t)) f_in(t)``
and the outgoing field is ``d_out = f_in - sqrt(kappa1) d``.  For unit-norm
input photons the capture efficiency is ``eta(t) = |d(t)|^2``.

Every expression is written in terms of the dimensionless groups
``gamma * t`` and ``kappa1 / gamma`` and uses ``expm1``/``log1p`` so the
degenerate point ``kappa1 == gamma`` is approached smoothly.  Exactly at (or
within a relative 1e-8 of) the degenerate point the explicit limit branch is
used instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEGENERACY_TOL = 1e-8


@dataclass(frozen=True)
class ExpDecayPhoton:
    """Naturally emitted photon, f_in(t) = sqrt(gamma) exp(-gamma t / 2), t >= 0."""

    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")

    def profile(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= 0, np.sqrt(self.gamma) * np.exp(-0.5 * self.gamma * np.maximum(t, 0.0)), 0.0)


@dataclass(frozen=True)
class PiecewiseExpPhoton:
    """Photon rising at ``gamma1`` until ``t0`` and decaying at ``gamma2`` afterwards."""

    gamma1: float
    gamma2: float
    t0: float = 0.0

    def __post_init__(self):
        if not (self.gamma1 > 0 and self.gamma2 > 0):
            raise ValueError("gamma1 and gamma2 must be positive")

    @property
    def peak(self) -> float:
        return math.sqrt(self.gamma1 * self.gamma2 / (self.gamma1 + self.gamma2))


def _degenerate(photon: ExpDecayPhoton, kappa1: float) -> bool:
    return abs(kappa1 / photon.gamma - 1.0) < DEGENERACY_TOL


def _check_kappa(kappa1):
    if not kappa1 > 0:
        raise ValueError("kappa1 must be positive")


def _nonnegative_time(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("time must be non-negative for a photon starting at t = 0")
    return t


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def fixed_coupling_amplitude(photon: ExpDecayPhoton, kappa1: float, t):
    """Cavity amplitude d(t) for constant coupling ``kappa1``."""
    _check_kappa(kappa1)
    t = _nonnegative_time(t)
    gamma = photon.gamma
    x = gamma * t
    if _degenerate(photon, kappa1):
        d = math.sqrt(kappa1 / gamma) * x * np.exp(-0.5 * x)
    else:
        r = kappa1 / gamma
        # e^{-x/2} - e^{-r x/2} = -e^{-x/2} expm1(-(r-1) x / 2)
        d = 2.0 * math.sqrt(r) / (r - 1.0) * np.exp(-0.5 * x) * -np.expm1(-0.5 * (r - 1.0) * x)
    return _scalar(d)


def fixed_coupling_efficiency(photon: ExpDecayPhoton, kappa1: float, t):
    """Capture efficiency for constant coupling, the square of the amplitude."""
    return _scalar(np.square(fixed_coupling_amplitude(photon, kappa1, t)))


def peak_time(photon: ExpDecayPhoton, kappa1: float) -> float:
    """Time at which the fixed-coupling efficiency is maximal."""
    _check_kappa(kappa1)
    gamma = photon.gamma
    if _degenerate(photon, kappa1):
        return 2.0 / gamma
    r = kappa1 / gamma
    return 2.0 * math.log1p(r - 1.0) / ((r - 1.0) * gamma)


def balance_time(photon: ExpDecayPhoton, kappa1: float) -> float:
    """First time the outgoing field vanishes under constant coupling."""
    _check_kappa(kappa1)
    gamma = photon.gamma
    if _degenerate(photon, kappa1):
        return 1.0 / gamma
    r = kappa1 / gamma
    return 2.0 * math.log1p((r - 1.0) / (r + 1.0)) / ((r - 1.0) * gamma)


def tunable_amplitude(photon: ExpDecayPhoton, kappa1: float, t):
    """Cavity amplitude after the balance time when every later photon is kept.

    |d(t)|^2 = |d(t_b)|^2 + integral_{t_b}^{t} |f_in|^2.
    """
    tb = balance_time(photon, kappa1)
    t = np.asarray(t, dtype=float)
    if np.any(t < tb * (1 - 1e-12)):
        raise ValueError("tunable_amplitude is defined for t >= t_b only")
    gamma = photon.gamma
    stored = fixed_coupling_efficiency(photon, kappa1, tb)
    d2 = math.exp(-gamma * tb) - np.exp(-gamma * t) + stored
    return _scalar(np.sqrt(d2))


def tunable_schedule(photon: ExpDecayPhoton, kappa1: float, t):
    """Coupling rate that keeps the outgoing field at zero for t >= t_b."""
    tb = balance_time(photon, kappa1)
    t = np.asarray(t, dtype=float)
    if np.any(t < tb * (1 - 1e-12)):
        raise ValueError("tunable_schedule is defined for t >= t_b only")
    gamma = photon.gamma
    # numerator and denominator multiplied by exp(gamma t) to avoid underflow
    grow = np.exp(gamma * (t - tb))
    return _scalar(kappa1 * gamma / (kappa1 * (grow - 1.0) + gamma * grow))


def tunable_efficiency(photon: ExpDecayPhoton, kappa1: float, t):
    """Efficiency curve with coupling held until t_b and tuned afterwards."""
    tb = balance_time(photon, kappa1)
    t = _nonnegative_time(t)
    before = fixed_coupling_efficiency(photon, kappa1, np.minimum(t, tb))
    gamma = photon.gamma
    after = math.exp(-gamma * tb) - np.exp(-gamma * np.maximum(t, tb)) + fixed_coupling_efficiency(photon, kappa1, tb)
    return _scalar(np.where(t < tb, before, after))


def tunable_efficiency_limit(photon: ExpDecayPhoton, kappa1: float) -> float:
    """Efficiency reached at t -> infinity with the tuned schedule."""
    tb = balance_time(photon, kappa1)
    return math.exp(-photon.gamma * tb) + fixed_coupling_efficiency(photon, kappa1, tb)


def ideal_profile(photon: PiecewiseExpPhoton, t):
    t = np.asarray(t, dtype=float)
    s = t - photon.t0
    rate = np.where(s <= 0, photon.gamma1, -photon.gamma2)
    return _scalar(photon.peak * np.exp(0.5 * rate * s))


def ideal_schedule(photon: PiecewiseExpPhoton, t):
    """Coupling rate that absorbs the piecewise-exponential photon completely."""
    g1, g2 = photon.gamma1, photon.gamma2
    s = np.asarray(t, dtype=float) - photon.t0
    # divide through by exp(g2 s) so the late-time tail decays without overflow
    late = g1 * g2 * np.exp(-g2 * np.maximum(s, 0.0)) / ((g1 + g2) - g1 * np.exp(-g2 * np.maximum(s, 0.0)))
    return _scalar(np.where(s <= 0, g1, late))


def ideal_efficiency(photon: PiecewiseExpPhoton, t):
    g1, g2 = photon.gamma1, photon.gamma2
    s = np.asarray(t, dtype=float) - photon.t0
    total = g1 + g2
    rising = g2 / total * np.exp(g1 * np.minimum(s, 0.0))
    falling = g2 / total + g1 / total * -np.expm1(-g2 * np.maximum(s, 0.0))
    return _scalar(np.where(s <= 0, rising, falling))


def rising_exponential_capture(gamma: float, t):
    """Amplitude and efficiency for f_in = sqrt(gamma) exp(gamma t / 2), t <= 0, kappa1 = gamma.

    The outgoing field vanishes identically, so everything that arrives is kept.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    t = np.asarray(t, dtype=float)
    if np.any(t > 0):
        raise ValueError("the rising photon ends at t = 0")
    return _scalar(np.exp(0.5 * gamma * t)), _scalar(np.exp(gamma * t))
