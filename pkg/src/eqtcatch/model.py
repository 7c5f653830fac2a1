"""System parameters, pump envelopes and time grids.

All rates are angular (rad/s) and all times are in seconds.  Human-facing
values such as ``"2π×0.55 MHz"`` go through :func:`parse_quantity` and
:func:`format_quantity`.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import NamedTuple, Union

import numpy as np

TWO_PI = 2.0 * math.pi

_RATE_UNITS = {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9, "THz": 1e12}
_TIME_UNITS = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "ns": 1e-9, "ps": 1e-12}

_QUANTITY_RE = re.compile(
    r"^\s*(?P<twopi>(2\s*(π|pi)\s*[×x*·]?\s*))?"
    r"(?P<value>[-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?)\s*"
    r"(?P<unit>[a-zA-Zµ]+)\s*$"
)


def parse_quantity(text: str) -> float:
    """Parse ``"2π×0.55 MHz"``, ``"12 MHz"`` or ``"40 ns"`` into SI units.

    A leading ``2π×`` (or ``2pi*``) multiplies the value by 2π, giving an
    angular rate in rad/s.
    """
    match = _QUANTITY_RE.match(text)
    if match is None:
        raise ValueError(f"cannot parse quantity {text!r}")
    value = float(match["value"])
    unit = match["unit"]
    if unit in _RATE_UNITS:
        scale = _RATE_UNITS[unit]
    elif unit in _TIME_UNITS:
        if match["twopi"]:
            raise ValueError(f"2π prefix is meaningless for a time: {text!r}")
        scale = _TIME_UNITS[unit]
    else:
        raise ValueError(f"unknown unit {unit!r} in {text!r}")
    if match["twopi"]:
        value *= TWO_PI
    return value * scale


def format_quantity(value: float, unit: str, two_pi: bool = False) -> str:
    """Inverse of :func:`parse_quantity` for a chosen display unit."""
    scale = _RATE_UNITS.get(unit) or _TIME_UNITS.get(unit)
    if scale is None:
        raise ValueError(f"unknown unit {unit!r}")
    shown = value / scale
    if two_pi:
        shown /= TWO_PI
    text = f"{shown:.12g} {unit}"
    return f"2π×{text}" if two_pi else text


@dataclass(frozen=True)
class SystemParams:
    """Transducer rates in rad/s.

    ``omega_o`` and ``omega_e`` are carried for bookkeeping only; the
    rotating-frame dynamics never use them.
    """

    kappa_e_i: float
    kappa_e_c: float
    kappa_o_i: float
    kappa_o_c: float
    g0: float
    omega_o: float = TWO_PI * 190e12
    omega_e: float = TWO_PI * 5e9

    def __post_init__(self):
        for name in ("kappa_e_c", "kappa_o_c", "g0", "omega_o", "omega_e"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        # zero intrinsic loss is allowed as a lossless limiting case
        for name in ("kappa_e_i", "kappa_o_i"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def kappa_e(self) -> float:
        return self.kappa_e_i + self.kappa_e_c

    @property
    def kappa_o(self) -> float:
        return self.kappa_o_i + self.kappa_o_c

    @property
    def threshold(self) -> float:
        """Parametric-instability threshold sqrt(kappa_e * kappa_o) / 2."""
        return 0.5 * math.sqrt(self.kappa_e * self.kappa_o)


def reference_params() -> SystemParams:
    """Cavity electro-optic parameters used throughout the examples."""
    return SystemParams(
        kappa_e_i=TWO_PI * 0.55e6,
        kappa_e_c=TWO_PI * 1.25e6,
        kappa_o_i=TWO_PI * 0.65e9,
        kappa_o_c=TWO_PI * 0.65e9,
        g0=TWO_PI * 260e3,
        omega_o=TWO_PI * 190e12,
        omega_e=TWO_PI * 5e9,
    )


@dataclass(frozen=True)
class PiecewiseExpPump:
    """Exponentially rising squeezing that switches off at ``mu``.

    g(t) = G1 exp(gamma (t - mu) / 2) g0 for t < mu, and 0 afterwards.
    """

    G1: float
    gamma: float
    mu: float

    def __post_init__(self):
        if not (self.G1 > 0 and self.gamma > 0 and self.mu > 0):
            raise ValueError("PiecewiseExpPump needs G1, gamma, mu > 0")

    def multiplier(self, t):
        t = np.asarray(t, dtype=float)
        # clip the exponent so t >> mu never overflows inside np.where
        arg = np.minimum(0.5 * self.gamma * (t - self.mu), 0.0)
        return np.where(t < self.mu, self.G1 * np.exp(arg), 0.0)


@dataclass(frozen=True)
class GaussianPump:
    """g(t) = G2 exp(-(t - nu)^2 / (2 sigma^2)) g0."""

    G2: float
    sigma: float
    nu: float

    def __post_init__(self):
        if not (self.G2 > 0 and self.sigma > 0):
            raise ValueError("GaussianPump needs G2, sigma > 0")

    def multiplier(self, t):
        t = np.asarray(t, dtype=float)
        return self.G2 * np.exp(-((t - self.nu) ** 2) / (2.0 * self.sigma**2))


@dataclass(frozen=True)
class TabulatedPump:
    """Linearly interpolated multiplier table, zero outside its support."""

    times: tuple
    values: tuple

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or times.size < 2:
            raise ValueError("TabulatedPump needs two equal-length 1-D sequences (>= 2 samples)")
        if np.any(np.diff(times) <= 0):
            raise ValueError("TabulatedPump times must be strictly increasing")
        if np.any(values < 0):
            raise ValueError("TabulatedPump multipliers must be non-negative")
        object.__setattr__(self, "times", tuple(times.tolist()))
        object.__setattr__(self, "values", tuple(values.tolist()))

    @classmethod
    def from_samples(cls, samples) -> "TabulatedPump":
        samples = list(samples)
        return cls(tuple(s[0] for s in samples), tuple(s[1] for s in samples))

    def multiplier(self, t):
        return np.interp(np.asarray(t, dtype=float), self.times, self.values, left=0.0, right=0.0)


@dataclass(frozen=True)
class ZeroPump:
    """No pump at all; useful as a control case."""

    def multiplier(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))


PumpShape = Union[PiecewiseExpPump, GaussianPump, TabulatedPump, ZeroPump]


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_start .. t_end`` with ``n_points`` samples."""

    t_start: float
    t_end: float
    n_points: int
    times: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ValueError("t_end must exceed t_start")
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise ValueError("n_points must be an integer >= 2")
        times = np.linspace(self.t_start, self.t_end, int(self.n_points))
        times.setflags(write=False)
        object.__setattr__(self, "times", times)

    @property
    def dt(self) -> float:
        return (self.t_end - self.t_start) / (self.n_points - 1)

    @property
    def weights(self) -> np.ndarray:
        """Trapezoidal quadrature weights."""
        w = np.full(self.n_points, self.dt)
        w[0] = w[-1] = 0.5 * self.dt
        return w

    def refined(self, factor: int) -> "TimeGrid":
        return TimeGrid(self.t_start, self.t_end, (self.n_points - 1) * factor + 1)

    def same_as(self, other: "TimeGrid") -> bool:
        return (self.t_start, self.t_end, self.n_points) == (other.t_start, other.t_end, other.n_points)


def squeezing_strength(pump: PumpShape, params: SystemParams, t):
    """Squeezing strength g(t) in rad/s (scalar in, scalar out)."""
    g = pump.multiplier(t) * params.g0
    return float(g) if np.ndim(g) == 0 else g


class Stability(NamedTuple):
    stable: bool
    margin: float


def stability_check(pump: PumpShape, params: SystemParams, grid: TimeGrid) -> Stability:
    """Compare the largest sampled squeezing strength with the threshold.

    ``margin`` is max_t g(t) / threshold; the pump is usable when it is < 1.
    """
    g_max = float(np.max(pump.multiplier(grid.times))) * params.g0
    margin = g_max / params.threshold
    return Stability(bool(margin < 1.0), float(margin))
