"""Numerical capture of a sampled photon by a cavity with tunable coupling.

The receiving cavity obeys ``d' = -kappa1(t) d / 2 + sqrt(kappa1(t)) f_in(t)``
and reflects ``d_out = f_in - sqrt(kappa1) d``.  Between grid samples the
photon is a cubic spline; its energy antiderivative is kept in closed form
so balanced coupling laws can be evaluated at any instant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline, PPoly
from scipy.optimize import brentq

from .errors import NoBalanceError
from .integrate import substeps
from .model import TWO_PI, TimeGrid

DEFAULT_KAPPA1_INIT = TWO_PI * 2e6
DEFAULT_BOUNDS = (0.0, TWO_PI * 20e6)
# kappa1 * step stays below this, keeping the RK4 truncation error near 1e-11 per step
STEP_RATE_PRODUCT = 0.02
# the input spline changes on the grid scale, so each interval gets at least this many steps
MIN_SUBSTEPS = 8


def _energy_ppoly(spline: CubicSpline) -> PPoly:
    """Antiderivative of |spline(t)|^2 as an exact piecewise polynomial."""
    c = spline.c
    out = np.zeros((2 * c.shape[0] - 1, c.shape[1]))
    for i in range(c.shape[0]):
        for j in range(c.shape[0]):
            out[i + j] += np.real(c[i] * np.conj(c[j]))
    return PPoly(out, spline.x).antiderivative()


@dataclass(frozen=True)
class InputPhoton:
    """Sampled incoming photon, renormalized to unit energy.

    ``norm`` is the energy of the samples as supplied.  Energy is measured on
    the cubic-spline interpolant that the integrator actually sees.
    """

    grid: TimeGrid
    amplitude: np.ndarray
    norm: float
    _spline: CubicSpline = field(repr=False, compare=False)
    _energy: PPoly = field(repr=False, compare=False)

    @classmethod
    def from_samples(cls, grid: TimeGrid, amplitude) -> "InputPhoton":
        amp = np.asarray(amplitude, dtype=complex)
        if amp.shape != (grid.n_points,):
            raise ValueError(f"expected {grid.n_points} samples, got {amp.shape}")
        if not np.all(np.isfinite(amp)):
            raise ValueError("photon samples must be finite")
        spline = CubicSpline(grid.times, amp)
        energy = _energy_ppoly(spline)
        norm = float(energy(grid.t_end))
        if norm > 0:
            amp = amp / math.sqrt(norm)
            spline = CubicSpline(grid.times, amp)
            energy = _energy_ppoly(spline)
        return cls(grid, amp, norm, spline, energy)

    @classmethod
    def from_function(cls, grid: TimeGrid, fn: Callable) -> "InputPhoton":
        return cls.from_samples(grid, fn(grid.times))

    def __call__(self, t):
        return self._spline(t)

    def power(self, t):
        return np.abs(self._spline(t)) ** 2

    def energy_until(self, t):
        """Energy delivered between the grid start and ``t``."""
        return self._energy(t)

    @property
    def total_energy(self) -> float:
        return float(self._energy(self.grid.t_end))

    def trapezoid_norm(self) -> float:
        return float(np.sum(self.grid.weights * np.abs(self.amplitude) ** 2))


@dataclass(frozen=True)
class _Segment:
    start: float
    kind: str  # "const", "clamp" or "balanced"
    value: float  # coupling for const/clamp, stored energy at ``start`` for balanced


@dataclass(frozen=True)
class CouplingSchedule:
    """Coupling rate kappa1(t) sampled on a grid, with an exact evaluator.

    ``balance_index`` is the first grid index at or after ``t_balance``;
    ``clamped`` flags samples where a bound was enforced.
    """

    grid: TimeGrid
    kappa1: np.ndarray
    balance_index: int | None = None
    t_balance: float | None = None
    clamped: np.ndarray | None = None
    _rate: Callable | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.clamped is None:
            object.__setattr__(self, "clamped", np.zeros(self.grid.n_points, dtype=bool))

    @classmethod
    def constant(cls, grid: TimeGrid, kappa1: float) -> "CouplingSchedule":
        if kappa1 < 0:
            raise ValueError("coupling rate must be non-negative")
        return cls(grid, np.full(grid.n_points, float(kappa1)), _rate=lambda t: np.full(np.shape(t), float(kappa1)))

    @classmethod
    def from_function(cls, grid: TimeGrid, fn: Callable) -> "CouplingSchedule":
        return cls(grid, np.asarray(fn(grid.times), dtype=float), _rate=fn)

    @classmethod
    def from_samples(cls, grid: TimeGrid, kappa1) -> "CouplingSchedule":
        """Piecewise-linear schedule through the given samples."""
        k = np.asarray(kappa1, dtype=float)
        return cls(grid, k, _rate=lambda t: np.interp(t, grid.times, k))

    def rate(self, t):
        if self._rate is None:
            return np.interp(t, self.grid.times, self.kappa1)
        return np.asarray(self._rate(t), dtype=float)


def _segments_rate(segments, photon: InputPhoton, bounds):
    starts = np.array([s.start for s in segments])
    lo, hi = bounds

    def rate(t):
        t = np.asarray(t, dtype=float)
        idx = np.clip(np.searchsorted(starts, t, side="right") - 1, 0, len(segments) - 1)
        out = np.empty(t.shape)
        for k, seg in enumerate(segments):
            mask = idx == k
            if not np.any(mask):
                continue
            if seg.kind == "balanced":
                stored = seg.value + photon.energy_until(t[mask]) - photon.energy_until(seg.start)
                out[mask] = photon.power(t[mask]) / stored
            else:
                out[mask] = seg.value
        return np.clip(out, lo, hi)

    return rate


def _rk4(d, e_out, h, f3, k3):
    """One RK4 step of the cavity amplitude and the reflected energy.

    ``f3``/``k3`` hold input amplitude and coupling at the start, middle and end.
    """
    sk = [math.sqrt(k) for k in k3]

    def rhs(i, dd):
        dout = f3[i] - sk[i] * dd
        return -0.5 * k3[i] * dd + sk[i] * f3[i], dout.real**2 + dout.imag**2

    a1, r1 = rhs(0, d)
    a2, r2 = rhs(1, d + 0.5 * h * a1)
    a3, r3 = rhs(1, d + 0.5 * h * a2)
    a4, r4 = rhs(2, d + h * a3)
    return d + h / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4), e_out + h / 6.0 * (r1 + 2 * r2 + 2 * r3 + r4)


def _lattice(grid: TimeGrid, kappa_scale: float, max_step: float | None):
    if max_step is None:
        max_step = grid.dt / MIN_SUBSTEPS
        if kappa_scale > 0:
            max_step = min(max_step, STEP_RATE_PRODUCT / kappa_scale)
    n_sub = substeps(grid.dt, max_step)
    h = grid.dt / n_sub
    n_steps = n_sub * (grid.n_points - 1)
    stage_t = grid.t_start + 0.5 * h * np.arange(2 * n_steps + 1)
    return n_sub, h, n_steps, stage_t


@dataclass(frozen=True)
class CaptureRun:
    photon: InputPhoton
    schedule: CouplingSchedule
    d: np.ndarray
    d_out: np.ndarray
    eta: np.ndarray
    reflected: np.ndarray  # integral of |d_out|^2 up to each sample

    @property
    def times(self) -> np.ndarray:
        return self.photon.grid.times

    def bookkeeping_residual(self) -> np.ndarray:
        """eta + reflected + still-to-come input - total input, per sample."""
        delivered = self.photon.energy_until(self.times)
        total = self.photon.total_energy
        return self.eta * total + self.reflected + (total - delivered) - total


def simulate_capture(photon: InputPhoton, schedule: CouplingSchedule, max_step: float | None = None) -> CaptureRun:
    """Integrate the cavity from d = 0 under a given coupling schedule."""
    grid = photon.grid
    if not grid.same_as(schedule.grid):
        raise ValueError("photon and schedule grids differ")
    n_sub, h, n_steps, stage_t = _lattice(grid, float(np.max(schedule.kappa1)), max_step)
    kappa = schedule.rate(stage_t)
    if np.any(kappa < 0):
        raise ValueError("coupling schedule takes negative values")
    fin = photon(stage_t).tolist()
    kappa = kappa.tolist()

    n = grid.n_points
    d_s = np.zeros(n, dtype=complex)
    refl = np.zeros(n)
    d, e_out = 0j, 0.0
    for step in range(n_steps):
        j = 2 * step
        d, e_out = _rk4(d, e_out, h, fin[j: j + 3], kappa[j: j + 3])
        if (step + 1) % n_sub == 0:
            k = (step + 1) // n_sub
            d_s[k], refl[k] = d, e_out
    total = photon.total_energy
    eta = np.abs(d_s) ** 2 / total if total > 0 else np.zeros(n)
    d_out = photon.amplitude - np.sqrt(schedule.rate(grid.times)) * d_s
    return CaptureRun(photon, schedule, d_s, d_out, eta, refl)


def synthesize_schedule(photon: InputPhoton, kappa1_init: float = DEFAULT_KAPPA1_INIT,
                        bounds=DEFAULT_BOUNDS, max_step: float | None = None) -> CouplingSchedule:
    """Hold ``kappa1_init`` until the reflection vanishes, then keep it vanishing.

    The balance instant is the first zero crossing of Re(d_out), measured
    after rotating the photon so its largest sample is real and positive, and
    is located by linear interpolation.  From there on the coupling is
    |f_in|^2 / |d|^2 with |d|^2 growing by exactly the incoming energy.  If
    that law leaves ``bounds`` the bound is held with the ordinary cavity
    equation until the law is satisfiable again.
    """
    lo, hi = bounds
    if not lo <= kappa1_init <= hi:
        raise ValueError("kappa1_init must lie within bounds")
    if photon.total_energy <= 0:
        raise ValueError("cannot balance a photon with zero energy")
    grid = photon.grid
    scale = hi if math.isfinite(hi) else kappa1_init
    n_sub, h, n_steps, stage_t = _lattice(grid, max(scale, kappa1_init), max_step)
    fin = photon(stage_t)
    power = (np.abs(fin) ** 2).tolist()
    energy = photon.energy_until(stage_t).tolist()
    fin = fin.tolist()
    peak = photon.amplitude[int(np.argmax(np.abs(photon.amplitude)))]
    unphase = peak.conjugate() / abs(peak) if peak != 0 else 1.0

    def dout_re(f, k, d):
        return ((f - math.sqrt(k) * d) * unphase).real

    segments = [_Segment(grid.t_start, "const", kappa1_init)]
    d = 0j
    t_bal = None
    min_dout = abs(fin[0])
    prev = dout_re(fin[0], kappa1_init, d)
    step = 0
    while step < n_steps:
        j = 2 * step
        d_new, _ = _rk4(d, 0.0, h, fin[j: j + 3], [kappa1_init] * 3)
        cur = dout_re(fin[j + 2], kappa1_init, d_new)
        min_dout = min(min_dout, abs(fin[j + 2] - math.sqrt(kappa1_init) * d_new))
        if prev > 0 and cur <= 0:
            t0 = stage_t[j]
            t_bal = t0 + h * prev / (prev - cur)
            # hold up to the crossing, then restart on the balanced law
            ts = np.array([t0, 0.5 * (t0 + t_bal), t_bal])
            hb = t_bal - t0
            if hb > 0:
                d, _ = _rk4(d, 0.0, hb, photon(ts).tolist(), [kappa1_init] * 3)
            stored = abs(d) ** 2
            segments.append(_Segment(t_bal, "balanced", stored))
            t_next = stage_t[j + 2]
            if t_next > t_bal:
                ts = np.array([t_bal, 0.5 * (t_bal + t_next), t_next])
                ks = photon.power(ts) / (stored + photon.energy_until(ts) - photon.energy_until(t_bal))
                d, _ = _rk4(d, 0.0, t_next - t_bal, photon(ts).tolist(), np.clip(ks, lo, hi).tolist())
            step += 1
            break
        d, prev = d_new, cur
        step += 1
    if t_bal is None:
        raise NoBalanceError(
            f"outgoing field never crossed zero with kappa1_init = {kappa1_init:.6g} rad/s", min_dout
        )

    # balanced/clamped phase; switches are located inside the step so the
    # schedule converges at the order of the integrator
    seg = segments[-1]
    seg_energy = photon.energy_until(seg.start)

    def law(t):
        return photon.power(t) / (seg.value + photon.energy_until(t) - seg_energy)

    def advance(d0, t0, t1, rate):
        if t1 <= t0:
            return d0
        ts = np.array([t0, 0.5 * (t0 + t1), t1])
        d1, _ = _rk4(d0, 0.0, t1 - t0, photon(ts).tolist(), np.clip(rate(ts), lo, hi).tolist())
        return d1

    while step < n_steps:
        j = 2 * step
        t0, t1 = stage_t[j], stage_t[j + 2]
        if seg.kind == "balanced":
            ks = [power[j + i] / (seg.value + energy[j + i] - seg_energy) for i in range(3)]
            out = [i for i in range(3) if not lo <= ks[i] <= hi]
            if not out:
                d, _ = _rk4(d, 0.0, h, fin[j: j + 3], ks)
                step += 1
                continue
            i = out[0]
            bound = hi if ks[i] > hi else lo
            t_x = t0
            if i > 0:
                t_x = brentq(lambda t: float(law(t)) - bound, stage_t[j + i - 1], stage_t[j + i], xtol=1e-6 * h)
            d = advance(d, t0, t_x, law)
            seg = _Segment(t_x, "clamp", bound)
            segments.append(seg)
            d = advance(d, t_x, t1, lambda t: np.full(np.shape(t), bound))
        else:
            const = lambda t, v=seg.value: np.full(np.shape(t), v)  # noqa: E731

            def excess(t, d0=d, t0=t0, v=seg.value):
                # positive while the balanced law would still leave the bounds
                dd = abs(advance(d0, t0, t, const)) ** 2
                p = float(photon.power(t))
                return p - v * dd if v >= hi else v * dd - p

            d_new, _ = _rk4(d, 0.0, h, fin[j: j + 3], [seg.value] * 3)
            if excess(t0) > 0 >= excess(t1):
                t_x = brentq(excess, t0, t1, xtol=1e-6 * h)
                d = advance(d, t0, t_x, const)
                seg = _Segment(t_x, "balanced", abs(d) ** 2)
                seg_energy = float(photon.energy_until(t_x))
                segments.append(seg)
                d = advance(d, t_x, t1, law)
            elif excess(t0) <= 0:
                seg = _Segment(t0, "balanced", abs(d) ** 2)
                seg_energy = energy[j]
                segments.append(seg)
                continue
            else:
                d = d_new
        step += 1

    rate = _segments_rate(segments, photon, bounds)
    samples = rate(grid.times)
    starts = np.array([s.start for s in segments])
    seg_idx = np.clip(np.searchsorted(starts, grid.times, side="right") - 1, 0, len(segments) - 1)
    clamped = np.array([segments[i].kind == "clamp" for i in seg_idx])
    balance_index = int(np.searchsorted(grid.times, t_bal, side="left"))
    return CouplingSchedule(grid, samples, balance_index, float(t_bal), clamped, rate)


def catch(photon: InputPhoton, kappa1_init: float = DEFAULT_KAPPA1_INIT, bounds=DEFAULT_BOUNDS,
          max_step: float | None = None) -> CaptureRun:
    """Synthesize a schedule for ``photon`` and run the capture with it.

    Both stages share one step, set by the upper bound unless given.
    """
    if max_step is None:
        hi = bounds[1] if math.isfinite(bounds[1]) else kappa1_init
        max_step = min(photon.grid.dt / MIN_SUBSTEPS, STEP_RATE_PRODUCT / max(hi, kappa1_init))
    schedule = synthesize_schedule(photon, kappa1_init, bounds, max_step)
    return simulate_capture(photon, schedule, max_step)


@dataclass(frozen=True)
class CaptureSummary:
    eta_final: float
    t_balance: float | None
    reflected_before_balance: float | None
    kappa1_max: float
    kappa1_min_after_balance: float | None
    bookkeeping_residual: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def capture_report(run: CaptureRun) -> CaptureSummary:
    sched = run.schedule
    t_bal = sched.t_balance
    if t_bal is not None:
        before = float(np.interp(t_bal, run.times, run.reflected))
        after = sched.kappa1[sched.balance_index:]
        k_min = float(np.min(after)) if after.size else None
    else:
        before = k_min = None
    return CaptureSummary(
        eta_final=float(run.eta[-1]),
        t_balance=t_bal,
        reflected_before_balance=before,
        kappa1_max=float(np.max(sched.kappa1)),
        kappa1_min_after_balance=k_min,
        bookkeeping_residual=float(np.max(np.abs(run.bookkeeping_residual()))),
    )


def has_dip(kappa1, rel_tol: float = 1e-6) -> bool:
    """True if some sample lies below both an earlier and a later sample.

    Differences smaller than ``rel_tol`` times the largest coupling are ignored.
    """
    k = np.asarray(kappa1, dtype=float)
    if k.size < 3:
        return False
    tol = rel_tol * float(np.max(np.abs(k)))
    before = np.maximum.accumulate(k)[:-2]
    after = np.maximum.accumulate(k[::-1])[::-1][2:]
    mid = k[1:-1]
    return bool(np.any((before > mid + tol) & (after > mid + tol)))
