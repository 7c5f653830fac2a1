"""Gaussian moment engine for the pumped two-mode-squeezing transducer.

In the frame rotating with the blue-detuned pump the mode operators obey

    a'  =  i g(t) c^dagger - (kappa_o / 2) a
    c^dagger' = -i g(t) a  - (kappa_e / 2) c^dagger

with vacuum noise entering through every port.  Starting from vacuum the
state stays Gaussian and is fixed by three equal-time moments
``n_a = <a^dag a>``, ``n_c = <c^dag c>`` and ``m = <a c>``.  Two-time
amplitudes follow from the regression theorem with the later operator kept
on the left, which is the ordering that makes vacuum-input noise drop out.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError, InstabilityError
from .integrate import substeps
from .model import PumpShape, SystemParams, TimeGrid, stability_check

DEFAULT_MAX_STEP = 0.05e-9


@dataclass(frozen=True)
class ModeModel:
    """Transducer, pump and sampling grid, plus numerical knobs.

    ``output_ports`` selects the measured extraction-port fields (kernel
    scaled by sqrt(kappa_o_c kappa_e_c)); ``False`` keeps intracavity
    correlators.
    """

    params: SystemParams
    pump: PumpShape
    grid: TimeGrid
    output_ports: bool = True
    max_step: float = DEFAULT_MAX_STEP
    divergence_bound: float = 1e3

    def g(self, t):
        return self.pump.multiplier(t) * self.params.g0

    def drift(self, t) -> np.ndarray:
        """2x2 generator acting on the column (a, c^dagger)."""
        p = self.params
        g = float(self.g(t))
        return np.array([[-0.5 * p.kappa_o, 1j * g], [-1j * g, -0.5 * p.kappa_e]])

    @property
    def n_sub(self) -> int:
        return substeps(self.grid.dt, self.max_step)

    @property
    def step(self) -> float:
        return self.grid.dt / self.n_sub

    def stage_g(self) -> np.ndarray:
        """g at the RK4 stages of every sub-step, shape (n_steps, 3).

        Columns are the step start, midpoint and end.  The end is sampled a
        hair inside the step so a pump that switches off exactly on the step
        lattice is integrated with its left limit.
        """
        n_steps = self.n_sub * (self.grid.n_points - 1)
        h = self.step
        t0 = self.grid.t_start + h * np.arange(n_steps)
        t = np.stack([t0, t0 + 0.5 * h, t0 + h * (1.0 - 1e-9)], axis=1)
        return np.asarray(self.g(t), dtype=float)

    def require_stable(self):
        ok, margin = stability_check(self.pump, self.params, self.grid)
        if not ok:
            raise InstabilityError(f"squeezing strength reaches {margin:.3g} x the parametric threshold")


@dataclass(frozen=True)
class MomentTrajectory:
    times: np.ndarray
    n_a: np.ndarray
    n_c: np.ndarray
    m_ac: np.ndarray


def evolve_equal_time_moments(model: ModeModel) -> MomentTrajectory:
    """Integrate the closed equal-time moment equations from vacuum.

    Returns the moments sampled on ``model.grid``.
    """
    model.require_stable()
    ko, ke = model.params.kappa_o, model.params.kappa_e
    kt = 0.5 * (ko + ke)
    gs = model.stage_g().tolist()
    h, n_sub = model.step, model.n_sub
    bound = model.divergence_bound

    def rhs(g, na, nc, m):
        s = 2.0 * g * m.imag
        return -ko * na + s, -ke * nc + s, 1j * g * (na + nc + 1.0) - kt * m

    n = model.grid.n_points
    out = np.zeros((3, n), dtype=complex)
    na = nc = 0.0
    m = 0j
    step = 0
    for k in range(1, n):
        for _ in range(n_sub):
            g0, g1, g2 = gs[step]
            a1, b1, c1 = rhs(g0, na, nc, m)
            a2, b2, c2 = rhs(g1, na + 0.5 * h * a1, nc + 0.5 * h * b1, m + 0.5 * h * c1)
            a3, b3, c3 = rhs(g1, na + 0.5 * h * a2, nc + 0.5 * h * b2, m + 0.5 * h * c2)
            a4, b4, c4 = rhs(g2, na + h * a3, nc + h * b3, m + h * c3)
            na += h / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4)
            nc += h / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4)
            m += h / 6.0 * (c1 + 2 * c2 + 2 * c3 + c4)
            step += 1
        if not (abs(na) < bound and abs(nc) < bound and abs(m) < bound):
            raise DivergenceError(f"moments exceed {bound:g} at t = {model.grid.times[k]:.6g} s", model.grid.times[k])
        out[:, k] = na, nc, m
    return MomentTrajectory(model.grid.times, out[0].real.copy(), out[1].real.copy(), out[2].copy())


def physicality_violation(traj: MomentTrajectory) -> float:
    """Largest violation of the Cauchy-Schwarz bounds on |<a c>|^2 (<= 0 is physical)."""
    m2 = np.abs(traj.m_ac) ** 2
    bound = np.minimum(traj.n_a * (traj.n_c + 1.0), (traj.n_a + 1.0) * traj.n_c)
    return float(max(np.max(m2 - bound), -np.min(traj.n_a), -np.min(traj.n_c)))


def _propagate_pairs(model: ModeModel, x0, y0, rate_x, rate_y):
    """Regression sweep for every starting column at once.

    Column ``j`` starts at grid time ``t_j`` with ``(x0[j], y0[j])`` and obeys
    ``x' = i g y - rate_x x / 2`` and ``y' = -i g x - rate_y y / 2``.
    Returns ``P`` with ``P[j, k] = x_j(t_k)`` for ``k >= j`` (zero below).
    """
    n = model.grid.n_points
    gs = model.stage_g().tolist()
    h, n_sub = model.step, model.n_sub
    hx, hy = 0.5 * rate_x, 0.5 * rate_y
    bound = model.divergence_bound
    P = np.zeros((n, n), dtype=complex)
    x = np.zeros(n, dtype=complex)
    y = np.zeros(n, dtype=complex)
    step = 0
    for k in range(n):
        x[k], y[k] = x0[k], y0[k]
        P[: k + 1, k] = x[: k + 1]
        if k == n - 1:
            break
        xs, ys = x[: k + 1], y[: k + 1]
        for _ in range(n_sub):
            g0, g1, g2 = gs[step]
            ig0, ig1, ig2 = 1j * g0, 1j * g1, 1j * g2
            kx1 = ig0 * ys - hx * xs
            ky1 = -ig0 * xs - hy * ys
            xt, yt = xs + 0.5 * h * kx1, ys + 0.5 * h * ky1
            kx2 = ig1 * yt - hx * xt
            ky2 = -ig1 * xt - hy * yt
            xt, yt = xs + 0.5 * h * kx2, ys + 0.5 * h * ky2
            kx3 = ig1 * yt - hx * xt
            ky3 = -ig1 * xt - hy * yt
            xt, yt = xs + h * kx3, ys + h * ky3
            kx4 = ig2 * yt - hx * xt
            ky4 = -ig2 * xt - hy * yt
            xs = xs + (h / 6.0) * (kx1 + 2 * kx2 + 2 * kx3 + kx4)
            ys = ys + (h / 6.0) * (ky1 + 2 * ky2 + 2 * ky3 + ky4)
            step += 1
        x[: k + 1], y[: k + 1] = xs, ys
        if np.max(np.abs(xs), initial=0.0) > bound or np.max(np.abs(ys), initial=0.0) > bound:
            t = model.grid.times[k + 1]
            raise DivergenceError(f"two-time correlations exceed {bound:g} at t = {t:.6g} s", t)
    return P


@dataclass(frozen=True)
class BiphotonKernel:
    """Unit-normalized two-photon amplitude K[i, j] ~ f(t1_i, t2_j).

    ``norm`` is the trapezoidal integral of |f|^2 before normalization, which
    is also the pair generation probability.  A kernel with zero norm keeps
    all-zero values.
    """

    grid: TimeGrid
    values: np.ndarray
    norm: float
    engine: str = "gaussian"
    meta: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_unnormalized(cls, grid, raw, engine="gaussian", meta=None):
        w = grid.weights
        norm = float(np.real(np.einsum("i,j,ij->", w, w, np.abs(raw) ** 2)))
        values = raw / math.sqrt(norm) if norm > 0 else np.zeros_like(raw)
        return cls(grid, values, norm, engine, dict(meta or {}))

    @property
    def generation_probability(self) -> float:
        return self.norm

    def quadrature_norm(self) -> float:
        w = self.grid.weights
        return float(np.einsum("i,j,ij->", w, w, np.abs(self.values) ** 2))

    def intensity(self) -> np.ndarray:
        """Unnormalized |f(t1, t2)|^2."""
        return np.abs(self.values) ** 2 * self.norm

    def unnormalized(self) -> np.ndarray:
        return self.values * math.sqrt(self.norm)


def biphoton_kernel(model: ModeModel, trajectory: MomentTrajectory | None = None) -> BiphotonKernel:
    """Time-ordered pair amplitude <T a(t1) c(t2)> on the model grid.

    For t2 >= t1 the microwave operator is propagated past the optical one,
    for t1 > t2 the other way round.
    """
    if trajectory is None:
        trajectory = evolve_equal_time_moments(model)
    p = model.params
    m = trajectory.m_ac
    # rows: t1 index, columns: t2 index
    later_mw = _propagate_pairs(model, m, trajectory.n_a, p.kappa_e, p.kappa_o)
    later_opt = _propagate_pairs(model, m, trajectory.n_c, p.kappa_o, p.kappa_e)
    raw = np.triu(later_mw) + np.tril(later_opt.T, -1)
    if model.output_ports:
        raw = raw * math.sqrt(p.kappa_o_c * p.kappa_e_c)
    return BiphotonKernel.from_unnormalized(
        model.grid, raw, "gaussian", {"output_ports": model.output_ports, "max_step": model.step}
    )


def accidental_intensity(model: ModeModel, trajectory: MomentTrajectory) -> np.ndarray:
    """Uncorrelated contribution n_a(t1) n_c(t2) to the fourth-order correlator."""
    p = model.params
    scale = p.kappa_o_c * p.kappa_e_c if model.output_ports else 1.0
    return scale * np.outer(trajectory.n_a, trajectory.n_c)


def extraction_efficiencies(params: SystemParams) -> tuple[float, float]:
    """Fractions (optical, microwave) of each photon leaving through the measured port."""
    return params.kappa_o_c / params.kappa_o, params.kappa_e_c / params.kappa_e
