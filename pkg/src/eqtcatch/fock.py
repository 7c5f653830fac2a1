"""Truncated-Fock Lindblad engine used as an independent oracle.

The density matrix lives on ``N_a x N_c`` number states and evolves under

    rho' = -i [H(t), rho] + kappa_o D[a] rho + kappa_e D[c] rho,
    H(t) = -g(t) (a^dag c^dag + a c).

Two-time correlators follow the regression theorem: a "sandwich" such as
``a rho(t1) a^dag`` is propagated with the same Liouvillian and traced
against the later observable.  All sandwiches are propagated together as
columns of one matrix.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .dynamics import ModeModel


class TruncationWarning(UserWarning):
    """Population in the highest kept Fock level exceeds the tolerance."""


def _destroy(n):
    return sp.diags(np.sqrt(np.arange(1, n)), 1, shape=(n, n), format="csr", dtype=complex)


@dataclass
class _FockSystem:
    a: sp.csr_matrix
    c: sp.csr_matrix
    L0: sp.csr_matrix
    L1: sp.csr_matrix
    dim: int
    top_a: np.ndarray
    top_c: np.ndarray

    @classmethod
    def build(cls, model: ModeModel, cutoffs):
        na, nc = cutoffs
        if na < 3 or nc < 3:
            raise ValueError("Fock cutoffs must be at least 3")
        ia, ic = sp.identity(na, format="csr"), sp.identity(nc, format="csr")
        a = sp.kron(_destroy(na), ic, format="csr")
        c = sp.kron(ia, _destroy(nc), format="csr")
        dim = na * nc
        eye = sp.identity(dim, format="csr")
        p = model.params

        def dissipator(op):
            # row-major vectorisation: vec(A X B) = (A kron B^T) vec(X)
            nop = (op.conj().T @ op).tocsr()
            return sp.kron(op, op.conj()) - 0.5 * sp.kron(nop, eye) - 0.5 * sp.kron(eye, nop.T)

        h1 = -(a.conj().T @ c.conj().T + a @ c)
        L0 = p.kappa_o * dissipator(a) + p.kappa_e * dissipator(c)
        L1 = -1j * (sp.kron(h1, eye) - sp.kron(eye, h1.T))
        top_a = np.zeros(dim)
        top_c = np.zeros(dim)
        top_a[(na - 1) * nc: na * nc] = 1.0
        top_c[nc - 1:: nc] = 1.0
        return cls(a, c, L0.tocsr(), L1.tocsr(), dim, top_a, top_c)

    def vacuum(self):
        rho = np.zeros(self.dim * self.dim, dtype=complex)
        rho[0] = 1.0
        return rho

    def sandwich(self, op):
        """Superoperator X -> op X op^dag."""
        return sp.kron(op, op.conj(), format="csr")

    def expect_row(self, op):
        """Row vector r with r @ vec(X) = Tr(op X)."""
        return np.asarray(op.T.todense()).reshape(-1)

    def diag(self, rho):
        return np.real(rho.reshape(self.dim, self.dim).diagonal())


def _stepper(system, model):
    """Return ``advance(S, step) -> (S, step)`` covering one grid interval."""
    gs = model.stage_g().tolist()
    h, n_sub = model.step, model.n_sub
    L0, L1 = system.L0, system.L1

    def advance(S, step0):
        step = step0
        for _ in range(n_sub):
            g0, g1, g2 = gs[step]
            k1 = L0 @ S + g0 * (L1 @ S)
            St = S + 0.5 * h * k1
            k2 = L0 @ St + g1 * (L1 @ St)
            St = S + 0.5 * h * k2
            k3 = L0 @ St + g1 * (L1 @ St)
            St = S + h * k3
            k4 = L0 @ St + g2 * (L1 @ St)
            S = S + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            step += 1
        return S, step

    return advance


@dataclass(frozen=True)
class FockTrajectory:
    times: np.ndarray
    trace: np.ndarray
    n_a: np.ndarray
    n_c: np.ndarray
    m_ac: np.ndarray
    top_population: np.ndarray


def fock_equal_time(model: ModeModel, cutoffs=(4, 4)) -> FockTrajectory:
    """Equal-time moments from the truncated density matrix on ``model.grid``."""
    model.require_stable()
    system = _FockSystem.build(model, cutoffs)
    advance = _stepper(system, model)
    rows = np.stack([
        system.expect_row(sp.identity(system.dim, format="csr")),
        system.expect_row(system.a.conj().T @ system.a),
        system.expect_row(system.c.conj().T @ system.c),
        system.expect_row(system.a @ system.c),
    ])
    n = model.grid.n_points
    out = np.zeros((4, n), dtype=complex)
    top = np.zeros(n)
    rho = system.vacuum()
    step = 0
    for k in range(n):
        if k:
            rho, step = advance(rho, step)
        out[:, k] = rows @ rho
        pops = system.diag(rho)
        top[k] = max(pops @ system.top_a, pops @ system.top_c)
    return FockTrajectory(model.grid.times, out[0].real, out[1].real, out[2].real, out[3], top)


def fock_correlator_oracle(model: ModeModel, cutoffs=(4, 4), truncation_tol=1e-6) -> np.ndarray:
    """Unnormalized |f(t1, t2)|^2 from normally ordered fourth-order correlators.

    t1 <= t2: <a^dag(t1) c^dag(t2) c(t2) a(t1)> = Tr[c^dag c  e^{L(t2-t1)}(a rho(t1) a^dag)]
    t1 >  t2: <c^dag(t2) a^dag(t1) a(t1) c(t2)> = Tr[a^dag a  e^{L(t1-t2)}(c rho(t2) c^dag)]

    Both are scaled by kappa_o_c kappa_e_c when the model measures output ports.
    """
    model.require_stable()
    system = _FockSystem.build(model, cutoffs)
    advance = _stepper(system, model)
    n = model.grid.n_points
    sandwich_a = system.sandwich(system.a)
    sandwich_c = system.sandwich(system.c)
    count_c = system.expect_row(system.c.conj().T @ system.c)
    count_a = system.expect_row(system.a.conj().T @ system.a)

    # column 0: rho; column 1 + 2j: a-sandwich born at t_j; 2 + 2j: c-sandwich
    S = np.zeros((system.dim**2, 2 * n + 1), dtype=complex)
    S[:, 0] = system.vacuum()
    G = np.zeros((n, n))
    worst_top = 0.0
    step = 0
    for k in range(n):
        if k:
            S[:, : 2 * k + 1], step = advance(S[:, : 2 * k + 1], step)
        rho = S[:, 0]
        S[:, 2 * k + 1] = sandwich_a @ rho
        S[:, 2 * k + 2] = sandwich_c @ rho
        G[: k + 1, k] = np.real(count_c @ S[:, 1: 2 * k + 2: 2])
        G[k, :k] = np.real(count_a @ S[:, 2: 2 * k + 1: 2])
        pops = system.diag(rho)
        worst_top = max(worst_top, pops @ system.top_a, pops @ system.top_c)
    if worst_top > truncation_tol:
        warnings.warn(
            f"top Fock level population {worst_top:.2e} exceeds {truncation_tol:g}; raise the cutoffs",
            TruncationWarning,
            stacklevel=2,
        )
    if model.output_ports:
        G = G * (model.params.kappa_o_c * model.params.kappa_e_c)
    return G
