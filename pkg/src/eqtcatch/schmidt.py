"""Schmidt decomposition of a sampled two-photon amplitude.

The kernel is weighted with trapezoidal quadrature, ``M_ij = sqrt(w_i) K_ij
sqrt(w_j)``, so that the matrix SVD is the discretized integral-operator SVD.
Singular vectors are unweighted back into functions of time that are
orthonormal under the same quadrature.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import BiphotonKernel
from .model import TimeGrid

NORM_TOL = 1e-8


def entanglement_entropy(lambdas) -> float:
    """S = -sum lambda_k ln lambda_k in nats, with 0 ln 0 = 0."""
    lam = np.asarray(lambdas, dtype=float)
    if lam.ndim != 1 or lam.size == 0:
        raise ValueError("expected a non-empty 1-D sequence of Schmidt coefficients")
    if np.any(lam < 0) or abs(lam.sum() - 1.0) > NORM_TOL:
        raise ValueError("Schmidt coefficients must be non-negative and sum to 1")
    nz = lam[lam > 0]
    return float(-np.sum(nz * np.log(nz)))


def _fix_phase(vec):
    """Rotate so the largest-modulus sample is real and positive; return the phase removed."""
    k = int(np.argmax(np.abs(vec)))
    if vec[k] == 0:
        return vec, 1.0 + 0j
    phase = vec[k] / abs(vec[k])
    return vec / phase, phase


@dataclass(frozen=True)
class SchmidtDecomposition:
    """Mode pairs with K(t1, t2) = sum_k sqrt(lambda_k) phases_k f^o_k(t1) f^e_k(t2).

    Both mode families are phase-fixed independently (largest sample real and
    positive), so a unit-modulus ``phases_k`` absorbs the joint phase.
    ``captured`` is the share of the norm kept after truncation.
    """

    grid: TimeGrid
    lambdas: np.ndarray
    optical_modes: np.ndarray
    microwave_modes: np.ndarray
    phases: np.ndarray
    captured: float

    @property
    def entropy(self) -> float:
        lam = self.lambdas / self.lambdas.sum()
        return entanglement_entropy(lam)

    def reconstruct(self) -> np.ndarray:
        amp = np.sqrt(self.lambdas) * self.phases
        return np.einsum("k,ki,kj->ij", amp, self.optical_modes, self.microwave_modes)

    def overlap_residual(self) -> float:
        """Largest deviation from quadrature-weighted orthonormality over both families."""
        w = self.grid.weights
        worst = 0.0
        for modes in (self.optical_modes, self.microwave_modes):
            gram = (modes.conj() * w) @ modes.T
            worst = max(worst, float(np.max(np.abs(gram - np.eye(len(modes))))))
        return worst


def schmidt_decompose(kernel: BiphotonKernel, max_modes: int | None = None,
                      magnitude_only: bool = False) -> SchmidtDecomposition:
    """Decompose a unit-normalized kernel into Schmidt mode pairs.

    ``magnitude_only`` decomposes |K| instead of the complex amplitude.
    """
    grid = kernel.grid
    if grid.n_points < 2 or kernel.values.shape != (grid.n_points, grid.n_points):
        raise ValueError("kernel values do not match a usable square grid")
    if abs(kernel.quadrature_norm() - 1.0) > NORM_TOL:
        raise ValueError(f"kernel is not normalized (quadrature norm {kernel.quadrature_norm():.6g})")
    if max_modes is not None and max_modes < 1:
        raise ValueError("max_modes must be at least 1")

    values = np.abs(kernel.values) if magnitude_only else kernel.values
    sw = np.sqrt(grid.weights)
    u, s, vh = np.linalg.svd(sw[:, None] * values * sw[None, :])
    total = float(np.sum(s**2))
    keep = len(s) if max_modes is None else min(max_modes, len(s))
    lambdas = s[:keep] ** 2 / total

    optical = np.empty((keep, grid.n_points), dtype=complex)
    microwave = np.empty((keep, grid.n_points), dtype=complex)
    phases = np.empty(keep, dtype=complex)
    for k in range(keep):
        fo, po = _fix_phase(u[:, k] / sw)
        fe, pe = _fix_phase(vh[k] / sw)
        optical[k], microwave[k], phases[k] = fo, fe, po * pe
    return SchmidtDecomposition(grid, lambdas, optical, microwave, phases, float(lambdas.sum()))


@dataclass(frozen=True)
class ModeProfile:
    times: np.ndarray
    amplitude: np.ndarray

    @property
    def envelope(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2


def zero_mode_profile(decomp: SchmidtDecomposition, branch: str = "microwave") -> ModeProfile:
    """Dominant Schmidt mode of the chosen branch ("optical" or "microwave")."""
    if branch == "optical":
        modes = decomp.optical_modes
    elif branch == "microwave":
        modes = decomp.microwave_modes
    else:
        raise ValueError(f"branch must be 'optical' or 'microwave', not {branch!r}")
    return ModeProfile(decomp.grid.times, modes[0].copy())


def separable_kernel(grid: TimeGrid, u, v) -> BiphotonKernel:
    """Product kernel u(t1) v(t2), normalized; handy for checks and demos."""
    return BiphotonKernel.from_unnormalized(grid, np.outer(u, v), engine="product")


def relative_l2(a, b) -> float:
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def schmidt_number(decomp: SchmidtDecomposition) -> float:
    """Effective number of modes 1 / sum lambda^2."""
    lam = decomp.lambdas / decomp.lambdas.sum()
    return 1.0 / float(np.sum(lam**2))


__all__ = [
    "ModeProfile",
    "SchmidtDecomposition",
    "entanglement_entropy",
    "relative_l2",
    "schmidt_decompose",
    "schmidt_number",
    "separable_kernel",
    "zero_mode_profile",
]
