"""Scalar state functionals for post-optimization analysis.

All quantities are evaluated spectrally with an eigenvalue clamp of 1e-12:
numerically propagated pure states carry O(1e-10) negative eigenvalues that
must be treated as exact zeros.  Natural logarithms throughout.  Relative
entropies return math.inf when the support condition fails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import Trajectory
from .errors import BadAlphaError, NotDensityMatrixError
from .model import OFFDIAG_SLOTS, derealify
from .objectives import ObjectiveSpec, OVERLAP_WEIGHTS, overlap, smoothed_value
from .smallmat import hermitian_eigen, hermiticity_defect

EIG_CLAMP = 1e-12
DEFAULT_RENYI_ORDERS = (0.1, 0.8, 5.0)

_HERM_TOL = 1e-8
_TRACE_TOL = 1e-7
_PSD_TOL = 1e-8


def _density_eigen(rho: np.ndarray):
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4) or hermiticity_defect(rho) > _HERM_TOL:
        raise NotDensityMatrixError("input is not a Hermitian 4x4 matrix")
    if abs(float(np.trace(rho).real) - 1.0) > _TRACE_TOL:
        raise NotDensityMatrixError("input trace deviates from 1")
    eig = hermitian_eigen(rho)
    if float(eig.eigenvalues[0]) < -_PSD_TOL:
        raise NotDensityMatrixError(
            f"eigenvalue {eig.eigenvalues[0]:.3e} below the PSD tolerance")
    return eig


def _entropy_from_eigs(w: np.ndarray) -> float:
    w = w[w > EIG_CLAMP]
    s = -float(np.sum(w * np.log(w)))
    return max(s, 0.0) + 0.0  # normalize -0.0


def entropy(rho: np.ndarray) -> float:
    """von Neumann entropy -Tr(rho log rho) in nats."""
    return _entropy_from_eigs(_density_eigen(rho).eigenvalues)


def purity(rho: np.ndarray) -> float:
    """Tr rho^2 = sum of squared moduli of all entries."""
    rho = np.asarray(rho, dtype=complex)
    _density_eigen(rho)
    return float(np.vdot(rho, rho).real)


def _uj_from_eigen(eig_rho, sigma: np.ndarray) -> float:
    w = np.maximum(eig_rho.eigenvalues, 0.0)
    u = eig_rho.eigenvectors
    sqrt_rho = (u * np.sqrt(w)) @ u.conj().T
    inner = sqrt_rho @ sigma @ sqrt_rho
    inner = 0.5 * (inner + inner.conj().T)
    vals = np.maximum(hermitian_eigen(inner).eigenvalues, 0.0)
    return float(np.sum(np.sqrt(vals)) ** 2)


def uj_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann-Jozsa fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2."""
    eig_rho = _density_eigen(rho)
    _density_eigen(sigma)
    return _uj_from_eigen(eig_rho, np.asarray(sigma, dtype=complex))


def _rel_entropy_from_eigens(eig_rho, eig_sigma) -> float:
    w1, u1 = eig_rho
    w2, u2 = eig_sigma
    overlaps = np.abs(u1.conj().T @ u2) ** 2  # overlaps[i, j] = |<u_i, v_j>|^2
    live = w1 > EIG_CLAMP
    dead = w2 <= EIG_CLAMP
    for j in np.nonzero(dead)[0]:
        if float(w1[live] @ overlaps[live, j]) > EIG_CLAMP:
            return math.inf
    term1 = float(np.sum(w1[live] * np.log(w1[live])))
    keep = ~dead
    term2 = float(w1[live] @ overlaps[np.ix_(live, keep)] @ np.log(w2[keep]))
    return term1 - term2


def relative_entropy(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Quantum relative entropy Tr(rho (log rho - log sigma)) or +inf."""
    return _rel_entropy_from_eigens(_density_eigen(rho), _density_eigen(sigma))


def _petz_from_eigens(eig_rho, eig_sigma, alpha: float) -> float:
    w1, u1 = eig_rho
    w2, u2 = eig_sigma
    overlaps = np.abs(u1.conj().T @ u2) ** 2
    w1 = np.maximum(w1, 0.0)
    pow1 = np.where(w1 > EIG_CLAMP, w1, 0.0) ** alpha
    if alpha > 1.0:
        dead = w2 <= EIG_CLAMP
        for j in np.nonzero(dead)[0]:
            if float(pow1 @ overlaps[:, j]) > EIG_CLAMP:
                return math.inf
        keep = ~dead
    else:
        keep = w2 > EIG_CLAMP
    pow2 = np.maximum(w2[keep], 0.0) ** (1.0 - alpha)
    total = float(pow1 @ overlaps[:, keep] @ pow2)
    if total <= 0.0:
        return math.inf
    return math.log(total) / (alpha - 1.0)


def petz_renyi(rho: np.ndarray, sigma: np.ndarray, alpha: float) -> float:
    """Petz-Renyi relative entropy of order alpha in (0,1) or (1,inf)."""
    if not (alpha > 0.0 and alpha != 1.0 and math.isfinite(alpha)):
        raise BadAlphaError(f"order must be in (0,1) or (1,inf), got {alpha}")
    return _petz_from_eigens(_density_eigen(rho), _density_eigen(sigma), alpha)


def aleph(traj: Trajectory) -> float:
    """Time-averaged off-diagonal mass sum_{i<j} |rho_ij|^2 (left-endpoint sum)."""
    off = traj.states[:-1, list(OFFDIAG_SLOTS)]
    return float(np.sum(off * off) / (traj.states.shape[0] - 1))


def distance_squared(x: np.ndarray, target: np.ndarray) -> float:
    """Squared Hilbert-Schmidt distance of two realified states."""
    d = np.asarray(x, dtype=float) - np.asarray(target, dtype=float)
    return float(d @ (OVERLAP_WEIGHTS * d))


def smoothed_overlap_dev(x: np.ndarray, spec: ObjectiveSpec) -> float:
    """Smoothed |overlap - setpoint| evaluated at an intermediate state."""
    if spec.setpoint is None:
        raise ValueError("spec has no setpoint")
    return smoothed_value(overlap(x, spec), spec.setpoint, spec.smoothing)


@dataclass(frozen=True)
class DiagnosticsRow:
    t: float
    overlap: float
    entropy: float
    purity: float
    uj_fidelity: float
    rel_entropy: float
    petz_renyi: tuple
    distance_sq: float
    smoothed_overlap_dev: float


def compute_rows(traj: Trajectory, spec: ObjectiveSpec,
                 alphas=DEFAULT_RENYI_ORDERS) -> list:
    """Diagnostics at every trajectory node against the objective's target."""
    sigma = derealify(spec.target)
    eig_sigma = _density_eigen(sigma)
    rows = []
    steer = spec.setpoint is not None
    for t, x in zip(traj.times, traj.states):
        rho = derealify(x)
        eig_rho = _density_eigen(rho)
        rows.append(DiagnosticsRow(
            t=float(t),
            overlap=overlap(x, spec),
            entropy=_entropy_from_eigs(eig_rho.eigenvalues),
            purity=float(np.vdot(rho, rho).real),
            uj_fidelity=_uj_from_eigen(eig_rho, sigma),
            rel_entropy=_rel_entropy_from_eigens(eig_rho, eig_sigma),
            petz_renyi=tuple(_petz_from_eigens(eig_rho, eig_sigma, a)
                             for a in alphas),
            distance_sq=distance_squared(x, spec.target),
            smoothed_overlap_dev=(
                smoothed_value(overlap(x, spec), spec.setpoint, spec.smoothing)
                if steer else math.nan),
        ))
    return rows
