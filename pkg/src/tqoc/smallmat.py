"""Dense complex 4x4 Hermitian linear algebra.

Eigendecomposition is done with cyclic complex Jacobi rotations, which are
unconditionally stable at this size, dependency-free and deterministic.
Matrix functions (sqrt, powers, ...) are evaluated by spectral calculus on
the resulting decomposition.
"""

from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np

from .errors import DomainError, NotHermitianError

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10

_OFF_TOL = 1e-14
_MAX_SWEEPS = 100


class EigenDecomposition4(NamedTuple):
    """Spectral decomposition m = U diag(w) U^H with eigenvalues ascending."""

    eigenvalues: np.ndarray  # shape (4,), real, ascending
    eigenvectors: np.ndarray  # shape (4, 4), complex, orthonormal columns


def hermiticity_defect(m: np.ndarray) -> float:
    """Frobenius norm of the skew-Hermitian part of ``m``."""
    m = np.asarray(m, dtype=complex)
    return float(np.linalg.norm(m - m.conj().T))


def require_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.shape != (4, 4):
        raise NotHermitianError(f"expected a 4x4 matrix, got shape {m.shape}")
    defect = hermiticity_defect(m)
    if defect > tol:
        raise NotHermitianError(
            f"Hermiticity defect {defect:.3e} exceeds tolerance {tol:.1e}"
        )
    return m


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    """Annihilate a[p, q] with a unitary two-plane rotation; update a and v."""
    apq = a[p, q]
    if apq == 0.0:
        return
    app = a[p, p].real
    aqq = a[q, q].real
    mag = abs(apq)
    phase = apq / mag  # e^{i phi}
    pc = phase.conjugate()
    if app == aqq:
        theta = math.pi / 4.0
    else:
        theta = 0.5 * math.atan2(2.0 * mag, app - aqq)
    c = math.cos(theta)
    s = math.sin(theta)

    # Columns: A <- A U with U restricted to the (p, q) plane.
    col_p = a[:, p].copy()
    col_q = a[:, q].copy()
    a[:, p] = c * col_p + s * pc * col_q
    a[:, q] = -s * col_p + c * pc * col_q
    # Rows: A <- U^H A.
    row_p = a[p, :].copy()
    row_q = a[q, :].copy()
    a[p, :] = c * row_p + s * phase * row_q
    a[q, :] = -s * row_p + c * phase * row_q
    # The rotation zeroes the pivot exactly in exact arithmetic; enforce it.
    a[p, q] = 0.0
    a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real

    col_p = v[:, p].copy()
    col_q = v[:, q].copy()
    v[:, p] = c * col_p + s * pc * col_q
    v[:, q] = -s * col_p + c * pc * col_q


def _offdiag_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def hermitian_eigen(m: np.ndarray) -> EigenDecomposition4:
    """Eigendecomposition of a Hermitian 4x4 matrix.

    Cyclic Jacobi sweeps run until the off-diagonal Frobenius mass drops
    below 1e-14 (relative to the matrix scale) or 100 sweeps.  Eigenvalues
    are returned ascending; each eigenvector is phase-fixed so that its
    largest-magnitude component is real and positive.
    """
    a = require_hermitian(m)
    a = 0.5 * (a + a.conj().T)  # symmetrize roundoff-level defects
    scale = max(1.0, float(np.linalg.norm(a)))
    v = np.eye(4, dtype=complex)
    for _ in range(_MAX_SWEEPS):
        if _offdiag_norm(a) < _OFF_TOL * scale:
            break
        for p in range(3):
            for q in range(p + 1, 4):
                _rotate(a, v, p, q)

    w = np.real(np.diag(a)).copy()
    order = np.argsort(w, kind="stable")
    w = w[order]
    v = v[:, order]
    for k in range(4):
        col = v[:, k]
        i = int(np.argmax(np.abs(col)))
        z = col[i]
        if abs(z) > 0.0:
            v[:, k] = col * (z.conjugate() / abs(z))
    return EigenDecomposition4(w, v)


def matrix_function(
    m: np.ndarray,
    f: Callable[[float], float],
    zero_clamp: float = 1e-12,
) -> np.ndarray:
    """Apply a scalar function to a Hermitian PSD matrix spectrally.

    Eigenvalues below ``zero_clamp`` are treated as exactly zero before
    ``f`` is applied; ``f`` must therefore be finite at 0 whenever such
    eigenvalues occur.  Eigenvalues below the PSD tolerance raise.
    """
    eig = hermitian_eigen(m)
    w = eig.eigenvalues.copy()
    if float(w.min()) < -PSD_TOL:
        raise DomainError(
            f"matrix has eigenvalue {w.min():.3e} below the PSD tolerance"
        )
    w[w < zero_clamp] = 0.0
    try:
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = np.array([float(f(float(x))) for x in w])
    except (ArithmeticError, ValueError) as exc:
        raise DomainError(f"scalar function failed on the spectrum: {exc}") \
            from exc
    if not np.all(np.isfinite(vals)):
        raise DomainError("scalar function returned a non-finite value")
    u = eig.eigenvectors
    return (u * vals) @ u.conj().T
