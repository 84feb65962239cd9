"""Dense linear-algebra kernel for small Hilbert spaces.

Everything downstream funnels matrix functions through the Hermitian
eigendecomposition here, so unitaries come out exactly unitary (up to
roundoff in the eigensolver) and square roots stay positive
semidefinite by construction.  Dense only; total dimensions in this
package stay small (a few thousand at most).
"""

from __future__ import annotations

import numpy as np

from .errors import NotHermitianError, NotPSDError

__all__ = [
    "kron",
    "kron_all",
    "require_hermitian",
    "hermitian_eig",
    "expm_i_hermitian",
    "sqrtm_psd",
]

HERM_TOL = 1e-10

# eigenvalues of a PSD matrix may dip slightly negative in floating point;
# below this floor the matrix is treated as genuinely indefinite
PSD_FLOOR = -1e-10


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product, left factor slowest-varying."""
    return np.kron(np.asarray(a), np.asarray(b))


def kron_all(ops) -> np.ndarray:
    """Kronecker product of a sequence of matrices, left to right."""
    ops = list(ops)
    if not ops:
        raise ValueError("kron_all needs at least one factor")
    out = np.asarray(ops[0])
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def require_hermitian(m: np.ndarray, tol: float = HERM_TOL) -> np.ndarray:
    """Return ``m`` as a complex array, raising NotHermitianError beyond ``tol``.

    The tolerance is absolute on the max entry of ``m - m†``.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotHermitianError(f"expected a square matrix, got shape {m.shape}")
    dev = np.abs(m - m.conj().T).max()
    if dev > tol:
        raise NotHermitianError(f"matrix deviates from Hermitian by {dev:.3e}")
    return m


def hermitian_eig(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvector columns of a Hermitian matrix."""
    m = require_hermitian(m)
    w, v = np.linalg.eigh(m)
    return w, v


def expm_i_hermitian(m: np.ndarray, t: float) -> np.ndarray:
    """exp(-i t m) for Hermitian ``m``, via the spectral decomposition.

    Exact per-call: no scaling-and-squaring, no step accumulation.
    """
    w, v = hermitian_eig(m)
    return (v * np.exp(-1j * t * w)) @ v.conj().T


def sqrtm_psd(m: np.ndarray) -> np.ndarray:
    """Principal square root of a positive semidefinite Hermitian matrix.

    Eigenvalues in (PSD_FLOOR, 0) are clamped to zero; anything below the
    floor raises NotPSDError.
    """
    w, v = hermitian_eig(m)
    if w[0] < PSD_FLOOR:
        raise NotPSDError(f"minimum eigenvalue {w[0]:.3e} below {PSD_FLOOR:.0e}")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T
