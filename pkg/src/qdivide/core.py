"""Dense Hermitian linear algebra for 2x2 and 4x4 matrices.

Everything downstream works in the Pauli (tensor) basis: matrices are
plain complex ndarrays, coefficient vectors are real ndarrays of shape
(4,) for one qubit or (4, 4) for two qubits, indexed by
(identity, sigma_1, sigma_2, sigma_3) per factor.
"""

import numpy as np

from ._pauli import BASIS4, SIGMA
from .backend import kernels

HERMITICITY_TOL = 1e-12


def require_hermitian(h: np.ndarray, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Validate that ``h`` is square, of dimension 2 or 4, and Hermitian.

    Returns the input as a complex ndarray.  Raises ValueError when the
    deviation from Hermiticity exceeds ``tol`` (absolute, entrywise).
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    if h.shape[0] not in (2, 4):
        raise ValueError(f"only dimensions 2 and 4 are supported, got {h.shape[0]}")
    dev = np.abs(h - h.conj().T).max()
    if dev > tol:
        raise ValueError(f"matrix is not Hermitian within {tol:g} (deviation {dev:g})")
    return h


def pauli_decompose(h: np.ndarray, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Real Pauli(-tensor) coefficients of a Hermitian 2x2 or 4x4 matrix.

    For dimension 2 returns c with c[mu] = Tr(h sigma_mu) / 2, shape (4,).
    For dimension 4 returns c with c[mu, nu] = Tr(h sigma_mu x sigma_nu) / 4,
    shape (4, 4).
    """
    h = require_hermitian(h, tol)
    if h.shape[0] == 2:
        c = np.einsum("kba,ab->k", SIGMA, h) / 2.0
    else:
        c = np.einsum("ijba,ab->ij", BASIS4, h) / 4.0
    if np.abs(c.imag).max() > tol:
        raise ValueError("Pauli coefficients have a non-real part beyond tolerance")
    return np.ascontiguousarray(c.real)


def pauli_compose(c: np.ndarray) -> np.ndarray:
    """Hermitian matrix with the given real Pauli(-tensor) coefficients.

    Inverse of :func:`pauli_decompose`; accepts shape (4,) or (4, 4).
    """
    c = np.asarray(c, dtype=float)
    if c.shape == (4,):
        return np.einsum("k,kab->ab", c, SIGMA)
    if c.shape == (4, 4):
        return np.einsum("ij,ijab->ab", c, BASIS4)
    raise ValueError(f"expected coefficients of shape (4,) or (4, 4), got {c.shape}")


def eigenvalues(h: np.ndarray, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix, ascending."""
    h = require_hermitian(h, tol)
    return kernels.eigvalsh(h)


def trace_norm(h: np.ndarray, tol: float = HERMITICITY_TOL) -> float:
    """Trace norm (sum of absolute eigenvalues) of a Hermitian matrix."""
    return float(np.abs(eigenvalues(h, tol)).sum())
