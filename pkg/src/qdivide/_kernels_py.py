"""Pure-Python kernel fallback.

Mirrors the API of the compiled extension ``qdivide._kernels`` using
vectorized NumPy (LAPACK) calls, so the package works without a C
toolchain.  ``qdivide.backend`` picks one of the two at import time.
"""

import numpy as np

from ._pauli import BASIS4

BACKEND = "numpy"


def eigvalsh(a):
    """Eigenvalues of a Hermitian matrix, ascending."""
    return np.linalg.eigvalsh(a)


def eigvalsh_batch(a):
    """Eigenvalues of a stack of Hermitian matrices, shape (m, n) ascending."""
    return np.linalg.eigvalsh(a)


def trace_norms_batch(a):
    """Trace norms (sum of absolute eigenvalues) of a stack of Hermitian matrices."""
    return np.abs(np.linalg.eigvalsh(a)).sum(axis=-1)


def pauli_tensor_trace_norms(coeffs, lam_left, lam_right):
    """Trace-norm trajectory of a two-qubit Pauli-diagonal evolution.

    coeffs:    (4, 4) real Pauli-tensor coefficients c_{mu nu}
    lam_left:  (T, 4) eigenvalue columns (1, l1, l2, l3) of the left factor
    lam_right: (T, 4) for the right factor

    Returns the (T,) array of trace norms of
    sum_{mu nu} lam_left[t, mu] lam_right[t, nu] c_{mu nu} sigma_mu (x) sigma_nu.
    """
    w = lam_left[:, :, None] * lam_right[:, None, :] * coeffs[None, :, :]
    h = np.einsum("tij,ijab->tab", w, BASIS4)
    return np.abs(np.linalg.eigvalsh(h)).sum(axis=-1)
